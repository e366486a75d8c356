#pragma once

#include <optional>
#include <span>
#include <vector>

namespace skinburst {

enum class ShapeTag { LorentzianLike, InverseLorentzianLike, Bimodal, Other };

const char* to_string(ShapeTag tag) noexcept;

struct ShapeOptions {
    int smoothing_width = 5;
    /// Extrema must be within this distance of ln eta = 0 where location matters.
    double near_zero = 0.2;
    /// Hysteresis for extremum detection, as a fraction of the smoothed range.
    double prominence = 0.01;
    /// Endpoint-to-minimum ratio required of an inverse-Lorentzian dip.
    double dip_ratio = 2.0;
};

struct Extremum {
    std::size_t index = 0;
    bool is_max = false;
};

struct ShapeAnalysis {
    ShapeTag tag = ShapeTag::Other;
    std::vector<double> smoothed;
    std::vector<Extremum> extrema;  // interior, in grid order

    std::size_t maxima() const noexcept;
    std::size_t minima() const noexcept;
};

/// Centered moving average; the window shrinks symmetrically at the ends.
std::vector<double> moving_average(std::span<const double> values, int width);

/// Interior turning points whose rise and fall both exceed `tolerance`.
std::vector<Extremum> find_extrema(std::span<const double> values, double tolerance);

/// Throws GridTooCoarse below 21 points, BadSize on length mismatch.
ShapeAnalysis analyze_shape(std::span<const double> grid, std::span<const double> curve,
                            const ShapeOptions& options = {});

ShapeTag classify_shape(std::span<const double> grid, std::span<const double> curve,
                        const ShapeOptions& options = {});

/// First grid value past the positive-side maximum where the curve falls
/// below fraction * max. Empty if it never does within the grid.
std::optional<double> drop_threshold(std::span<const double> grid, std::span<const double> curve,
                                     double fraction = 0.5);

}  // namespace skinburst
