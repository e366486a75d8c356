#include "skinburst/shape.hpp"

#include <algorithm>
#include <cmath>

#include "skinburst/error.hpp"

namespace skinburst {

const char* to_string(ShapeTag tag) noexcept {
    switch (tag) {
        case ShapeTag::LorentzianLike: return "LORENTZIAN_LIKE";
        case ShapeTag::InverseLorentzianLike: return "INVERSE_LORENTZIAN_LIKE";
        case ShapeTag::Bimodal: return "BIMODAL";
        case ShapeTag::Other: break;
    }
    return "OTHER";
}

std::size_t ShapeAnalysis::maxima() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(extrema.begin(), extrema.end(), [](const Extremum& e) { return e.is_max; }));
}

std::size_t ShapeAnalysis::minima() const noexcept { return extrema.size() - maxima(); }

std::vector<double> moving_average(std::span<const double> values, int width) {
    const int n = static_cast<int>(values.size());
    const int half = std::max(0, width / 2);
    std::vector<double> out(values.size());
    for (int i = 0; i < n; ++i) {
        const int reach = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (int j = i - reach; j <= i + reach; ++j) acc += values[j];
        out[i] = acc / (2 * reach + 1);
    }
    return out;
}

std::vector<Extremum> find_extrema(std::span<const double> y, double tolerance) {
    std::vector<Extremum> out;
    const std::size_t n = y.size();
    if (n < 3) return out;
    enum class Mode { Unknown, Rising, Falling } mode = Mode::Unknown;
    std::size_t hi = 0;
    std::size_t lo = 0;
    for (std::size_t i = 1; i < n; ++i) {
        switch (mode) {
            case Mode::Unknown:
                if (y[i] > y[hi]) hi = i;
                if (y[i] < y[lo]) lo = i;
                if (y[i] - y[lo] > tolerance) {
                    if (y[0] - y[lo] > tolerance) out.push_back({lo, false});
                    mode = Mode::Rising;
                    hi = i;
                } else if (y[hi] - y[i] > tolerance) {
                    if (y[hi] - y[0] > tolerance) out.push_back({hi, true});
                    mode = Mode::Falling;
                    lo = i;
                }
                break;
            case Mode::Rising:
                if (y[i] > y[hi]) {
                    hi = i;
                } else if (y[hi] - y[i] > tolerance) {
                    out.push_back({hi, true});
                    mode = Mode::Falling;
                    lo = i;
                }
                break;
            case Mode::Falling:
                if (y[i] < y[lo]) {
                    lo = i;
                } else if (y[i] - y[lo] > tolerance) {
                    out.push_back({lo, false});
                    mode = Mode::Rising;
                    hi = i;
                }
                break;
        }
    }
    return out;
}

ShapeAnalysis analyze_shape(std::span<const double> grid, std::span<const double> curve,
                            const ShapeOptions& options) {
    if (grid.size() != curve.size()) throw Error(ErrorCode::BadSize, "grid and curve lengths differ");
    if (grid.size() < 21) throw Error(ErrorCode::GridTooCoarse, "shape classification needs at least 21 points");
    ShapeAnalysis out;
    if (std::any_of(curve.begin(), curve.end(), [](double v) { return !std::isfinite(v); })) return out;
    out.smoothed = moving_average(curve, options.smoothing_width);
    const auto [mn, mx] = std::minmax_element(out.smoothed.begin(), out.smoothed.end());
    const double range = *mx - *mn;
    if (!(range > 0.0)) return out;
    out.extrema = find_extrema(out.smoothed, options.prominence * range);

    const std::size_t n_max = out.maxima();
    const std::size_t n_min = out.minima();
    const auto near_zero = [&](std::size_t i) { return std::abs(grid[i]) < options.near_zero; };
    if (n_max == 2) {
        out.tag = ShapeTag::Bimodal;
    } else if (n_max == 1 && n_min == 0 && near_zero(out.extrema.front().index)) {
        out.tag = ShapeTag::LorentzianLike;
    } else if (n_max == 0 && n_min == 1 && near_zero(out.extrema.front().index)) {
        const double floor = out.smoothed[out.extrema.front().index];
        if (out.smoothed.front() >= options.dip_ratio * floor &&
            out.smoothed.back() >= options.dip_ratio * floor) {
            out.tag = ShapeTag::InverseLorentzianLike;
        }
    }
    return out;
}

ShapeTag classify_shape(std::span<const double> grid, std::span<const double> curve,
                        const ShapeOptions& options) {
    return analyze_shape(grid, curve, options).tag;
}

std::optional<double> drop_threshold(std::span<const double> grid, std::span<const double> curve,
                                     double fraction) {
    if (grid.size() != curve.size()) throw Error(ErrorCode::BadSize, "grid and curve lengths differ");
    std::optional<std::size_t> peak;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] <= 0.0 || !std::isfinite(curve[i])) continue;
        if (!peak || curve[i] > curve[*peak]) peak = i;
    }
    if (!peak) return std::nullopt;
    const double level = fraction * curve[*peak];
    for (std::size_t i = *peak + 1; i < grid.size(); ++i) {
        if (curve[i] < level) return grid[i];
    }
    return std::nullopt;
}

}  // namespace skinburst
