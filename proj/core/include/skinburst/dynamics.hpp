#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skinburst/lattice.hpp"
#include "skinburst/shape.hpp"

namespace skinburst {

/// Largest allowed dt * (max absolute row sum of H).
inline constexpr double kStabilityBudget = 2.5;
/// Default dt * (max absolute row sum of H).
inline constexpr double kDefaultCourant = 0.15;

struct PropagationControls {
    double dt = 0.0;      // 0: kDefaultCourant / row-sum bound
    double t_max = 0.0;   // 0: 50 N
    double eps_stop = 1e-10;
    /// Keep every k-th state in the trajectory (0 keeps none).
    int record_stride = 0;
};

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> survival;   // S(t_k)
    std::vector<double> loss_rate;  // 2 sum_n gamma_n |psi_B|^2 at t_k
    std::vector<double> state_times;
    std::vector<ComplexVector> states;
    bool stopped_by_survival = false;

    double stop_time() const noexcept { return times.empty() ? 0.0 : times.back(); }
};

/// Called after every accepted step with (t, psi).
using StepObserver = std::function<void(double, const ComplexVector&)>;

/// Max absolute row sum.
double row_sum_bound(const ComplexMatrix& h);

/// Fixed-step classical Runge-Kutta for i dpsi/dt = H psi on a compressed
/// sparse copy of H.
class Propagator {
public:
    explicit Propagator(const ComplexMatrix& h);

    int dim() const noexcept { return dim_; }
    double row_sum_bound() const noexcept { return bound_; }
    /// One step in place. Not thread-safe (owns scratch buffers).
    void step(ComplexVector& psi, double dt);
    /// out = -i H x
    void apply(const ComplexVector& x, ComplexVector& out) const;

private:
    int dim_ = 0;
    double bound_ = 0.0;
    std::vector<int> row_start_;
    std::vector<int> col_;
    std::vector<Complex> val_;  // -i H entries
    ComplexVector k1_, k2_, k3_, k4_, tmp_;
};

/// Delta on sublattice A of cell n0. Throws BadInitialCell.
ComplexVector initial_state(const LatticeConfig& config, int n0);

/// Resolved dt and t_max for a config. Throws StepTooLarge.
PropagationControls resolve_controls(const LatticeConfig& config, const PropagationControls& controls,
                                     const BuildOptions& options = {});

Trajectory propagate(const LatticeConfig& config, const ComplexVector& psi0,
                     const PropagationControls& controls, const BuildOptions& options = {},
                     const StepObserver& observer = {});

struct DissipationProfile {
    std::vector<double> P;  // per cell, index n-1
    std::vector<double> times;
    std::vector<double> survival;
    double stop_time = 0.0;
    double tail_bound = 0.0;  // S(T_stop)
    double normalization_defect = 0.0;
    bool tail_too_fat = false;
    double dt = 0.0;

    double total() const noexcept;
    double at(int cell) const { return P.at(static_cast<std::size_t>(cell - 1)); }
};

/// P_n = 2 int gamma_n |psi_B,n|^2 dt by composite Simpson on the step grid.
DissipationProfile dissipation_profile(const LatticeConfig& config, int n0,
                                       const PropagationControls& controls = {},
                                       const BuildOptions& options = {});
DissipationProfile dissipation_from_state(const LatticeConfig& config, const ComplexVector& psi0,
                                          const PropagationControls& controls = {},
                                          const BuildOptions& options = {});

/// (m, m+1 mod N) for every impurity.
std::vector<std::pair<int, int>> burst_regions(const LatticeConfig& config);

/// Both sites of the region exceed both outer neighbours.
bool burst_triggered(const DissipationProfile& profile, std::pair<int, int> region);

/// max / median of P_n over cells at PBC distance >= N/5 from n0.
double flat_response_ratio(const DissipationProfile& profile, int n0);

/// Density-weighted mean cell, unwrapped around `reference` (range reference +- N/2).
double center_of_mass(const ComplexVector& psi, double reference);

/// Largest |S_{k+2} - S_k + h/3 (r_k + 4 r_{k+1} + r_{k+2})| over the run.
double bookkeeping_defect(const Trajectory& trajectory);

struct ScanOptions {
    PropagationControls controls;
    unsigned threads = 0;
    double drop_fraction = 0.5;
    ShapeOptions shape;
    BuildOptions build;
};

struct ScanPoint {
    double ln_eta = 0.0;
    bool ok = false;
    std::string status;  // "ok", "tail_too_fat" or an error id
    double normalization_defect = 0.0;
    double tail_bound = 0.0;
};

struct BurstScanResult {
    std::vector<double> grid;
    std::vector<int> sites;
    std::vector<std::vector<double>> curves;  // [site][grid point], NaN where the point failed
    std::vector<ScanPoint> points;
    std::vector<ShapeTag> shapes;
    std::vector<std::optional<double>> drop_thresholds;
    /// Full profiles per grid point, kept only when requested.
    std::vector<std::vector<double>> profiles;
};

/// count evenly spaced values from a to b inclusive.
std::vector<double> linspace(double a, double b, int count);

/// One dissipation run per ln eta, eta = exp(ln eta). Points run concurrently
/// and land in grid order. Per-point failures are recorded, not thrown.
BurstScanResult eta_scan(const LatticeConfig& config_template, std::span<const double> lneta_grid, int n0,
                         std::span<const int> sites, const ScanOptions& options = {},
                         bool keep_profiles = false);

}  // namespace skinburst
