#include "skinburst/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skinburst/error.hpp"
#include "skinburst/parallel.hpp"

namespace skinburst {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

std::vector<double> loss_rates(const LatticeConfig& config, const BuildOptions& options) {
    if (options.b_loss_override) return *options.b_loss_override;
    std::vector<double> g(config.N);
    for (int n = 1; n <= config.N; ++n) g[n - 1] = config.b_loss(n);
    return g;
}

double survival(const ComplexVector& psi) { return psi.squaredNorm(); }

double total_loss_rate(const ComplexVector& psi, const std::vector<double>& gamma) {
    double r = 0.0;
    for (std::size_t n = 0; n < gamma.size(); ++n) r += 2.0 * gamma[n] * std::norm(psi(2 * n + 1));
    return r;
}

void cell_loss_rates(const ComplexVector& psi, const std::vector<double>& gamma, std::vector<double>& out) {
    for (std::size_t n = 0; n < gamma.size(); ++n) out[n] = 2.0 * gamma[n] * std::norm(psi(2 * n + 1));
}

}  // namespace

double row_sum_bound(const ComplexMatrix& h) {
    return h.rows() == 0 ? 0.0 : h.cwiseAbs().rowwise().sum().maxCoeff();
}

Propagator::Propagator(const ComplexMatrix& h) : dim_(static_cast<int>(h.rows())), bound_(skinburst::row_sum_bound(h)) {
    if (h.rows() != h.cols()) throw Error(ErrorCode::BadSize, "Hamiltonian must be square");
    row_start_.reserve(dim_ + 1);
    row_start_.push_back(0);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            if (h(i, j) != Complex{}) {
                col_.push_back(j);
                val_.push_back(kMinusI * h(i, j));
            }
        }
        row_start_.push_back(static_cast<int>(col_.size()));
    }
    for (ComplexVector* v : {&k1_, &k2_, &k3_, &k4_, &tmp_}) v->resize(dim_);
}

void Propagator::apply(const ComplexVector& x, ComplexVector& out) const {
    for (int i = 0; i < dim_; ++i) {
        Complex acc{};
        for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += val_[k] * x(col_[k]);
        out(i) = acc;
    }
}

void Propagator::step(ComplexVector& psi, double dt) {
    apply(psi, k1_);
    tmp_ = psi + (0.5 * dt) * k1_;
    apply(tmp_, k2_);
    tmp_ = psi + (0.5 * dt) * k2_;
    apply(tmp_, k3_);
    tmp_ = psi + dt * k3_;
    apply(tmp_, k4_);
    psi += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

ComplexVector initial_state(const LatticeConfig& config, int n0) {
    if (n0 < 1 || n0 > config.N) {
        throw Error(ErrorCode::BadInitialCell,
                    "initial cell " + std::to_string(n0) + " outside 1.." + std::to_string(config.N));
    }
    ComplexVector psi = ComplexVector::Zero(2 * config.N);
    psi(2 * (n0 - 1)) = 1.0;
    return psi;
}

PropagationControls resolve_controls(const LatticeConfig& config, const PropagationControls& controls,
                                     const BuildOptions& options) {
    if (controls.dt < 0.0 || controls.t_max < 0.0 || !(controls.eps_stop >= 0.0)) {
        throw Error(ErrorCode::Usage, "dt, t_max and eps_stop must be nonnegative");
    }
    const double bound = row_sum_bound(build_hamiltonian(config, Basis::CrossStitch, options).data);
    PropagationControls out = controls;
    if (out.dt == 0.0) out.dt = bound > 0.0 ? kDefaultCourant / bound : kDefaultCourant;
    if (out.t_max == 0.0) out.t_max = 50.0 * config.N;
    if (out.dt * bound > kStabilityBudget) {
        std::ostringstream msg;
        msg << "dt * rho = " << out.dt * bound << " exceeds the stability budget " << kStabilityBudget;
        throw Error(ErrorCode::StepTooLarge, msg.str());
    }
    return out;
}

Trajectory propagate(const LatticeConfig& config, const ComplexVector& psi0, const PropagationControls& controls,
                     const BuildOptions& options, const StepObserver& observer) {
    if (psi0.size() != 2 * config.N) throw Error(ErrorCode::BadSize, "initial state length must be 2N");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw Error(ErrorCode::Usage, "initial state must be normalized");
    const PropagationControls c = resolve_controls(config, controls, options);
    const std::vector<double> gamma = loss_rates(config, options);
    Propagator prop(build_hamiltonian(config, Basis::CrossStitch, options).data);

    Trajectory traj;
    traj.dt = c.dt;
    ComplexVector psi = psi0;
    auto record = [&](long long k, double t) {
        traj.times.push_back(t);
        traj.survival.push_back(survival(psi));
        traj.loss_rate.push_back(total_loss_rate(psi, gamma));
        if (c.record_stride > 0 && k % c.record_stride == 0) {
            traj.state_times.push_back(t);
            traj.states.push_back(psi);
        }
        if (observer) observer(t, psi);
    };
    record(0, 0.0);
    const auto steps = static_cast<long long>(std::ceil(c.t_max / c.dt - 1e-9));
    for (long long k = 1; k <= steps; ++k) {
        prop.step(psi, c.dt);
        const double t = static_cast<double>(k) * c.dt;
        if (!psi.allFinite()) {
            throw Error(ErrorCode::NonFiniteState, "state became non-finite at t = " + std::to_string(t));
        }
        record(k, t);
        if (traj.survival.back() < c.eps_stop) {
            traj.stopped_by_survival = true;
            break;
        }
    }
    return traj;
}

double DissipationProfile::total() const noexcept {
    double s = 0.0;
    for (double v : P) s += v;
    return s;
}

DissipationProfile dissipation_from_state(const LatticeConfig& config, const ComplexVector& psi0,
                                          const PropagationControls& controls, const BuildOptions& options) {
    const std::vector<double> gamma = loss_rates(config, options);
    const std::size_t N = gamma.size();
    std::vector<double> f0(N), f1(N), f2(N);  // rates at samples k-2, k-1, k
    std::vector<double> acc(N, 0.0);
    long long k = -1;
    double h = 0.0;

    auto observer = [&](double, const ComplexVector& psi) {
        ++k;
        std::swap(f0, f1);
        std::swap(f1, f2);
        cell_loss_rates(psi, gamma, f2);
        if (k >= 2 && k % 2 == 0) {
            for (std::size_t n = 0; n < N; ++n) acc[n] += h / 3.0 * (f0[n] + 4.0 * f1[n] + f2[n]);
        }
    };
    h = resolve_controls(config, controls, options).dt;
    Trajectory traj = propagate(config, psi0, controls, options, observer);

    const long long last = k;
    if (last == 1) {
        for (std::size_t n = 0; n < N; ++n) acc[n] += h / 2.0 * (f1[n] + f2[n]);
    } else if (last % 2 == 1) {
        for (std::size_t n = 0; n < N; ++n) acc[n] += h / 12.0 * (-f0[n] + 8.0 * f1[n] + 5.0 * f2[n]);
    }
    DissipationProfile out;
    out.P.resize(N);
    for (std::size_t n = 0; n < N; ++n) out.P[n] = std::max(0.0, acc[n]);
    out.dt = traj.dt;
    out.stop_time = traj.stop_time();
    out.tail_bound = traj.survival.back();
    out.normalization_defect = std::abs(out.total() + out.tail_bound - 1.0);
    out.tail_too_fat = !traj.stopped_by_survival && out.tail_bound > controls.eps_stop;
    out.times = std::move(traj.times);
    out.survival = std::move(traj.survival);
    return out;
}

DissipationProfile dissipation_profile(const LatticeConfig& config, int n0, const PropagationControls& controls,
                                       const BuildOptions& options) {
    return dissipation_from_state(config, initial_state(config, n0), controls, options);
}

std::vector<std::pair<int, int>> burst_regions(const LatticeConfig& config) {
    std::vector<std::pair<int, int>> out;
    out.reserve(config.impurities.size());
    for (int m : config.impurities) out.emplace_back(m, wrap_cell(m + 1, config.N));
    return out;
}

bool burst_triggered(const DissipationProfile& profile, std::pair<int, int> region) {
    const int N = static_cast<int>(profile.P.size());
    const double left = profile.at(wrap_cell(region.first - 1, N));
    const double right = profile.at(wrap_cell(region.second + 1, N));
    const double a = profile.at(wrap_cell(region.first, N));
    const double b = profile.at(wrap_cell(region.second, N));
    return a > left && a > right && b > left && b > right;
}

double flat_response_ratio(const DissipationProfile& profile, int n0) {
    const int N = static_cast<int>(profile.P.size());
    std::vector<double> far;
    for (int n = 1; n <= N; ++n) {
        if (pbc_distance(n, n0, N) >= N / 5.0) far.push_back(profile.at(n));
    }
    if (far.empty()) throw Error(ErrorCode::BadSize, "ring too small for a flat-response test");
    const double mx = *std::max_element(far.begin(), far.end());
    const std::size_t mid = far.size() / 2;
    std::nth_element(far.begin(), far.begin() + mid, far.end());
    double median = far[mid];
    if (far.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(far.begin(), far.begin() + mid));
    }
    return mx / median;
}

double center_of_mass(const ComplexVector& psi, double reference) {
    const int N = static_cast<int>(psi.size() / 2);
    double weight = 0.0;
    double moment = 0.0;
    for (int n = 1; n <= N; ++n) {
        const double rho = std::norm(psi(2 * (n - 1))) + std::norm(psi(2 * (n - 1) + 1));
        double d = std::remainder(n - reference, static_cast<double>(N));
        weight += rho;
        moment += rho * d;
    }
    return weight > 0.0 ? reference + moment / weight : reference;
}

double bookkeeping_defect(const Trajectory& traj) {
    double worst = 0.0;
    const double h = traj.dt;
    for (std::size_t k = 0; k + 2 < traj.survival.size(); ++k) {
        const double integral = h / 3.0 * (traj.loss_rate[k] + 4.0 * traj.loss_rate[k + 1] + traj.loss_rate[k + 2]);
        worst = std::max(worst, std::abs(traj.survival[k + 2] - traj.survival[k] + integral));
    }
    return worst;
}

std::vector<double> linspace(double a, double b, int count) {
    if (count < 1) throw Error(ErrorCode::Usage, "grid needs at least one point");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = a;
        return out;
    }
    for (int i = 0; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
    return out;
}

BurstScanResult eta_scan(const LatticeConfig& tmpl, std::span<const double> grid, int n0, std::span<const int> sites,
                         const ScanOptions& options, bool keep_profiles) {
    if (grid.empty()) throw Error(ErrorCode::Usage, "empty ln eta grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw Error(ErrorCode::Usage, "ln eta grid must be finite and strictly increasing");
        }
    }
    for (int s : sites) {
        if (s < 1 || s > tmpl.N) throw Error(ErrorCode::Usage, "monitored site " + std::to_string(s) + " outside 1..N");
    }
    initial_state(tmpl, n0);

    BurstScanResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.sites.assign(sites.begin(), sites.end());
    out.points.resize(grid.size());
    std::vector<std::vector<double>> profiles(grid.size());

    parallel_for(grid.size(), worker_count(options.threads), [&](std::size_t i) {
        ScanPoint& pt = out.points[i];
        pt.ln_eta = grid[i];
        try {
            LatticeConfig c = tmpl;
            c.eta = std::exp(grid[i]);
            c = validate_config(c);
            DissipationProfile prof = dissipation_profile(c, n0, options.controls, options.build);
            pt.ok = true;
            pt.status = prof.tail_too_fat ? "tail_too_fat" : "ok";
            pt.normalization_defect = prof.normalization_defect;
            pt.tail_bound = prof.tail_bound;
            profiles[i] = std::move(prof.P);
        } catch (const Error& e) {
            pt.ok = false;
            pt.status = std::string(error_id(e.code()));
        }
    });

    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.curves.assign(sites.size(), std::vector<double>(grid.size(), nan));
    for (std::size_t s = 0; s < sites.size(); ++s) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (out.points[i].ok) out.curves[s][i] = profiles[i][sites[s] - 1];
        }
        ShapeTag tag = ShapeTag::Other;
        if (grid.size() >= 21) tag = classify_shape(out.grid, out.curves[s], options.shape);
        out.shapes.push_back(tag);
        out.drop_thresholds.push_back(drop_threshold(out.grid, out.curves[s], options.drop_fraction));
    }
    if (keep_profiles) out.profiles = std::move(profiles);
    return out;
}

}  // namespace skinburst
