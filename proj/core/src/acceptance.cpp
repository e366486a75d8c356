#include "skinburst/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "skinburst/dynamics.hpp"
#include "skinburst/error.hpp"
#include "skinburst/spectral.hpp"
#include "skinburst/transfer.hpp"

namespace skinburst {

namespace {

// Pinned tolerances.
constexpr double kLimitTol = 1e-6;
constexpr double kDefectLinkage = 0.05;
constexpr double kClosureTol = 1e-6;
constexpr double kTangencyTol = 1e-10;
constexpr double kGapBound = -1e-3;
constexpr double kLyapunovRel = 0.05;
constexpr int kLyapunovMinStates = 10;
constexpr double kScalingRel = 0.10;
constexpr double kSeparationSigmas = 5.0;
constexpr double kCollapseTol = 0.05;
constexpr double kNormalizationTol = 1e-4;
constexpr double kNearZero = 0.2;
constexpr double kDropFraction = 0.99;
constexpr double kDropWindow = 0.4;
constexpr double kMappingTol = 1e-12;
constexpr double kBookkeepingOrder = 4.5;
constexpr double kMonotoneTol = 1e-9;
constexpr double kNoGainTol = 1e-10;
constexpr double kOrderLo = 3.5;
constexpr double kOrderHi = 4.5;
constexpr double kUnitaryTol = 1e-9;

struct Detail {
    std::ostringstream os;
    bool first = true;
    Detail() {
        os.imbue(std::locale::classic());
        os << std::setprecision(4);
    }
    template <typename T>
    Detail& add(std::string_view key, const T& value) {
        if (!first) os << ' ';
        os << key << '=' << value;
        first = false;
        return *this;
    }
    std::string str() const { return os.str(); }
};

LatticeConfig symmetric(int N, double eta, std::vector<int> impurities) {
    LatticeConfig c;
    c.N = N;
    c.J = 1.0;
    c.t = 0.5;
    c.gamma = 0.5;
    c.eta = eta;
    c.impurities = std::move(impurities);
    return validate_config(c);
}

SpectrumResult classified(const LatticeConfig& c, bool vectors) {
    SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), vectors);
    classify_spectrum(r, c);
    return r;
}

bool is_loop(SpectralTag t) { return t == SpectralTag::LeftLoop || t == SpectralTag::RightLoop; }

// Portable uniform in [0, 1).
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
};

LatticeConfig random_config(Rng& rng, int max_cells) {
    LatticeConfig c;
    c.N = rng.integer(4, max_cells);
    c.J = rng.uniform(0.2, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    c.t = rng.uniform(0.0, 2.0);
    c.gamma = rng.uniform(0.0, 2.0);
    c.eta = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-4.0, 4.0));
    const int kmax = (c.N - 1) / 2;
    const int want = rng.integer(0, std::min(kmax, 4));
    for (int attempt = 0; attempt < 50 && c.kappa() < want; ++attempt) {
        const int m = rng.integer(1, c.N);
        const bool clash = std::any_of(c.impurities.begin(), c.impurities.end(),
                                       [&](int o) { return pbc_distance(o, m, c.N) < 2; });
        if (!clash) c.impurities.push_back(m);
    }
    return validate_config(c);
}

// --- criteria ---------------------------------------------------------------

bool limit_spectra(Detail& d) {
    const LatticeConfig c = symmetric(20, 0.0, {7});
    const SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), false);
    const std::vector<Complex> merged = merge_defective_clusters(r.eigenvalues, kDefectLinkage);
    std::vector<LimitLevel> expected = analytic_limit_spectrum(c, LimitKind::EtaZero);
    double worst = 0.0;
    bool matched = true;
    for (Complex E : merged) {
        LimitLevel* best = nullptr;
        for (auto& level : expected) {
            if (level.multiplicity > 0 && (!best || std::abs(E - level.E) < std::abs(E - best->E))) best = &level;
        }
        if (!best) {
            matched = false;
            break;
        }
        worst = std::max(worst, std::abs(E - best->E));
        --best->multiplicity;
    }
    double raw_spread = 0.0;
    for (std::size_t i = 0; i < merged.size(); ++i) raw_spread = std::max(raw_spread, std::abs(merged[i] - r.eigenvalues[i]));
    d.add("max_error", worst).add("raw_cluster_radius", raw_spread).add("count", merged.size());
    return matched && worst < kLimitTol;
}

bool closure_cross_validation(Detail& d) {
    bool ok = true;
    struct Case {
        const char* label;
        double eta;
        std::vector<int> impurities;
    };
    const std::vector<Case> cases{{"k1_small", 1e-3, {20}},
                                  {"k1_large", 1e3, {20}},
                                  {"k4_small", 1e-3, {10, 20, 30, 40}},
                                  {"k4_large", 1e3, {10, 20, 30, 40}}};
    for (const auto& cs : cases) {
        const LatticeConfig c = symmetric(50, cs.eta, cs.impurities);
        const SpectrumResult r = classified(c, false);
        double worst = 0.0;
        std::size_t loops = 0;
        bool all_defined = true;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!is_loop(r.classification[i])) continue;
            ++loops;
            if (!r.closure_residual[i]) {
                all_defined = false;
                continue;
            }
            worst = std::max({worst, r.closure_residual[i]->magnitude, r.closure_residual[i]->phase});
        }
        const bool case_ok = all_defined && loops > 0 && worst < kClosureTol;
        d.add(std::string(cs.label) + "_loops", loops).add(std::string(cs.label) + "_max_residual", worst);
        ok = ok && case_ok;
    }
    return ok;
}

bool pbc_tangency(Detail& d) {
    const SpectrumResult pbc = classified(symmetric(48, 1.0, {20}), false);
    double max_im = -std::numeric_limits<double>::infinity();
    for (Complex E : pbc.eigenvalues) max_im = std::max(max_im, E.imag());
    const SpectrumResult gbc = classified(symmetric(50, 1e-3, {20}), false);
    const double gap = imaginary_gap(gbc);
    d.add("pbc_max_im", max_im).add("gap_eta_1e-3", gap);
    return std::abs(max_im) <= kTangencyTol && gap < kGapBound;
}

struct FitCount {
    int good = 0;
    int total = 0;
    double worst_rel = 0.0;
};

FitCount count_fits(const LatticeConfig& c, const std::function<double(Complex)>& reference) {
    const SpectrumResult r = classified(c, true);
    FitCount out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!is_loop(r.classification[i])) continue;
        const EigenstateProfile p =
            profile_from_vector(r.eigenvalues[i], r.right_eigenvectors->col(static_cast<Eigen::Index>(i)),
                                Basis::CrossStitch, c);
        if (!p.fit) continue;
        ++out.total;
        const double ref = reference(r.eigenvalues[i]);
        const double rel = std::abs(p.fit->lambda - ref) / std::abs(ref);
        out.worst_rel = std::max(out.worst_rel, std::isfinite(rel) ? rel : 1e300);
        if (rel < kLyapunovRel) ++out.good;
    }
    return out;
}

bool lyapunov_consistency(Detail& d) {
    const LatticeConfig single = symmetric(50, 1e-3, {20});
    const FitCount one = count_fits(single, [&](Complex E) { return lyapunov(E, single); });
    const LatticeConfig multi = symmetric(50, 1e-3, {10, 20, 30, 40});
    LatticeConfig reference = multi;
    reference.impurities = {20};
    FitCount four;
    {
        const SpectrumResult r = classified(multi, true);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!is_loop(r.classification[i])) continue;
            const EigenstateProfile p = profile_from_vector(
                r.eigenvalues[i], r.right_eigenvectors->col(static_cast<Eigen::Index>(i)), Basis::CrossStitch, multi);
            if (!p.fit) continue;
            ++four.total;
            const double ref = 4.0 * lyapunov(r.eigenvalues[i], reference);
            const double rel = std::abs(p.fit->lambda - ref) / std::abs(ref);
            four.worst_rel = std::max(four.worst_rel, rel);
            if (rel < kScalingRel) ++four.good;
        }
    }
    d.add("k1_within_5pct", std::to_string(one.good) + "/" + std::to_string(one.total))
        .add("k1_worst_rel", one.worst_rel)
        .add("k4_within_10pct", std::to_string(four.good) + "/" + std::to_string(four.total))
        .add("k4_worst_rel", four.worst_rel);
    return one.good >= kLyapunovMinStates && four.good >= kLyapunovMinStates;
}

LyapunovFit fit_selected(const LatticeConfig& c, const SpectrumResult& r, StateSelector sel) {
    const auto idx = select_state(r, SpectralTag::RightLoop, sel);
    if (!idx) throw Error(ErrorCode::NotAnEigenvalue, "no right-loop state to select");
    const EigenstateProfile p =
        profile_from_vector(r.eigenvalues[*idx], r.right_eigenvectors->col(static_cast<Eigen::Index>(*idx)),
                            Basis::CrossStitch, c);
    if (!p.fit) throw Error(ErrorCode::WindowTooSmall, "selected state has no fit window");
    return *p.fit;
}

bool anomalous_energy_dependence(Detail& d) {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = classified(c, true);
    const LyapunovFit top = fit_selected(c, r, StateSelector::MaxImag);
    const LyapunovFit bottom = fit_selected(c, r, StateSelector::MinImag);
    const double sigma = std::hypot(top.std_error, bottom.std_error);
    const double gap = std::abs(top.lambda - bottom.lambda);
    d.add("lambda_max_im", top.lambda).add("lambda_min_im", bottom.lambda).add("combined_stderr", sigma);
    return gap > kSeparationSigmas * sigma && gap > 0.0;
}

bool scale_free_collapse(Detail& d) {
    std::vector<EigenstateProfile> profiles;
    std::vector<double> scaled;
    for (int N : {40, 80, 160}) {
        const LatticeConfig c = symmetric(N, 1e-3, {2 * N / 5});
        const SpectrumResult r = classified(c, true);
        const auto idx = select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag);
        if (!idx) return false;
        profiles.push_back(profile_from_vector(
            r.eigenvalues[*idx], r.right_eigenvectors->col(static_cast<Eigen::Index>(*idx)), Basis::CrossStitch, c));
        if (!profiles.back().fit) return false;
        scaled.push_back(profiles.back().fit->lambda * N);
    }
    const double metric = collapse_metric(profiles);
    const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
    const double mean = std::accumulate(scaled.begin(), scaled.end(), 0.0) / scaled.size();
    const double spread = (*hi - *lo) / std::abs(mean);
    d.add("l2_distance", metric)
        .add("lambdaN_40", scaled[0])
        .add("lambdaN_80", scaled[1])
        .add("lambdaN_160", scaled[2])
        .add("lambdaN_spread", spread);
    return metric < kCollapseTol && spread <= kScalingRel;
}

bool single_impurity_burst(Detail& d, const SuiteOptions& opt) {
    const LatticeConfig c = symmetric(100, std::exp(3.0), {40});
    const DissipationProfile prof = dissipation_profile(c, 95, {}, opt.build);
    const double sum = prof.total();
    double between = 0.0;
    int argmax = 42;
    for (int n = 42; n <= 94; ++n) {
        if (prof.at(n) > between) {
            between = prof.at(n);
            argmax = n;
        }
    }
    const bool dominate = prof.at(40) > between && prof.at(41) > between;
    const bool local = burst_triggered(prof, {40, 41});
    const double gap = imaginary_gap(classified(c, false));
    d.add("norm_defect", std::abs(sum - 1.0))
        .add("P40", prof.at(40))
        .add("P41", prof.at(41))
        .add("max_P_42_94", between)
        .add("at", argmax)
        .add("local_peaks", local ? "yes" : "no")
        .add("gap", gap);
    return std::abs(sum - 1.0) < kNormalizationTol && dominate && gap < 0.0;
}

bool scan_shapes(Detail& d, const SuiteOptions& opt) {
    const LatticeConfig c = symmetric(100, 1.0, {40});
    const std::vector<double> grid = linspace(-3.0, 3.0, 61);
    const std::vector<int> sites{40, 41, 50, 80};
    ScanOptions so;
    so.threads = opt.threads;
    so.build = opt.build;
    const BurstScanResult scan = eta_scan(c, grid, 95, sites, so);
    const std::vector<ShapeTag> want{ShapeTag::Bimodal, ShapeTag::InverseLorentzianLike, ShapeTag::LorentzianLike,
                                     ShapeTag::LorentzianLike};
    bool ok = std::all_of(scan.points.begin(), scan.points.end(), [](const ScanPoint& p) { return p.ok; });
    for (std::size_t s = 0; s < sites.size(); ++s) {
        const ShapeAnalysis a = analyze_shape(scan.grid, scan.curves[s]);
        d.add("site" + std::to_string(sites[s]), to_string(a.tag));
        if (a.tag != want[s]) ok = false;
        for (const Extremum& e : a.extrema) {
            const bool located = (a.tag == ShapeTag::LorentzianLike && e.is_max) ||
                                 (a.tag == ShapeTag::InverseLorentzianLike && !e.is_max);
            if (located && std::abs(scan.grid[e.index]) >= kNearZero) ok = false;
        }
    }
    return ok;
}

bool multi_impurity_hierarchy(Detail& d, const SuiteOptions& opt) {
    const LatticeConfig c = symmetric(100, std::exp(1.4), {20, 40, 60, 80});
    const DissipationProfile prof = dissipation_profile(c, 95, {}, opt.build);
    int dominant = 0;
    double best = -1.0;
    bool all_local = true;
    for (const auto& region : burst_regions(c)) {
        const double pair = prof.at(region.first) + prof.at(region.second);
        if (pair > best) {
            best = pair;
            dominant = region.first;
        }
        all_local = all_local && burst_triggered(prof, region);
    }
    ScanOptions so;
    so.threads = opt.threads;
    so.build = opt.build;
    so.drop_fraction = kDropFraction;
    const std::vector<double> grid = linspace(-3.0, 3.0, 61);
    const std::vector<int> sites{20, 40, 80};
    const BurstScanResult scan = eta_scan(c, grid, 95, sites, so);
    const std::vector<double> target{0.6, 0.68, 1.7};
    bool thresholds_ok = true;
    std::vector<double> th;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        const auto& v = scan.drop_thresholds[s];
        if (!v) {
            thresholds_ok = false;
            d.add("th" + std::to_string(sites[s]), "absent");
            continue;
        }
        th.push_back(*v);
        d.add("th" + std::to_string(sites[s]), *v);
        if (std::abs(*v - target[s]) > kDropWindow) thresholds_ok = false;
    }
    const bool ordered = th.size() == 3 && th[0] < th[1] && th[1] < th[2];
    d.add("dominant_pair", std::to_string(dominant) + "," + std::to_string(wrap_cell(dominant + 1, c.N)))
        .add("all_pairs_local_max", all_local ? "yes" : "no")
        .add("ordered", ordered ? "yes" : "no");
    return dominant == 80 && all_local && ordered && thresholds_ok;
}

bool property_suite(Detail& d, const SuiteOptions& opt) {
    bool ok = true;
    Rng rng(20240611);

    double mapping = 0.0;
    for (int i = 0; i < 200; ++i) {
        const LatticeConfig c = random_config(rng, 40);
        mapping = std::max(mapping, verify_mapping(c, std::numeric_limits<double>::infinity()));
    }
    d.add("mapping_max_dev", mapping);
    ok = ok && mapping < kMappingTol;

    double max_im = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 40; ++i) {
        const LatticeConfig c = random_config(rng, 30);
        for (Complex E : diagonalize(build_hamiltonian(c, Basis::CrossStitch), false).eigenvalues) {
            max_im = std::max(max_im, E.imag());
        }
    }
    d.add("max_im_E", max_im);
    ok = ok && max_im <= kNoGainTol;

    const LatticeConfig c = symmetric(40, std::exp(2.0), {16});
    PropagationControls pc;
    pc.t_max = 60.0;
    const Trajectory coarse = propagate(c, initial_state(c, 30), pc, opt.build);
    double rise = 0.0;
    for (std::size_t k = 1; k < coarse.survival.size(); ++k) {
        rise = std::max(rise, coarse.survival[k] - coarse.survival[k - 1]);
    }
    const double defect = bookkeeping_defect(coarse);
    PropagationControls half = pc;
    half.dt = coarse.dt / 2.0;
    const double defect_half = bookkeeping_defect(propagate(c, initial_state(c, 30), half, opt.build));
    const double defect_order = std::log2(defect / defect_half);
    d.add("bookkeeping_max", defect).add("bookkeeping_order", defect_order).add("max_S_rise", rise);
    ok = ok && defect_order >= kBookkeepingOrder && rise <= kMonotoneTol;

    // Self-convergence on a grid that lands exactly on T.
    const double T = 20.0;
    const int base_steps = static_cast<int>(std::ceil(T / coarse.dt));
    std::vector<ComplexVector> finals;
    for (int refine = 0; refine < 3; ++refine) {
        PropagationControls sc;
        sc.dt = T / (base_steps << refine);
        sc.t_max = T;
        sc.eps_stop = 0.0;
        ComplexVector last;
        propagate(c, initial_state(c, 30), sc, opt.build, [&](double, const ComplexVector& psi) { last = psi; });
        finals.push_back(last);
    }
    const double order = std::log2((finals[0] - finals[1]).norm() / (finals[1] - finals[2]).norm());
    d.add("rk_order", order);
    ok = ok && order > kOrderLo && order < kOrderHi;

    BuildOptions lossless = opt.build;
    lossless.b_loss_override = std::vector<double>(30, 0.0);
    const LatticeConfig u = symmetric(30, 0.4, {9});
    PropagationControls uc;
    uc.dt = 0.005;
    uc.t_max = 10.0;
    const Trajectory unitary = propagate(u, initial_state(u, 20), uc, lossless);
    double drift = 0.0;
    for (double s : unitary.survival) drift = std::max(drift, std::abs(s - 1.0));
    d.add("lossless_norm_drift", drift);
    ok = ok && drift <= kUnitaryTol;

    // Leftward bulk drift of the centre of mass.
    const LatticeConfig bulk = symmetric(100, 1.0, {});
    const std::vector<double> probes{5.0, 10.0, 15.0, 20.0};
    std::vector<double> com;
    PropagationControls dc;
    dc.t_max = probes.back() + 1.0;
    propagate(bulk, initial_state(bulk, 50), dc, opt.build, [&](double t, const ComplexVector& psi) {
        if (com.size() < probes.size() && t >= probes[com.size()]) com.push_back(center_of_mass(psi, 50.0));
    });
    bool leftward = com.size() == probes.size();
    for (std::size_t i = 1; leftward && i < com.size(); ++i) leftward = com[i] < com[i - 1];
    d.add("com_velocity", com.size() == probes.size() ? (com.back() - com.front()) / (probes.back() - probes.front())
                                                      : std::numeric_limits<double>::quiet_NaN())
        .add("leftward", leftward ? "yes" : "no");
    return ok && leftward;
}

struct Spec {
    int id;
    const char* name;
    double budget;
};

constexpr Spec kCriteria[] = {
    {1, "limit spectra", 1.0},
    {2, "closure cross-validation", 5.0},
    {3, "PBC tangency and gap", 2.0},
    {4, "Lyapunov consistency", 10.0},
    {5, "anomalous energy dependence", 10.0},
    {6, "scale-free collapse", 60.0},
    {7, "single-impurity burst", 60.0},
    {8, "eta-scan shapes", 1200.0},
    {9, "multi-impurity hierarchy", 1800.0},
    {10, "property suite", 60.0},
};

}  // namespace

std::vector<int> suite_criteria(Suite suite) {
    if (suite == Suite::Full) return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return {1, 2, 3, 4, 5, 7, 10};
}

CriterionResult run_criterion(int id, const SuiteOptions& options) {
    const auto* spec = std::find_if(std::begin(kCriteria), std::end(kCriteria), [&](const Spec& s) { return s.id == id; });
    if (spec == std::end(kCriteria)) throw Error(ErrorCode::Usage, "unknown criterion " + std::to_string(id));
    CriterionResult out;
    out.id = id;
    out.name = spec->name;
    out.budget_seconds = spec->budget;
    Detail d;
    const auto start = std::chrono::steady_clock::now();
    try {
        switch (id) {
            case 1: out.checks_passed = limit_spectra(d); break;
            case 2: out.checks_passed = closure_cross_validation(d); break;
            case 3: out.checks_passed = pbc_tangency(d); break;
            case 4: out.checks_passed = lyapunov_consistency(d); break;
            case 5: out.checks_passed = anomalous_energy_dependence(d); break;
            case 6: out.checks_passed = scale_free_collapse(d); break;
            case 7: out.checks_passed = single_impurity_burst(d, options); break;
            case 8: out.checks_passed = scan_shapes(d, options); break;
            case 9: out.checks_passed = multi_impurity_hierarchy(d, options); break;
            case 10: out.checks_passed = property_suite(d, options); break;
        }
    } catch (const Error& e) {
        out.checks_passed = false;
        d.add("error", error_id(e.code())).add("message", std::string("\"") + e.what() + "\"");
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.detail = d.str();
    return out;
}

std::vector<CriterionResult> run_suite(const SuiteOptions& options,
                                       const std::function<void(const CriterionResult&)>& on_result) {
    std::vector<CriterionResult> results;
    for (int id : suite_criteria(options.suite)) {
        results.push_back(run_criterion(id, options));
        if (on_result) on_result(results.back());
    }
    return results;
}

void write_report_line(std::ostream& os, const CriterionResult& r) {
    std::ostringstream line;
    line.imbue(std::locale::classic());
    line << (r.passed() ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << std::left << std::setw(30)
         << r.name << std::right << std::fixed << std::setprecision(2) << std::setw(8) << r.seconds << " s / "
         << std::setprecision(0) << r.budget_seconds << " s";
    if (!r.within_budget()) line << " (over budget)";
    line << "  " << r.detail << '\n';
    os << line.str();
}

}  // namespace skinburst
