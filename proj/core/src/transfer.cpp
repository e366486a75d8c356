#include "skinburst/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "skinburst/error.hpp"
#include "skinburst/spectral.hpp"

namespace skinburst {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kSingular = 1e-13;
constexpr double kClosureTolerance = 1e-4;

void require_eta(const LatticeConfig& c) {
    if (c.eta == 0.0) throw Error(ErrorCode::ZeroEta, "impurity transfer needs eta > 0");
}

void require_hopping(const LatticeConfig& c) {
    if (!(c.t > 0.0) || c.J == 0.0) {
        throw Error(ErrorCode::SingularTransfer, "transfer factors need t > 0 and J != 0");
    }
}

Complex e1_of(Complex E, const LatticeConfig& c) { return E + kI * c.gamma; }
Complex e2_of(Complex E, const LatticeConfig& c) { return E + kI * (c.eta / 2.0); }
Complex bulk_numerator(Complex e1, double J) { return (e1 - J) * (e1 + J); }

}  // namespace

Complex bulk_factor(Complex E, const LatticeConfig& c) {
    require_hopping(c);
    return bulk_numerator(e1_of(E, c), c.J) / (2.0 * c.t * c.J);
}

Complex impurity_factor(Complex E, const LatticeConfig& c) {
    require_eta(c);
    require_hopping(c);
    const Complex d2 = e1_of(E, c) * e2_of(E, c) - c.J * c.J;
    return d2 * d2 / (2.0 * c.t * c.eta * c.J * c.J);
}

double lyapunov(Complex E, const LatticeConfig& c) {
    const int k = c.kappa();
    if (k == 0) return 0.0;
    require_eta(c);
    require_hopping(c);
    const Complex e1 = e1_of(E, c);
    const Complex d1 = bulk_numerator(e1, c.J);
    if (std::abs(d1) < kSingular) {
        throw Error(ErrorCode::SingularTransfer, "bulk factor vanishes at this energy");
    }
    const Complex d2 = e1 * e2_of(E, c) - c.J * c.J;
    return static_cast<double>(k) / c.N *
           (std::log(std::abs(2.0 * c.t / c.eta)) + 2.0 * (std::log(std::abs(d2)) - std::log(std::abs(d1))));
}

double lyapunov_conventional(const LatticeConfig& c) {
    require_eta(c);
    return std::log(std::abs(2.0 * c.t / c.eta)) / c.N;
}

FitWindow default_fit_window(const LatticeConfig& c) {
    const int N = c.N;
    int first = 1;
    int length = N;
    const int k = c.kappa();
    if (k > 0) {
        length = -1;
        for (int j = 0; j < k; ++j) {
            const int m = c.impurities[j];
            const int next = j + 1 < k ? c.impurities[j + 1] : c.impurities[0] + N;
            const int arc = next - m - 1;
            if (arc > length) {
                length = arc;
                first = m + 1;
            }
        }
    }
    int trim = N / 10;
    trim = std::min(trim, std::max(0, (length - 10) / 2));
    return {first + trim, first + length - 1 - trim};
}

LyapunovFit fit_lyapunov(const EigenstateProfile& profile, FitWindow window) {
    const LatticeConfig& c = profile.config;
    const int len = window.length();
    if (len < 10) {
        throw Error(ErrorCode::WindowTooSmall,
                    "fit window has " + std::to_string(len) + " cells; at least 10 needed");
    }
    if (len > c.N) throw Error(ErrorCode::WindowTooSmall, "fit window longer than the ring");
    for (int n = window.first; n <= window.last; ++n) {
        if (c.is_impurity(n)) {
            throw Error(ErrorCode::WindowCrossesImpurity,
                        "fit window contains impurity cell " + std::to_string(wrap_cell(n, c.N)));
        }
    }
    double sx = 0.0;
    double sy = 0.0;
    std::vector<double> ys(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
        const int n = window.first + i;
        const double y = -std::log(std::abs(profile.q[wrap_cell(n, c.N) - 1]));
        if (!std::isfinite(y)) throw Error(ErrorCode::NonFiniteState, "zero amplitude inside fit window");
        ys[i] = y;
        sx += n;
        sy += y;
    }
    const double mx = sx / len;
    const double my = sy / len;
    double sxx = 0.0;
    double sxy = 0.0;
    for (int i = 0; i < len; ++i) {
        const double dx = window.first + i - mx;
        sxx += dx * dx;
        sxy += dx * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (int i = 0; i < len; ++i) {
        const double dx = window.first + i - mx;
        const double r = ys[i] - my - slope * dx;
        ssr += r * r;
    }
    return {slope, std::sqrt(ssr / (len - 2) / sxx), window};
}

namespace {

EigenstateProfile make_profile(Complex E, const ComplexVector& ssh, const ComplexVector& cross,
                               const LatticeConfig& c) {
    EigenstateProfile out;
    out.config = c;
    out.E = E;
    out.p.resize(c.N);
    out.q.resize(c.N);
    out.density.resize(c.N);
    out.coords.resize(c.N);
    for (int n = 0; n < c.N; ++n) {
        out.p[n] = ssh(2 * n);
        out.q[n] = ssh(2 * n + 1);
        out.density[n] = std::norm(cross(2 * n)) + std::norm(cross(2 * n + 1));
        out.coords[n] = static_cast<double>(n + 1) / c.N;
    }
    try {
        out.fit = fit_lyapunov(out, default_fit_window(c));
        if (out.fit->lambda != 0.0) out.xi = 1.0 / std::abs(out.fit->lambda);
    } catch (const Error&) {
    }
    return out;
}

}  // namespace

EigenstateProfile profile_from_vector(Complex E, const ComplexVector& v, Basis basis,
                                      const LatticeConfig& c) {
    if (v.size() != 2 * c.N) throw Error(ErrorCode::BadSize, "state length must be 2N");
    const BlockUnitary u(c.N);
    const Orientation o = mapping_orientation();
    ComplexVector ssh = basis == Basis::Ssh ? v : u.apply(v, o);
    ComplexVector cross = basis == Basis::CrossStitch ? v : u.apply_inverse(v, o);
    ssh.normalize();
    cross.normalize();
    return make_profile(E, ssh, cross, c);
}

EigenstateProfile reconstruct_eigenstate(Complex E, const LatticeConfig& c) {
    if (std::abs(c.t - c.gamma) > 1e-12 * std::max(1.0, std::abs(c.t))) {
        throw Error(ErrorCode::UnsupportedRegime, "eigenstate recursion requires t = gamma");
    }
    const ClosureResidual r = closure_residual(E, c);
    if (r.magnitude > kClosureTolerance || r.phase > kClosureTolerance) {
        throw Error(ErrorCode::NotAnEigenvalue, "energy violates the closure condition");
    }
    const int N = c.N;
    const Complex e1 = e1_of(E, c);
    const Complex e2 = e2_of(E, c);
    const Complex d2 = e1 * e2 - c.J * c.J;
    const Complex step_bulk = bulk_numerator(e1, c.J) / (2.0 * c.t * c.J);
    const Complex step_enter = c.kappa() > 0 ? d2 / (c.eta * c.J) : Complex{};
    const Complex step_exit = d2 / (2.0 * c.t * c.J);

    std::vector<Complex> q(N);
    std::vector<Complex> p(N);
    const int seed = c.kappa() > 0 ? c.impurities.front() + 1 : 1;
    q[wrap_cell(seed, N) - 1] = 1.0;
    for (int n = seed + 1; n < seed + N; ++n) {
        const int cur = wrap_cell(n, N);
        const int prev = wrap_cell(n - 1, N);
        Complex factor = step_bulk;
        if (c.is_impurity(cur)) factor = step_enter;
        else if (c.is_impurity(prev)) factor = step_exit;
        q[cur - 1] = factor * q[prev - 1];
    }
    for (int n = 1; n <= N; ++n) {
        const int prev = wrap_cell(n - 1, N);
        const Complex energy = c.is_impurity(prev) ? e2 : e1;
        p[n - 1] = energy * q[prev - 1] / c.J;
    }
    ComplexVector ssh(2 * N);
    for (int n = 0; n < N; ++n) {
        ssh(2 * n) = p[n];
        ssh(2 * n + 1) = q[n];
    }
    if (!ssh.allFinite() || ssh.norm() == 0.0) {
        throw Error(ErrorCode::SingularTransfer, "recursion produced a degenerate state");
    }
    ssh.normalize();
    const ComplexVector cross = BlockUnitary(N).apply_inverse(ssh, mapping_orientation());
    return make_profile(E, ssh, cross, c);
}

ComplexVector cross_stitch_state(const EigenstateProfile& profile) {
    const int N = profile.cells();
    ComplexVector ssh(2 * N);
    for (int n = 0; n < N; ++n) {
        ssh(2 * n) = profile.p[n];
        ssh(2 * n + 1) = profile.q[n];
    }
    ComplexVector cross = BlockUnitary(N).apply_inverse(ssh, mapping_orientation());
    cross.normalize();
    return cross;
}

double collapse_metric(std::span<const EigenstateProfile> profiles) {
    if (profiles.size() < 2) throw Error(ErrorCode::IncompatibleConfigs, "need at least two profiles");
    const LatticeConfig& ref = profiles.front().config;
    int grid = ref.N;
    for (const auto& pr : profiles) {
        const LatticeConfig& c = pr.config;
        if (c.kappa() != ref.kappa()) {
            throw Error(ErrorCode::IncompatibleConfigs, "profiles differ in impurity count");
        }
        for (int j = 0; j < c.kappa(); ++j) {
            const double a = static_cast<double>(c.impurities[j]) / c.N;
            const double b = static_cast<double>(ref.impurities[j]) / ref.N;
            if (std::abs(a - b) > 1e-9) {
                throw Error(ErrorCode::IncompatibleConfigs, "impurities sit at different fractional positions");
            }
        }
        if (pr.cells() != c.N) throw Error(ErrorCode::IncompatibleConfigs, "profile length differs from N");
        grid = std::min(grid, c.N);
    }
    std::vector<std::vector<double>> sampled;
    sampled.reserve(profiles.size());
    for (const auto& pr : profiles) {
        const int N = pr.cells();
        std::vector<double> f(grid);
        for (int k = 1; k <= grid; ++k) {
            const double u = static_cast<double>(k) / grid * N;
            const int lo = static_cast<int>(std::floor(u));
            const double frac = u - lo;
            const double a = pr.density[wrap_cell(lo, N) - 1];
            const double b = pr.density[wrap_cell(lo + 1, N) - 1];
            f[k - 1] = N * ((1.0 - frac) * a + frac * b);
        }
        sampled.push_back(std::move(f));
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < sampled.size(); ++a) {
        for (std::size_t b = a + 1; b < sampled.size(); ++b) {
            double acc = 0.0;
            for (int k = 0; k < grid; ++k) {
                const double d = sampled[a][k] - sampled[b][k];
                acc += d * d;
            }
            worst = std::max(worst, std::sqrt(acc / grid));
        }
    }
    return worst;
}

}  // namespace skinburst
