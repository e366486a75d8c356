#include "skinburst/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "skinburst/error.hpp"
#include "skinburst/transfer.hpp"

namespace skinburst {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kSingular = 1e-13;

double residual(const ComplexMatrix& h, Complex E, const ComplexVector& v) {
    return (h * v - E * v).norm();
}

ComplexVector refine(const ComplexMatrix& h, Complex E, const ComplexVector& v) {
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const Complex shift = E + Complex(1e-12 * scale, 0.0);
    ComplexMatrix shifted = h;
    shifted.diagonal().array() -= shift;
    ComplexVector x = shifted.partialPivLu().solve(v);
    if (!x.allFinite() || x.norm() == 0.0) return v;
    x.normalize();
    return x;
}

bool transfer_regime(const LatticeConfig& c) {
    return std::abs(c.t - c.gamma) <= 1e-12 * std::max(1.0, std::abs(c.t)) && c.t > 0.0 && c.J != 0.0;
}

// (N - 2k) ln|A| + k ln|B|
double closure_level(Complex E, const LatticeConfig& c) {
    const int k = c.kappa();
    const Complex e1 = E + kI * c.gamma;
    const Complex e2 = E + kI * (c.eta / 2.0);
    const double ln_d1 = std::log(std::abs((e1 - c.J) * (e1 + c.J)));
    const double ln_a = ln_d1 - std::log(std::abs(2.0 * c.t * c.J));
    double g = (c.N - 2 * k) * ln_a;
    if (k > 0) {
        const double ln_d2 = std::log(std::abs(e1 * e2 - c.J * c.J));
        g += k * (2.0 * ln_d2 - std::log(std::abs(2.0 * c.t * c.eta * c.J * c.J)));
    }
    return g;
}

SpectralTag side_tag(Complex E, double delta) {
    if (E.real() > delta) return SpectralTag::RightLoop;
    if (E.real() < -delta) return SpectralTag::LeftLoop;
    return SpectralTag::Detached;
}

}  // namespace

const char* to_string(SpectralTag tag) noexcept {
    switch (tag) {
        case SpectralTag::LeftLoop: return "LEFT_LOOP";
        case SpectralTag::RightLoop: return "RIGHT_LOOP";
        case SpectralTag::Detached: return "DETACHED";
        case SpectralTag::Unclassified: break;
    }
    return "UNCLASSIFIED";
}

std::size_t SpectrumResult::count(SpectralTag tag) const noexcept {
    return static_cast<std::size_t>(std::count(classification.begin(), classification.end(), tag));
}

SpectrumResult diagonalize(const ComplexMatrix& h, bool want_vectors) {
    if (h.rows() != h.cols()) throw Error(ErrorCode::BadSize, "matrix must be square");
    if (!h.allFinite()) throw Error(ErrorCode::NonFiniteState, "matrix has non-finite entries");
    const Eigen::Index n = h.rows();
    SpectrumResult out;
    if (n == 0) return out;

    // zgeevx: balancing (permute + scale), Hessenberg reduction, shifted QR.
    ComplexMatrix work = h;
    ComplexVector values(n);
    ComplexMatrix right(want_vectors ? n : 1, want_vectors ? n : 1);
    lapack_int ilo = 0;
    lapack_int ihi = 0;
    Eigen::VectorXd scale(n);
    double abnrm = 0.0;
    Eigen::VectorXd rconde(n);
    Eigen::VectorXd rcondv(n);
    const lapack_int info = LAPACKE_zgeevx(
        LAPACK_COL_MAJOR, 'B', 'N', want_vectors ? 'V' : 'N', 'N', static_cast<lapack_int>(n), work.data(),
        static_cast<lapack_int>(n), values.data(), nullptr, 1, right.data(), static_cast<lapack_int>(right.rows()),
        &ilo, &ihi, scale.data(), &abnrm, rconde.data(), rcondv.data());
    if (info > 0) throw Error(ErrorCode::NoConvergence, "complex QR iteration did not converge");
    if (info < 0) throw Error(ErrorCode::BadSize, "eigensolver rejected argument " + std::to_string(-info));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (values(a).real() != values(b).real()) return values(a).real() < values(b).real();
        return values(a).imag() < values(b).imag();
    });

    out.eigenvalues.reserve(order.size());
    for (Eigen::Index idx : order) out.eigenvalues.push_back(values(idx));

    if (want_vectors) {
        ComplexMatrix vecs(n, n);
        out.vector_residuals.resize(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            ComplexVector v = right.col(order[k]);
            v.normalize();
            const Complex E = out.eigenvalues[k];
            double r = residual(h, E, v);
            if (r > 1e-10) {
                ComplexVector w = refine(h, E, v);
                const double rw = residual(h, E, w);
                if (rw < r) {
                    v = w;
                    r = rw;
                }
            }
            vecs.col(static_cast<Eigen::Index>(k)) = v;
            out.vector_residuals[k] = r;
        }
        out.right_eigenvectors = std::move(vecs);
    }
    return out;
}

SpectrumResult diagonalize(const Hamiltonian& h, bool want_vectors) {
    return diagonalize(h.data, want_vectors);
}

std::vector<Complex> merge_defective_clusters(std::span<const Complex> values, double linkage) {
    const std::size_t n = values.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(values[i] - values[j]) < linkage) {
                const std::size_t a = find(i);
                const std::size_t b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    std::vector<Complex> sum(n);
    std::vector<int> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        sum[find(i)] += values[i];
        ++count[find(i)];
    }
    std::vector<Complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        out[i] = sum[r] / static_cast<double>(count[r]);
    }
    return out;
}

ClosureResidual closure_residual(Complex E, const LatticeConfig& c) {
    const int k = c.kappa();
    if (k > 0 && c.eta == 0.0) throw Error(ErrorCode::ZeroEta, "closure condition needs eta > 0");
    if (!transfer_regime(c)) {
        throw Error(ErrorCode::UnsupportedRegime, "closure condition requires t = gamma > 0 and J != 0");
    }
    const Complex e1 = E + kI * c.gamma;
    const Complex e2 = E + kI * (c.eta / 2.0);
    const Complex d1 = (e1 - c.J) * (e1 + c.J);
    const Complex d2 = e1 * e2 - c.J * c.J;
    if (std::abs(d1) < kSingular || (k > 0 && std::abs(d2) < kSingular)) {
        throw Error(ErrorCode::SingularTransfer, "transfer factor vanishes at this energy");
    }
    Complex f = static_cast<double>(c.N - 2 * k) * std::log(d1) -
                static_cast<double>(c.N) * std::log(Complex(c.J, 0.0)) -
                static_cast<double>(c.N - k) * std::log(Complex(2.0 * c.t, 0.0));
    if (k > 0) {
        f += 2.0 * k * std::log(d2) - static_cast<double>(k) * std::log(Complex(c.eta, 0.0));
    }
    return {std::abs(f.real()), std::abs(std::remainder(f.imag(), 2.0 * std::numbers::pi))};
}

const char* to_string(LimitKind kind) noexcept {
    switch (kind) {
        case LimitKind::EtaZero: return "eta_zero";
        case LimitKind::EtaInfinity: return "eta_inf";
        case LimitKind::Pbc: break;
    }
    return "pbc";
}

std::vector<LimitLevel> group_levels(std::span<const Complex> values, double tol) {
    std::vector<Complex> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<LimitLevel> levels;
    std::vector<bool> used(sorted.size(), false);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (used[i]) continue;
        LimitLevel level{sorted[i], 1};
        used[i] = true;
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (!used[j] && std::abs(sorted[j] - sorted[i]) < tol) {
                used[j] = true;
                ++level.multiplicity;
            }
        }
        levels.push_back(level);
    }
    return levels;
}

Complex pbc_energy(const LatticeConfig& c, double theta, int branch) {
    const Complex phase = std::polar(1.0, theta);
    const Complex prod = (c.t + c.gamma + c.J * std::conj(phase)) * (c.t - c.gamma + c.J * phase);
    return -kI * c.gamma + static_cast<double>(branch >= 0 ? 1 : -1) * std::sqrt(prod);
}

std::vector<LimitLevel> analytic_limit_spectrum(const LatticeConfig& c, LimitKind kind) {
    const int k = c.kappa();
    if (kind == LimitKind::Pbc || k == 0) {
        std::vector<Complex> values;
        values.reserve(2 * static_cast<std::size_t>(c.N));
        for (int l = 0; l < c.N; ++l) {
            const double theta = 2.0 * std::numbers::pi * l / c.N;
            values.push_back(pbc_energy(c, theta, +1));
            values.push_back(pbc_energy(c, theta, -1));
        }
        return group_levels(values);
    }
    std::vector<LimitLevel> levels;
    const Complex centre = -kI * c.gamma;
    levels.push_back({centre + std::abs(c.J), c.N - 2 * k});
    levels.push_back({centre - std::abs(c.J), c.N - 2 * k});
    if (kind == LimitKind::EtaZero) {
        const Complex root = std::sqrt(Complex(4.0 * c.J * c.J - c.gamma * c.gamma, 0.0));
        levels.push_back({0.5 * (root - kI * c.gamma), 2 * k});
        levels.push_back({0.5 * (-root - kI * c.gamma), 2 * k});
    } else {
        levels.push_back({centre, 2 * k});
        levels.push_back({-kI * (c.eta / 2.0), 2 * k});
    }
    std::sort(levels.begin(), levels.end(), [](const LimitLevel& a, const LimitLevel& b) {
        if (a.E.real() != b.E.real()) return a.E.real() < b.E.real();
        return a.E.imag() < b.E.imag();
    });
    return levels;
}

double pbc_curve_distance(Complex E, const LatticeConfig& c, int samples) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const double theta = 2.0 * std::numbers::pi * s / samples;
        best = std::min({best, std::abs(E - pbc_energy(c, theta, +1)), std::abs(E - pbc_energy(c, theta, -1))});
    }
    return best;
}

void annotate_closure(SpectrumResult& result, const LatticeConfig& c) {
    result.closure_residual.assign(result.size(), std::nullopt);
    result.lyapunov_analytic.assign(result.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < result.size(); ++i) {
        try {
            result.closure_residual[i] = closure_residual(result.eigenvalues[i], c);
        } catch (const Error&) {
        }
        try {
            result.lyapunov_analytic[i] = lyapunov(result.eigenvalues[i], c);
        } catch (const Error&) {
        }
    }
}

void classify_spectrum(SpectrumResult& result, const LatticeConfig& c, const ClassifyOptions& options) {
    result.classification.assign(result.size(), SpectralTag::Unclassified);
    const bool fallback = c.kappa() == 0 || (c.eta > options.fallback_lo && c.eta < options.fallback_hi) ||
                          c.eta == 0.0;
    for (std::size_t i = 0; i < result.size(); ++i) {
        const Complex E = result.eigenvalues[i];
        SpectralTag tag = side_tag(E, options.delta_loop);
        if (tag != SpectralTag::Detached && !fallback) {
            if (transfer_regime(c)) {
                const Complex centre(tag == SpectralTag::RightLoop ? std::abs(c.J) : -std::abs(c.J), -c.gamma);
                for (int s = 1; s <= options.enclosure_samples; ++s) {
                    const double frac = static_cast<double>(s) / options.enclosure_samples;
                    const double g = closure_level(E + frac * (centre - E), c);
                    if (g > 0.0) {
                        tag = SpectralTag::Detached;
                        break;
                    }
                }
            } else if (pbc_curve_distance(E, c) > 0.5) {
                tag = SpectralTag::Detached;
            }
        } else if (tag == SpectralTag::Detached && fallback && pbc_curve_distance(E, c) < 0.5) {
            // Where the two loops touch (Re E = 0 on the PBC curve).
            tag = E.real() >= 0.0 ? SpectralTag::RightLoop : SpectralTag::LeftLoop;
        }
        result.classification[i] = tag;
    }
    annotate_closure(result, c);
}

double imaginary_gap(const SpectrumResult& result) {
    double best = -std::numeric_limits<double>::infinity();
    const bool tagged = result.classification.size() == result.size();
    for (std::size_t i = 0; i < result.size(); ++i) {
        if (tagged) {
            const SpectralTag tag = result.classification[i];
            if (tag != SpectralTag::LeftLoop && tag != SpectralTag::RightLoop) continue;
        }
        best = std::max(best, result.eigenvalues[i].imag());
    }
    return best;
}

const char* to_string(StateSelector selector) noexcept {
    switch (selector) {
        case StateSelector::MaxImag: return "max_im";
        case StateSelector::MinImag: return "min_im";
        case StateSelector::MaxReal: return "max_re";
        case StateSelector::SmallestPositiveReal: break;
    }
    return "min_positive_re";
}

std::optional<std::size_t> select_state(const SpectrumResult& result, SpectralTag loop,
                                        StateSelector selector) {
    std::optional<std::size_t> best;
    auto score = [&](std::size_t i) {
        const Complex E = result.eigenvalues[i];
        switch (selector) {
            case StateSelector::MaxImag: return E.imag();
            case StateSelector::MinImag: return -E.imag();
            case StateSelector::MaxReal: return E.real();
            case StateSelector::SmallestPositiveReal: break;
        }
        return -E.real();
    };
    for (std::size_t i = 0; i < result.size(); ++i) {
        if (i >= result.classification.size() || result.classification[i] != loop) continue;
        if (selector == StateSelector::SmallestPositiveReal && !(result.eigenvalues[i].real() > 0.0)) continue;
        if (!best || score(i) > score(*best)) best = i;
    }
    return best;
}

}  // namespace skinburst
