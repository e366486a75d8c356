#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "oracles/extended.hpp"
#include "skinburst/error.hpp"
#include "skinburst/spectral.hpp"
#include "skinburst/transfer.hpp"

using namespace skinburst;
using testing::symmetric;

namespace {

SpectrumResult classified(const LatticeConfig& c, bool vectors = false) {
    SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), vectors);
    classify_spectrum(r, c);
    return r;
}

bool is_loop(SpectralTag tag) { return tag == SpectralTag::LeftLoop || tag == SpectralTag::RightLoop; }

template <class F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::Usage;
}

EigenstateProfile top_right_state(int N, double eta) {
    const LatticeConfig c = symmetric(N, eta, {static_cast<int>(0.4 * N)});
    const SpectrumResult r = classified(c);
    const auto i = select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag);
    REQUIRE(i.has_value());
    return reconstruct_eigenstate(r.eigenvalues[*i], c);
}

double wrapped_phase(double x) {
    const double two_pi = 2 * std::numbers::pi;
    return std::abs(x - two_pi * std::round(x / two_pi));
}

}  // namespace

TEST_SUITE("transfer") {

TEST_CASE("bulk factor special points and extended precision") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    CHECK(std::abs(bulk_factor(Complex(0, -0.5), c) - Complex(-1, 0)) < 1e-15);
    CHECK(std::abs(bulk_factor(Complex(1, -0.5), c)) < 1e-15);
    const Complex expected = oracle::bulk_factor(0.9, -0.45, 1, 0.5, 0.5);
    CHECK(std::abs(bulk_factor(Complex(0.9, -0.45), c) - expected) < 1e-14 * std::abs(expected));
}

TEST_CASE("impurity factor special points and extended precision") {
    const LatticeConfig matched = symmetric(20, 1.0, {5});
    for (Complex E : {Complex(0.3, -0.2), Complex(-1.2, 0.1), Complex(0.0, -2.0)}) {
        const Complex a = bulk_factor(E, matched);
        CHECK(std::abs(impurity_factor(E, matched) - a * a) < 1e-13);
    }
    const LatticeConfig c = symmetric(50, 0.3, {20});
    const Complex s = Complex(0, 0.5) + Complex(0, 0.15);
    const Complex root = (-s + std::sqrt(s * s - 4.0 * (Complex(0, 0.5) * Complex(0, 0.15) - 1.0))) / 2.0;
    CHECK(std::abs(impurity_factor(root, c)) < 1e-14);

    const LatticeConfig strong = symmetric(50, 1e3, {20});
    const Complex expected = oracle::impurity_factor(0.9, -0.45, 1, 0.5, 0.5, 1000);
    CHECK(std::abs(impurity_factor(Complex(0.9, -0.45), strong) - expected) < 1e-13 * std::abs(expected));
    CHECK(error_of([] { impurity_factor(Complex(0.9, -0.45), symmetric(50, 0.0, {20})); }) == ErrorCode::ZeroEta);
}

TEST_CASE("Lyapunov exponent") {
    for (Complex E : {Complex(0.7, -0.1), Complex(-1.3, -0.6)}) {
        CHECK(std::abs(lyapunov(E, symmetric(40, 1.0, {10}))) < 1e-15);
        const double one = lyapunov(E, symmetric(50, 0.07, {20}));
        CHECK(lyapunov(E, symmetric(50, 0.07, {10, 20, 30, 40})) == doctest::Approx(4 * one).epsilon(1e-14));
    }
    CHECK(lyapunov_conventional(symmetric(50, 1.0, {20})) == 0.0);
    CHECK(lyapunov_conventional(symmetric(50, 1e-3, {20})) == doctest::Approx(oracle::conventional_lyapunov(50, 0.5, 1e-3)).epsilon(1e-15));
    CHECK(lyapunov_conventional(symmetric(50, 1e-3, {20})) == doctest::Approx(0.138155).epsilon(1e-6));
    CHECK(lyapunov_conventional(symmetric(100, 1e3, {20})) == doctest::Approx(-0.069078).epsilon(1e-5));
    CHECK(error_of([] { lyapunov(Complex(1, -0.5), symmetric(50, 1e-3, {20})); }) == ErrorCode::SingularTransfer);
    CHECK(error_of([] { lyapunov_conventional(symmetric(50, 0.0, {20})); }) == ErrorCode::ZeroEta);
}

TEST_CASE("transfer factors close the ring at every loop eigenvalue") {
    for (const LatticeConfig& c : {symmetric(50, 1e-3, {20}), symmetric(50, 1e3, {20}),
                                   symmetric(50, 1e-3, {10, 20, 30, 40}), symmetric(50, 1e3, {10, 20, 30, 40})}) {
        const SpectrumResult r = classified(c);
        const int k = c.kappa();
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!is_loop(r.classification[i])) continue;
            const Complex E = r.eigenvalues[i];
            const Complex g = static_cast<double>(c.N - 2 * k) * std::log(bulk_factor(E, c)) +
                              static_cast<double>(k) * std::log(impurity_factor(E, c));
            CHECK(std::abs(g.real()) < 1e-8);
            CHECK(wrapped_phase(g.imag()) < 1e-8);
            CHECK(std::abs(-std::log(std::abs(bulk_factor(E, c))) - lyapunov(E, c)) < 1e-10);
        }
    }
}

TEST_CASE("recursion reproduces the diagonalization eigenvector") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = classified(c, true);
    const ComplexMatrix h = build_hamiltonian(c, Basis::CrossStitch).data;
    int checked = 0;
    for (std::size_t i = 0; i < r.size(); i += 7) {
        if (!is_loop(r.classification[i])) continue;
        const EigenstateProfile p = reconstruct_eigenstate(r.eigenvalues[i], c);
        const ComplexVector w = cross_stitch_state(p);
        const ComplexVector v = r.right_eigenvectors->col(static_cast<Eigen::Index>(i));
        CHECK(std::abs(v.dot(w)) > 1 - 1e-6);
        CHECK((h * w - r.eigenvalues[i] * w).norm() < 1e-6);
        ++checked;
    }
    CHECK(checked >= 10);
    CHECK(error_of([&] { reconstruct_eigenstate(Complex(0.3, -0.3), c); }) == ErrorCode::NotAnEigenvalue);
}

TEST_CASE("recursion jumps by the impurity factor across the impurity") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = classified(c);
    const auto i = select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag);
    REQUIRE(i);
    const Complex E = r.eigenvalues[*i];
    const EigenstateProfile p = reconstruct_eigenstate(E, c);
    const double ratio = std::abs(p.q[20]) / std::abs(p.q[18]);
    const double b = std::abs(impurity_factor(E, c));
    const double a = std::abs(bulk_factor(E, c));
    CHECK(ratio == doctest::Approx(b).epsilon(1e-8));
    CHECK(std::abs(b - a * a) > 0.1 * b);
}

TEST_CASE("states at the PBC point are extended") {
    const LatticeConfig c = symmetric(40, 1.0, {16});
    const SpectrumResult r = classified(c);
    for (std::size_t i = 0; i < r.size(); i += 9) {
        const EigenstateProfile p = reconstruct_eigenstate(r.eigenvalues[i], c);
        const double first = std::abs(p.q[0]);
        for (const Complex& q : p.q) CHECK(std::abs(std::abs(q) - first) < 1e-8);
        REQUIRE(p.fit.has_value());
        CHECK(std::abs(p.fit->lambda) < 1e-6);
    }
}

TEST_CASE("fitted exponents follow the analytic value") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = classified(c);
    int within = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!is_loop(r.classification[i])) continue;
        const EigenstateProfile p = reconstruct_eigenstate(r.eigenvalues[i], c);
        REQUIRE(p.fit.has_value());
        const double exact = lyapunov(r.eigenvalues[i], c);
        if (std::abs(p.fit->lambda - exact) < 0.05 * std::abs(exact)) ++within;
    }
    CHECK(within >= 10);

    const EigenstateProfile small = top_right_state(50, 1e-3);
    const EigenstateProfile large = top_right_state(100, 1e-3);
    CHECK(large.fit->lambda == doctest::Approx(small.fit->lambda / 2).epsilon(0.10));
}

TEST_CASE("exponent depends on the eigenenergy") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = classified(c);
    const auto top = select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag);
    const auto bottom = select_state(r, SpectralTag::RightLoop, StateSelector::MinImag);
    const EigenstateProfile a = reconstruct_eigenstate(r.eigenvalues[*top], c);
    const EigenstateProfile b = reconstruct_eigenstate(r.eigenvalues[*bottom], c);
    const double sigma = std::max(a.fit->std_error, b.fit->std_error);
    CHECK(std::abs(a.fit->lambda - b.fit->lambda) > 5 * sigma);
    CHECK(std::abs(a.fit->lambda - b.fit->lambda) > 0.01);
}

TEST_CASE("fit window rules") {
    const EigenstateProfile p = top_right_state(50, 1e-3);
    CHECK(error_of([&] { fit_lyapunov(p, FitWindow{25, 30}); }) == ErrorCode::WindowTooSmall);
    CHECK(error_of([&] { fit_lyapunov(p, FitWindow{10, 35}); }) == ErrorCode::WindowCrossesImpurity);
    const FitWindow w = default_fit_window(p.config);
    CHECK(w.length() >= 10);
    for (int n = w.first; n <= w.last; ++n) CHECK_FALSE(p.config.is_impurity(n));
}

TEST_CASE("collapse metric") {
    const EigenstateProfile weak = top_right_state(40, 1e-3);
    const EigenstateProfile strong = top_right_state(40, 1e3);
    const std::vector<EigenstateProfile> same{weak, weak};
    CHECK(collapse_metric(same) == 0.0);
    const std::vector<EigenstateProfile> mixed{weak, strong};
    CHECK(collapse_metric(mixed) > 0.5);
    const LatticeConfig other = symmetric(40, 1e-3, {8, 24});
    const SpectrumResult r = classified(other);
    const auto i = select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag);
    const std::vector<EigenstateProfile> incompatible{weak, reconstruct_eigenstate(r.eigenvalues[*i], other)};
    CHECK(error_of([&] { collapse_metric(incompatible); }) == ErrorCode::IncompatibleConfigs);
    const std::vector<EigenstateProfile> single{weak};
    CHECK(error_of([&] { collapse_metric(single); }) == ErrorCode::IncompatibleConfigs);
}

TEST_CASE("recursion needs t = gamma") {
    LatticeConfig c = symmetric(30, 0.2, {10});
    c.t = 0.7;
    CHECK(error_of([&] { reconstruct_eigenstate(Complex(0.5, -0.5), c); }) == ErrorCode::UnsupportedRegime);
}

}
