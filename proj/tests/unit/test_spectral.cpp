#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "oracles/charpoly.hpp"
#include "oracles/dispersion.hpp"
#include "skinburst/error.hpp"
#include "skinburst/spectral.hpp"

using namespace skinburst;
using testing::symmetric;

namespace {

SpectrumResult classified(const LatticeConfig& c, bool vectors = false) {
    SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), vectors);
    classify_spectrum(r, c);
    return r;
}

bool is_loop(SpectralTag tag) { return tag == SpectralTag::LeftLoop || tag == SpectralTag::RightLoop; }

std::vector<Complex> expand(const std::vector<LimitLevel>& levels) {
    std::vector<Complex> out;
    for (const auto& l : levels) out.insert(out.end(), static_cast<std::size_t>(l.multiplicity), l.E);
    return out;
}

// Directed Hausdorff distance from the loop eigenvalues to a dense sampling of the PBC curve.
double distance_to_pbc(const SpectrumResult& r, const LatticeConfig& c) {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (is_loop(r.classification[i])) worst = std::max(worst, pbc_curve_distance(r.eigenvalues[i], c, 20000));
    }
    return worst;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("Pauli X") {
    ComplexMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const SpectrumResult r = diagonalize(x, true);
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r.eigenvalues[0] - Complex(-1, 0)) < 1e-14);
    CHECK(std::abs(r.eigenvalues[1] - Complex(1, 0)) < 1e-14);
    for (double res : r.vector_residuals) CHECK(res < 1e-14);
}

TEST_CASE("random matrices agree with characteristic-polynomial roots") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        ComplexMatrix a(8, 8);
        for (Eigen::Index i = 0; i < 8; ++i) {
            for (Eigen::Index j = 0; j < 8; ++j) a(i, j) = Complex(u(rng), u(rng));
        }
        const SpectrumResult r = diagonalize(a, true);
        const auto roots = oracle::polynomial_roots(oracle::characteristic_polynomial(a));
        CHECK(oracle::multiset_distance(r.eigenvalues, roots) < 1e-8);
        for (double res : r.vector_residuals) CHECK(res < 1e-8);
    }
}

TEST_CASE("eigenvalues come sorted with unit-norm vectors of small residual") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), true);
    CHECK(r.size() == 100);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.eigenvalues[i - 1].real() <= r.eigenvalues[i].real());
    for (Eigen::Index k = 0; k < r.right_eigenvectors->cols(); ++k) {
        CHECK(std::abs(r.right_eigenvectors->col(k).norm() - 1.0) < 1e-12);
    }
    CHECK(*std::max_element(r.vector_residuals.begin(), r.vector_residuals.end()) < 1e-8);
}

TEST_CASE("eta = 0 reproduces the two degenerate level families") {
    const LatticeConfig c = symmetric(20, 0.0, {7});
    const SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), false);
    const auto merged = merge_defective_clusters(r.eigenvalues, 0.05);
    std::vector<Complex> expected;
    const double s = std::sqrt(4.0 - 0.25) / 2;
    for (int k = 0; k < 18; ++k) {
        expected.push_back({1.0, -0.5});
        expected.push_back({-1.0, -0.5});
    }
    for (int k = 0; k < 2; ++k) {
        expected.push_back({s, -0.25});
        expected.push_back({-s, -0.25});
    }
    CHECK(oracle::multiset_distance(merged, expected) < 1e-6);
    CHECK(oracle::multiset_distance(expand(analytic_limit_spectrum(c, LimitKind::EtaZero)), expected) < 1e-12);
    CHECK(s == doctest::Approx(0.968246).epsilon(1e-6));
}

TEST_CASE("large eta limit levels") {
    const LatticeConfig c = symmetric(50, 1e3, {10, 20, 30, 40});
    const auto levels = analytic_limit_spectrum(c, LimitKind::EtaInfinity);
    REQUIRE(levels.size() == 4);
    auto mult = [&](Complex e) {
        for (const auto& l : levels) {
            if (std::abs(l.E - e) < 1e-12) return l.multiplicity;
        }
        return 0;
    };
    CHECK(mult({1.0, -0.5}) == 42);
    CHECK(mult({-1.0, -0.5}) == 42);
    CHECK(mult({0.0, -0.5}) == 8);
    CHECK(mult({0.0, -500.0}) == 8);
}

TEST_CASE("PBC limit is tangent to the real axis when 3 divides N") {
    const LatticeConfig c = symmetric(48, 1.0, {});
    const auto levels = analytic_limit_spectrum(c, LimitKind::Pbc);
    int total = 0;
    double top = -INFINITY;
    for (const auto& l : levels) {
        total += l.multiplicity;
        top = std::max(top, l.E.imag());
    }
    CHECK(total == 96);
    const oracle::BandMaximum best = oracle::max_band_imag(1.0, 0.5, 0.5);
    CHECK(std::abs(best.imag) < 1e-10);
    CHECK(std::abs(best.theta - 2 * std::numbers::pi / 3) < 1e-6);
    CHECK(std::abs(top) < 1e-10);
    CHECK(std::abs(imaginary_gap(classified(c))) < 1e-10);
}

TEST_CASE("closure residual vanishes on loop eigenvalues") {
    const LatticeConfig c = symmetric(50, 1e-3, {20});
    const SpectrumResult r = classified(c);
    int loops = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!is_loop(r.classification[i])) continue;
        ++loops;
        const ClosureResidual res = closure_residual(r.eigenvalues[i], c);
        CHECK(res.magnitude < 1e-6);
        CHECK(res.phase < 1e-6);
    }
    CHECK(loops == 100);
}

TEST_CASE("closure residual at the PBC point reduces to the band formula") {
    const LatticeConfig c = symmetric(30, 1.0, {12});
    for (int l = 0; l < c.N; ++l) {
        const Complex E = Complex(0, -0.5) + std::sqrt(Complex(1.0) + std::polar(1.0, 2 * std::numbers::pi * l / c.N));
        const ClosureResidual res = closure_residual(E, c);
        CHECK(res.magnitude < 1e-10);
        CHECK(res.phase < 1e-10);
    }
}

TEST_CASE("closure residual errors") {
    const LatticeConfig c = symmetric(30, 1e-3, {12});
    try {
        closure_residual(Complex(1.0, -0.5), c);
        FAIL("expected SingularTransfer");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularTransfer);
    }
    try {
        closure_residual(Complex(0.3, -0.2), symmetric(30, 0.0, {12}));
        FAIL("expected ZeroEta");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroEta);
    }
}

TEST_CASE("strong impurities detach two levels per impurity on each side") {
    CHECK(classified(symmetric(50, 1e3, {20})).count(SpectralTag::Detached) == 4);
    const SpectrumResult four = classified(symmetric(50, 1e3, {10, 20, 30, 40}));
    CHECK(four.count(SpectralTag::Detached) == 16);
    int near_gamma = 0;
    int near_eta = 0;
    for (std::size_t i = 0; i < four.size(); ++i) {
        if (four.classification[i] != SpectralTag::Detached) continue;
        if (std::abs(four.eigenvalues[i] - Complex(0, -0.5)) < 0.1) ++near_gamma;
        if (std::abs(four.eigenvalues[i] - Complex(0, -500)) < 1.0) ++near_eta;
    }
    CHECK(near_gamma == 8);
    CHECK(near_eta == 8);
    for (int N : {20, 33, 48}) CHECK(classified(symmetric(N, 1.0, {})).count(SpectralTag::Detached) == 0);
}

TEST_CASE("tag counts add up to the dimension") {
    for (double eta : {1e-3, 0.3, 1.0, 5.0, 1e3}) {
        const SpectrumResult r = classified(symmetric(40, eta, {9, 30}));
        CHECK(r.count(SpectralTag::LeftLoop) + r.count(SpectralTag::RightLoop) + r.count(SpectralTag::Detached) == 80);
        CHECK(r.count(SpectralTag::Unclassified) == 0);
    }
}

TEST_CASE("imaginary gap") {
    CHECK(imaginary_gap(classified(symmetric(50, 1e-3, {20}))) < -1e-3);
    // The -0.25 level is a defective pair, so raw eigenvalues scatter by O(sqrt(eps)).
    const SpectrumResult cut = classified(symmetric(20, 0.0, {7}));
    CHECK(imaginary_gap(cut) == doctest::Approx(-0.25).epsilon(1e-5));
    double merged_top = -INFINITY;
    for (Complex e : merge_defective_clusters(cut.eigenvalues, 0.05)) merged_top = std::max(merged_top, e.imag());
    CHECK(merged_top == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("spectrum is mirror symmetric and lossy") {
    for (double eta : {1e-3, 0.5, 3.0, 1e3}) {
        const ComplexMatrix h = build_hamiltonian(symmetric(40, eta, {15}), Basis::CrossStitch).data;
        const SpectrumResult r = diagonalize(h, false);
        std::vector<Complex> mirrored;
        for (Complex e : r.eigenvalues) mirrored.push_back({-e.real(), e.imag()});
        // First-order perturbation bound: eps * ||H|| * largest eigenvalue condition number.
        Eigen::ComplexEigenSolver<ComplexMatrix> es(h);
        const ComplexMatrix x = es.eigenvectors();
        const ComplexMatrix y = x.inverse();
        double cond = 1.0;
        for (Eigen::Index i = 0; i < x.cols(); ++i) cond = std::max(cond, x.col(i).norm() * y.row(i).norm());
        const double bound = std::max(1e-8, 10 * 2.2e-16 * h.operatorNorm() * cond);
        CAPTURE(eta);
        CAPTURE(cond);
        CHECK(oracle::multiset_distance(r.eigenvalues, mirrored) < bound);
        if (cond < 1e3) CHECK(oracle::multiset_distance(r.eigenvalues, mirrored) < 1e-8);
        for (Complex e : r.eigenvalues) CHECK(e.imag() <= 1e-10);
    }
}

TEST_CASE("loops approach the PBC curve as N grows") {
    for (double eta : {1e-3, 1e3}) {
        double previous = INFINITY;
        for (int N : {40, 80, 160}) {
            const double d = distance_to_pbc(classified(symmetric(N, eta, {static_cast<int>(0.4 * N)})), symmetric(N, 1.0, {}));
            CHECK(d < previous);
            previous = d;
        }
    }
}

TEST_CASE("level grouping and state selection") {
    const std::vector<Complex> v{{1, 0}, {1 + 1e-8, 0}, {0, -1}, {1, 1e-9}};
    const auto levels = group_levels(v);
    REQUIRE(levels.size() == 2);
    CHECK(levels[0].multiplicity == 1);
    CHECK(levels[1].multiplicity == 3);

    const SpectrumResult r = classified(symmetric(50, 1e-3, {20}));
    const auto top = select_state(r, SpectralTag::RightLoop, StateSelector::MaxImag);
    const auto bottom = select_state(r, SpectralTag::RightLoop, StateSelector::MinImag);
    const auto closest = select_state(r, SpectralTag::RightLoop, StateSelector::SmallestPositiveReal);
    REQUIRE(top);
    REQUIRE(bottom);
    REQUIRE(closest);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.classification[i] != SpectralTag::RightLoop) continue;
        CHECK(r.eigenvalues[i].imag() <= r.eigenvalues[*top].imag());
        CHECK(r.eigenvalues[i].imag() >= r.eigenvalues[*bottom].imag());
        CHECK(r.eigenvalues[i].real() >= r.eigenvalues[*closest].real());
    }
}

}
