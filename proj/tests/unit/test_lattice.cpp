#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "oracles/charpoly.hpp"
#include "skinburst/error.hpp"
#include "skinburst/lattice.hpp"
#include "skinburst/spectral.hpp"

using namespace skinburst;
using testing::symmetric;

namespace {

ErrorCode code_of(const LatticeConfig& c) {
    try {
        validate_config(c);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("config was accepted");
    return ErrorCode::Usage;
}

LatticeConfig raw(int N, std::vector<int> m) {
    LatticeConfig c;
    c.N = N;
    c.eta = std::exp(3.0);
    c.impurities = std::move(m);
    return c;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("validation accepts separated impurities and rejects neighbours") {
    CHECK_NOTHROW(validate_config(raw(100, {40})));
    CHECK(code_of(raw(100, {40, 41})) == ErrorCode::AdjacentImpurities);
    CHECK(code_of(raw(100, {1, 100})) == ErrorCode::AdjacentImpurities);
    CHECK(code_of(raw(100, {0})) == ErrorCode::InvalidImpurity);
    CHECK(code_of(raw(100, {101})) == ErrorCode::InvalidImpurity);
    CHECK(code_of(raw(100, {40, 40})) == ErrorCode::AdjacentImpurities);
    CHECK(code_of(raw(4, {1, 3})) == ErrorCode::BadSize);
    CHECK(code_of(raw(3, {})) == ErrorCode::BadSize);
    LatticeConfig negative = raw(10, {});
    negative.gamma = -0.1;
    CHECK(code_of(negative) == ErrorCode::NegativeParameter);
    CHECK(validate_config(raw(100, {60, 20, 40})).impurities == std::vector<int>{20, 40, 60});
}

TEST_CASE("cell indexing wraps around the ring") {
    CHECK(wrap_cell(0, 10) == 10);
    CHECK(wrap_cell(11, 10) == 1);
    CHECK(wrap_cell(-1, 10) == 9);
    CHECK(pbc_distance(1, 10, 10) == 1);
    CHECK(pbc_distance(2, 7, 10) == 5);
}

TEST_CASE("an impurity at eta = 1 is indistinguishable from a bulk cell") {
    const LatticeConfig with = symmetric(4, 1.0, {2});
    const LatticeConfig without = symmetric(4, 1.0, {});
    CHECK(with.hopping(2) == doctest::Approx(0.5));
    CHECK(with.b_loss(2) == doctest::Approx(1.0));
    CHECK(with.b_loss(2) == doctest::Approx(2 * with.gamma));
    for (Basis b : {Basis::CrossStitch, Basis::Ssh}) {
        CHECK((build_hamiltonian(with, b).data - build_hamiltonian(without, b).data).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("mapped form is a one-way chain at t = gamma") {
    const LatticeConfig c = symmetric(12, 0.3, {5});
    const ComplexMatrix h = build_hamiltonian(c, Basis::Ssh).data;
    for (int n = 1; n <= c.N; ++n) {
        const int p = 2 * (n - 1);
        const int q = p + 1;
        const double forward = c.is_impurity(n) ? c.eta : 2 * c.t;
        CHECK(std::abs(h(p, q) - Complex(forward, 0.0)) < 1e-15);
        CHECK(std::abs(h(q, p)) < 1e-15);
    }
}

TEST_CASE("decoupled cells give a diagonal Hamiltonian with loss on B only") {
    LatticeConfig c;
    c.N = 4;
    c.J = 0.0;
    c.t = 0.0;
    c.gamma = 0.5;
    c.eta = 0.0;
    c = validate_config(c);
    const ComplexMatrix h = build_hamiltonian(c, Basis::CrossStitch).data;
    ComplexMatrix off = h;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() == 0.0);
    for (int n = 0; n < c.N; ++n) {
        CHECK(h(2 * n, 2 * n) == Complex(0.0, 0.0));
        CHECK(std::abs(h(2 * n + 1, 2 * n + 1) - Complex(0.0, -2 * c.gamma)) < 1e-15);
    }
}

TEST_CASE("rotation maps the cross-stitch lattice onto the mapped chain") {
    CHECK(verify_mapping(symmetric(10, 1e-3, {4})) < 1e-12);
    const BlockUnitary u(6);
    const ComplexMatrix d = u.dense();
    CHECK((d * d.adjoint() - ComplexMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-15);
    ComplexVector v = ComplexVector::LinSpaced(12, 1.0, 12.0);
    for (Orientation o : {Orientation::U, Orientation::UDagger}) {
        CHECK((u.apply_inverse(u.apply(v, o), o) - v).norm() < 1e-13);
    }
}

TEST_CASE("both bases share the spectrum of the four-impurity lattice") {
    const LatticeConfig c = symmetric(50, 1e-3, {10, 20, 30, 40});
    const auto cross = diagonalize(build_hamiltonian(c, Basis::CrossStitch), false).eigenvalues;
    const auto ssh = diagonalize(build_hamiltonian(c, Basis::Ssh), false).eigenvalues;
    CHECK(oracle::multiset_distance(cross, ssh) < 1e-10);
}

TEST_CASE("eigenvalues sum to the trace in either basis") {
    for (double eta : {1e-2, 10.0, 1e3}) {
        const LatticeConfig c = symmetric(50, eta, {10, 20, 30, 40});
        for (Basis b : {Basis::CrossStitch, Basis::Ssh}) {
            Complex sum = 0.0;
            for (Complex e : diagonalize(build_hamiltonian(c, b), false).eigenvalues) sum += e;
            CHECK(std::abs(sum - analytic_trace(c)) < 1e-10 * std::max(1.0, eta));
        }
    }
}

TEST_CASE("trace matches the closed form in both bases") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int trial = 0; trial < 25; ++trial) {
        LatticeConfig c;
        c.N = 6 + trial;
        c.J = u(rng);
        c.t = u(rng);
        c.gamma = u(rng);
        c.eta = u(rng);
        c.impurities = {2, 5};
        c = validate_config(c);
        const Complex expected = analytic_trace(c);
        CHECK(std::abs(expected - Complex(0.0, -(2 * c.gamma * (c.N - 2) + 2 * c.eta))) < 1e-12);
        CHECK(std::abs(build_hamiltonian(c, Basis::CrossStitch).data.trace() - expected) < 1e-12);
        CHECK(std::abs(build_hamiltonian(c, Basis::Ssh).data.trace() - expected) < 1e-12);
        CHECK(verify_mapping(c) < 1e-12);
    }
}

TEST_CASE("Hamiltonian export lists every nonzero entry once") {
    const LatticeConfig c = symmetric(5, 2.0, {3});
    const Hamiltonian h = build_hamiltonian(c, Basis::CrossStitch);
    std::ostringstream os;
    write_hamiltonian_csv(os, h);
    std::istringstream in(os.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line.rfind("# ", 0) == 0);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == (h.data.array() != Complex(0.0, 0.0)).count());
}

}
