#pragma once

// Transfer factors evaluated in 50-digit binary floating point.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <complex>

namespace oracle {

using Real50 = boost::multiprecision::cpp_bin_float_50;

struct Complex50 {
    Real50 re, im;
};

inline Complex50 operator+(const Complex50& a, const Complex50& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex50 operator-(const Complex50& a, const Complex50& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex50 operator*(const Complex50& a, const Complex50& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex50 operator/(const Complex50& a, const Real50& s) { return {a.re / s, a.im / s}; }

inline std::complex<double> to_double(const Complex50& z) {
    return {static_cast<double>(z.re), static_cast<double>(z.im)};
}

/// (E1^2 - J^2) / (2 t J) with E1 = E + i gamma.
inline std::complex<double> bulk_factor(Real50 re, Real50 im, Real50 J, Real50 t, Real50 gamma) {
    const Complex50 e1{re, im + gamma};
    const Complex50 jj{J * J, 0};
    return to_double((e1 * e1 - jj) / (2 * t * J));
}

/// (E1 E2 - J^2)^2 / (2 t eta J^2) with E2 = E + i eta / 2.
inline std::complex<double> impurity_factor(Real50 re, Real50 im, Real50 J, Real50 t, Real50 gamma, Real50 eta) {
    const Complex50 e1{re, im + gamma};
    const Complex50 e2{re, im + eta / 2};
    const Complex50 jj{J * J, 0};
    const Complex50 d = e1 * e2 - jj;
    return to_double((d * d) / (2 * t * eta * J * J));
}

inline double conventional_lyapunov(int N, Real50 t, Real50 eta) {
    return static_cast<double>(boost::multiprecision::log(boost::multiprecision::abs(2 * t / eta)) / N);
}

}  // namespace oracle
