#pragma once

// Time-integrated density without time stepping. For i dpsi/dt = H psi with a
// strictly dissipative H, G = int_0^inf psi psi^dagger dt solves
//     H G - G H^dagger = -i psi0 psi0^dagger.
// Solved by Bartels-Stewart on the complex Schur form H = U T U^dagger.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

inline Eigen::MatrixXcd integrated_density(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi0) {
    const Eigen::Index n = h.rows();
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(h);
    const Eigen::MatrixXcd& u = schur.matrixU();
    const Eigen::MatrixXcd& t = schur.matrixT();
    const Eigen::VectorXcd c0 = u.adjoint() * psi0;
    const Eigen::MatrixXcd c = std::complex<double>(0.0, -1.0) * c0 * c0.adjoint();
    // T Y - Y T^dagger = C; T^dagger is lower triangular, so sweep columns from the right.
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        Eigen::VectorXcd rhs = c.col(j);
        for (Eigen::Index k = j + 1; k < n; ++k) rhs += std::conj(t(j, k)) * y.col(k);
        Eigen::MatrixXcd shifted = t;
        shifted.diagonal().array() -= std::conj(t(j, j));
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return u * y * u.adjoint();
}

}  // namespace oracle
