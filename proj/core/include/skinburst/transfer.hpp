#pragma once

#include <optional>
#include <span>
#include <vector>

#include "skinburst/lattice.hpp"

namespace skinburst {

/// A(E) = (E1^2 - J^2) / (2tJ), E1 = E + i gamma.
Complex bulk_factor(Complex E, const LatticeConfig& config);

/// B(E) = (E1 E2 - J^2)^2 / (2 t eta J^2), E2 = E + i eta/2. Throws ZeroEta.
Complex impurity_factor(Complex E, const LatticeConfig& config);

/// (k/N) [ln|2t/eta| + 2 ln|(E1 E2 - J^2)/(E1^2 - J^2)|]; zero when k = 0.
/// Throws SingularTransfer or ZeroEta.
double lyapunov(Complex E, const LatticeConfig& config);

/// ln|2t/eta| / N. Throws ZeroEta.
double lyapunov_conventional(const LatticeConfig& config);

/// Inclusive range of unwrapped cell labels; cells are taken modulo N.
struct FitWindow {
    int first = 1;
    int last = 1;
    int length() const noexcept { return last - first + 1; }
};

struct LyapunovFit {
    double lambda = 0.0;
    double std_error = 0.0;
    FitWindow window;
};

struct EigenstateProfile {
    LatticeConfig config;
    Complex E;
    std::vector<Complex> p;  // SSH amplitudes per cell, normalized state
    std::vector<Complex> q;
    std::vector<double> density;  // |psi_A|^2 + |psi_B|^2
    std::vector<double> coords;   // n / N
    std::optional<LyapunovFit> fit;
    std::optional<double> xi;  // 1 / |lambda_fit|

    int cells() const noexcept { return static_cast<int>(density.size()); }
};

/// Longest impurity-free arc, trimmed by floor(N/10) per end but never below
/// 10 cells. Whole ring (trimmed) when there are no impurities.
FitWindow default_fit_window(const LatticeConfig& config);

/// Least-squares slope of -ln|q_n| against n. Throws WindowTooSmall or
/// WindowCrossesImpurity.
LyapunovFit fit_lyapunov(const EigenstateProfile& profile, FitWindow window);

/// Profile from a right eigenvector given in either basis. The default fit
/// is attached when the default window admits one.
EigenstateProfile profile_from_vector(Complex E, const ComplexVector& v, Basis basis,
                                      const LatticeConfig& config);

/// Eigenstate at a loop eigenvalue built by the transfer recursion (t = gamma
/// only). Throws UnsupportedRegime, NotAnEigenvalue, SingularTransfer, ZeroEta.
EigenstateProfile reconstruct_eigenstate(Complex E, const LatticeConfig& config);

/// Cross-stitch state vector of a profile (unit norm).
ComplexVector cross_stitch_state(const EigenstateProfile& profile);

/// N rho_n resampled onto k/G (G = smallest N) by periodic linear
/// interpolation; returns the largest pairwise root-mean-square difference.
/// Throws IncompatibleConfigs.
double collapse_metric(std::span<const EigenstateProfile> profiles);

}  // namespace skinburst
