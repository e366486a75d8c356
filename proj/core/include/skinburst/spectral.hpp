#pragma once

#include <optional>
#include <span>
#include <vector>

#include "skinburst/lattice.hpp"

namespace skinburst {

enum class SpectralTag { Unclassified, LeftLoop, RightLoop, Detached };

const char* to_string(SpectralTag tag) noexcept;

struct ClosureResidual {
    double magnitude = 0.0;  // |Re f|
    double phase = 0.0;      // distance of Im f to the nearest multiple of 2 pi
};

struct SpectrumResult {
    std::vector<Complex> eigenvalues;
    /// Columns are unit-norm right eigenvectors, in eigenvalue order.
    std::optional<ComplexMatrix> right_eigenvectors;
    /// ||(H - E) v||_2 per stored vector.
    std::vector<double> vector_residuals;
    std::vector<SpectralTag> classification;
    /// Empty entries where the closure form is undefined (singular factor, eta = 0).
    std::vector<std::optional<ClosureResidual>> closure_residual;
    /// NaN where undefined.
    std::vector<double> lyapunov_analytic;

    std::size_t size() const noexcept { return eigenvalues.size(); }
    std::size_t count(SpectralTag tag) const noexcept;
};

/// Dense non-Hermitian eigenproblem. Eigenvalues come back sorted by
/// (Re, Im). Vectors, when requested, are refined by one inverse-iteration
/// step if their residual exceeds 1e-10. Throws NoConvergence.
SpectrumResult diagonalize(const ComplexMatrix& h, bool want_vectors);
SpectrumResult diagonalize(const Hamiltonian& h, bool want_vectors);

/// Replaces every single-linkage cluster (links shorter than `linkage`) by
/// its mean. Round-off splits a k-fold defective eigenvalue into a ring of
/// radius ~ eps^(1/k); the ring's centroid is accurate to near machine
/// precision.
std::vector<Complex> merge_defective_clusters(std::span<const Complex> values, double linkage);

/// Log-domain closure residual for A^(N-2k) B^k = 1. Also valid for k = 0.
/// Throws ZeroEta (k >= 1, eta = 0) or SingularTransfer.
ClosureResidual closure_residual(Complex E, const LatticeConfig& config);

enum class LimitKind { EtaZero, EtaInfinity, Pbc };

const char* to_string(LimitKind kind) noexcept;

struct LimitLevel {
    Complex E;
    int multiplicity = 1;
};

/// Levels are grouped when closer than `tol` and sorted by (Re, Im).
std::vector<LimitLevel> group_levels(std::span<const Complex> values, double tol = 1e-6);

std::vector<LimitLevel> analytic_limit_spectrum(const LatticeConfig& config, LimitKind kind);

/// -i gamma + branch * sqrt(J^2 + 2tJ e^{i theta}), branch = +1 or -1.
Complex pbc_energy(const LatticeConfig& config, double theta, int branch);

/// Distance from E to the impurity-free dispersion curve, sampled at `samples` momenta.
double pbc_curve_distance(Complex E, const LatticeConfig& config, int samples = 4096);

struct ClassifyOptions {
    double delta_loop = 1e-6;
    /// Within (lo, hi) every state with |Re E| > delta_loop is a loop state.
    double fallback_lo = 0.5;
    double fallback_hi = 2.0;
    /// Samples on the segment from E to the loop centre.
    int enclosure_samples = 64;
};

/// Loop states lie on the closure level set g(E) = (N-2k) ln|A| + k ln|B| = 0
/// and g < 0 along the straight path to the loop centre +-J - i gamma, where
/// A vanishes. Detached states are separated from the centre by a g > 0
/// region. Also fills closure residuals and analytic Lyapunov values.
void classify_spectrum(SpectrumResult& result, const LatticeConfig& config,
                       const ClassifyOptions& options = {});

/// Fills closure_residual and lyapunov_analytic without touching tags.
void annotate_closure(SpectrumResult& result, const LatticeConfig& config);

/// max Im E over loop-tagged eigenvalues (over all eigenvalues if untagged).
double imaginary_gap(const SpectrumResult& result);

enum class StateSelector { MaxImag, MinImag, MaxReal, SmallestPositiveReal };

const char* to_string(StateSelector selector) noexcept;

/// Index of the eigenvalue extremizing `selector` among states tagged `loop`.
std::optional<std::size_t> select_state(const SpectrumResult& result, SpectralTag loop,
                                        StateSelector selector);

}  // namespace skinburst
