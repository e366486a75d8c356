#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace skinburst {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Parameters of the dissipative cross-stitch ring.
///
/// Cells are numbered 1..N with periodic wraparound. Bulk cells carry
/// intracell hopping t and B-site loss 2*gamma; impurity cells carry
/// hopping eta/2 and B-site loss eta.
struct LatticeConfig {
    int N = 0;
    double J = 1.0;
    double t = 0.5;
    double gamma = 0.5;
    double eta = 1.0;
    std::vector<int> impurities;  // 1-based, sorted ascending after validation

    int kappa() const noexcept { return static_cast<int>(impurities.size()); }
    bool is_impurity(int cell) const noexcept;
    /// Intracell hopping t_n.
    double hopping(int cell) const noexcept;
    /// Loss rate gamma_n on the B site.
    double b_loss(int cell) const noexcept;
};

/// Maps any integer cell label onto 1..N.
int wrap_cell(int cell, int N) noexcept;
/// min(|a-b|, N-|a-b|).
int pbc_distance(int a, int b, int N) noexcept;

/// Checks every LatticeConfig invariant and returns a normalized copy
/// (impurities sorted). Throws Error{AdjacentImpurities | BadSize |
/// NegativeParameter | InvalidImpurity}.
LatticeConfig validate_config(LatticeConfig raw);

enum class Basis { CrossStitch, Ssh };

/// Which of U_tot or U_tot^dagger plays the role of C in H_ssh = C H_cross C^dagger.
enum class Orientation { U, UDagger };

const char* to_string(Basis basis) noexcept;
const char* to_string(Orientation orientation) noexcept;

/// Dense 2N x 2N Hamiltonian with interleaved ordering (A1, B1, A2, B2, ...),
/// or (P1, Q1, ...) in the SSH basis.
struct Hamiltonian {
    Basis basis = Basis::CrossStitch;
    Orientation orientation = Orientation::UDagger;  // recorded for SSH
    ComplexMatrix data;

    int dim() const noexcept { return static_cast<int>(data.rows()); }
    int cells() const noexcept { return dim() / 2; }
};

/// Test hooks. Production code builds with the defaults.
struct BuildOptions {
    /// Replaces the per-cell B-site loss gamma_n (size N).
    std::optional<std::vector<double>> b_loss_override;
    /// Flips the sign of the +-iJ/2 intercell terms (reverses the drift).
    bool flip_drift = false;
};

/// i dpsi/dt = H psi for the cross-stitch lattice, or the rotated SSH form.
///
/// The SSH form is written for general (t, gamma): Q->P hopping t_n + gamma_n/2,
/// P->Q hopping t_n - gamma_n/2, loss -i gamma_n/2 on both sublattices, and
/// intercell Q_n <-> P_{n+1} hopping J. At t = gamma this is the familiar
/// unidirectional chain with hopping 2t (bulk) or eta (impurity).
Hamiltonian build_hamiltonian(const LatticeConfig& config, Basis basis,
                              const BuildOptions& options = {});

/// Block-diagonal unitary with U = (1/sqrt2)[[1,-i],[-i,1]] on every cell.
class BlockUnitary {
public:
    explicit BlockUnitary(int cells);

    int cells() const noexcept { return cells_; }
    int dim() const noexcept { return 2 * cells_; }

    static Eigen::Matrix2cd block();
    ComplexMatrix dense() const;

    ComplexVector apply(const ComplexVector& v) const;
    ComplexVector apply_adjoint(const ComplexVector& v) const;
    /// Applies C (U or U^dagger, per orientation) to a vector.
    ComplexVector apply(const ComplexVector& v, Orientation orientation) const;
    ComplexVector apply_inverse(const ComplexVector& v, Orientation orientation) const;
    /// C H C^dagger.
    ComplexMatrix conjugate(const ComplexMatrix& h, Orientation orientation) const;

private:
    int cells_;
};

BlockUnitary rotation(int cells);

/// The orientation that maps the cross-stitch matrix onto the SSH form,
/// found once by testing both candidates on a reference lattice.
Orientation mapping_orientation();

/// max_ij |(C H_cross C^dagger - H_ssh)_ij|. Throws MappingMismatch above threshold.
double verify_mapping(const LatticeConfig& config, double threshold = 1e-12);

/// -i [2 gamma (N - kappa) + eta kappa].
Complex analytic_trace(const LatticeConfig& config);

/// Nonzero entries as (row, col, re, im) CSV.
void write_hamiltonian_csv(std::ostream& os, const Hamiltonian& h);

}  // namespace skinburst
