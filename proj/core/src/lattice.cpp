#include "skinburst/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "skinburst/csv.hpp"
#include "skinburst/error.hpp"

namespace skinburst {

namespace {

constexpr Complex kI{0.0, 1.0};

struct CellParameters {
    std::vector<double> hopping;  // t_n
    std::vector<double> loss;     // gamma_n on B
};

CellParameters cell_parameters(const LatticeConfig& config, const BuildOptions& options) {
    CellParameters p;
    p.hopping.resize(config.N);
    p.loss.resize(config.N);
    for (int n = 1; n <= config.N; ++n) {
        p.hopping[n - 1] = config.hopping(n);
        p.loss[n - 1] = config.b_loss(n);
    }
    if (options.b_loss_override) {
        if (static_cast<int>(options.b_loss_override->size()) != config.N) {
            throw Error(ErrorCode::BadSize, "b_loss_override must have one entry per cell");
        }
        p.loss = *options.b_loss_override;
    }
    return p;
}

int a_index(int cell, int N) { return 2 * (wrap_cell(cell, N) - 1); }
int b_index(int cell, int N) { return 2 * (wrap_cell(cell, N) - 1) + 1; }

ComplexMatrix build_cross_stitch(const LatticeConfig& c, const CellParameters& p, bool flip) {
    const int N = c.N;
    ComplexMatrix h = ComplexMatrix::Zero(2 * N, 2 * N);
    const Complex drift = (flip ? -1.0 : 1.0) * kI * (c.J / 2.0);
    const double cross = c.J / 2.0;
    for (int n = 1; n <= N; ++n) {
        const int a = a_index(n, N);
        const int b = b_index(n, N);
        const double tn = p.hopping[n - 1];
        h(a, b) += tn;
        h(b, a) += tn;
        // A row: +iJ/2 psi^A_{n-1} - iJ/2 psi^A_{n+1} + J/2 (psi^B_{n-1} + psi^B_{n+1})
        h(a, a_index(n - 1, N)) += drift;
        h(a, a_index(n + 1, N)) -= drift;
        h(a, b_index(n - 1, N)) += cross;
        h(a, b_index(n + 1, N)) += cross;
        // B row: -iJ/2 psi^B_{n-1} + iJ/2 psi^B_{n+1} + J/2 (psi^A_{n-1} + psi^A_{n+1}) - i gamma_n psi^B_n
        h(b, b_index(n - 1, N)) -= drift;
        h(b, b_index(n + 1, N)) += drift;
        h(b, a_index(n - 1, N)) += cross;
        h(b, a_index(n + 1, N)) += cross;
        h(b, b) += -kI * p.loss[n - 1];
    }
    return h;
}

ComplexMatrix build_ssh(const LatticeConfig& c, const CellParameters& p) {
    const int N = c.N;
    ComplexMatrix h = ComplexMatrix::Zero(2 * N, 2 * N);
    for (int n = 1; n <= N; ++n) {
        const int pn = a_index(n, N);
        const int qn = b_index(n, N);
        const double tn = p.hopping[n - 1];
        const double half_loss = p.loss[n - 1] / 2.0;
        h(pn, qn) += tn + half_loss;
        h(qn, pn) += tn - half_loss;
        h(pn, pn) += -kI * half_loss;
        h(qn, qn) += -kI * half_loss;
        const int p_next = a_index(n + 1, N);
        h(qn, p_next) += c.J;
        h(p_next, qn) += c.J;
    }
    return h;
}

}  // namespace

bool LatticeConfig::is_impurity(int cell) const noexcept {
    const int n = wrap_cell(cell, N);
    return std::find(impurities.begin(), impurities.end(), n) != impurities.end();
}

double LatticeConfig::hopping(int cell) const noexcept {
    return is_impurity(cell) ? eta / 2.0 : t;
}

double LatticeConfig::b_loss(int cell) const noexcept {
    return is_impurity(cell) ? eta : 2.0 * gamma;
}

int wrap_cell(int cell, int N) noexcept {
    int r = (cell - 1) % N;
    if (r < 0) r += N;
    return r + 1;
}

int pbc_distance(int a, int b, int N) noexcept {
    const int d = std::abs(a - b) % N;
    return std::min(d, N - d);
}

LatticeConfig validate_config(LatticeConfig raw) {
    if (raw.N < 4) {
        throw Error(ErrorCode::BadSize, "N must be at least 4 (got " + std::to_string(raw.N) + ")");
    }
    if (!(raw.t >= 0.0) || !(raw.gamma >= 0.0) || !(raw.eta >= 0.0)) {
        throw Error(ErrorCode::NegativeParameter, "t, gamma and eta must be nonnegative");
    }
    if (!std::isfinite(raw.J) || !std::isfinite(raw.t) || !std::isfinite(raw.gamma) ||
        !std::isfinite(raw.eta)) {
        throw Error(ErrorCode::NegativeParameter, "parameters must be finite");
    }
    for (int m : raw.impurities) {
        if (m < 1 || m > raw.N) {
            throw Error(ErrorCode::InvalidImpurity,
                        "impurity cell " + std::to_string(m) + " outside 1.." + std::to_string(raw.N));
        }
    }
    std::sort(raw.impurities.begin(), raw.impurities.end());
    const int k = raw.kappa();
    for (int f = 0; f < k; ++f) {
        for (int g = f + 1; g < k; ++g) {
            const int d = pbc_distance(raw.impurities[f], raw.impurities[g], raw.N);
            if (d < 2) {
                std::ostringstream msg;
                msg << "impurities " << raw.impurities[f] << " and " << raw.impurities[g]
                    << " have PBC distance " << d << " < 2";
                throw Error(ErrorCode::AdjacentImpurities, msg.str());
            }
        }
    }
    if (2 * k > raw.N - 1) {
        throw Error(ErrorCode::BadSize, "too many impurities: need 2*kappa <= N-1");
    }
    return raw;
}

const char* to_string(Basis basis) noexcept {
    return basis == Basis::CrossStitch ? "cross_stitch" : "ssh";
}

const char* to_string(Orientation orientation) noexcept {
    return orientation == Orientation::U ? "U" : "U_dagger";
}

Hamiltonian build_hamiltonian(const LatticeConfig& config, Basis basis, const BuildOptions& options) {
    const CellParameters p = cell_parameters(config, options);
    Hamiltonian h;
    h.basis = basis;
    h.orientation = mapping_orientation();
    h.data = basis == Basis::CrossStitch ? build_cross_stitch(config, p, options.flip_drift)
                                         : build_ssh(config, p);
    return h;
}

BlockUnitary::BlockUnitary(int cells) : cells_(cells) {
    if (cells < 1) throw Error(ErrorCode::BadSize, "rotation needs at least one cell");
}

Eigen::Matrix2cd BlockUnitary::block() {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd u;
    u << Complex(s, 0.0), Complex(0.0, -s), Complex(0.0, -s), Complex(s, 0.0);
    return u;
}

ComplexMatrix BlockUnitary::dense() const {
    ComplexMatrix u = ComplexMatrix::Zero(dim(), dim());
    const Eigen::Matrix2cd b = block();
    for (int n = 0; n < cells_; ++n) u.block<2, 2>(2 * n, 2 * n) = b;
    return u;
}

ComplexVector BlockUnitary::apply(const ComplexVector& v) const {
    return apply(v, Orientation::U);
}

ComplexVector BlockUnitary::apply_adjoint(const ComplexVector& v) const {
    return apply(v, Orientation::UDagger);
}

ComplexVector BlockUnitary::apply(const ComplexVector& v, Orientation orientation) const {
    if (v.size() != dim()) throw Error(ErrorCode::BadSize, "vector length does not match rotation");
    const Eigen::Matrix2cd b = orientation == Orientation::U ? block() : Eigen::Matrix2cd(block().adjoint());
    ComplexVector out(v.size());
    for (int n = 0; n < cells_; ++n) out.segment<2>(2 * n) = b * v.segment<2>(2 * n);
    return out;
}

ComplexVector BlockUnitary::apply_inverse(const ComplexVector& v, Orientation orientation) const {
    return apply(v, orientation == Orientation::U ? Orientation::UDagger : Orientation::U);
}

ComplexMatrix BlockUnitary::conjugate(const ComplexMatrix& h, Orientation orientation) const {
    if (h.rows() != dim() || h.cols() != dim()) {
        throw Error(ErrorCode::BadSize, "matrix size does not match rotation");
    }
    const Eigen::Matrix2cd c = orientation == Orientation::U ? block() : Eigen::Matrix2cd(block().adjoint());
    const Eigen::Matrix2cd c_adj = c.adjoint();
    ComplexMatrix out(dim(), dim());
    for (int i = 0; i < cells_; ++i) {
        for (int j = 0; j < cells_; ++j) {
            out.block<2, 2>(2 * i, 2 * j) = c * h.block<2, 2>(2 * i, 2 * j) * c_adj;
        }
    }
    return out;
}

BlockUnitary rotation(int cells) { return BlockUnitary(cells); }

Orientation mapping_orientation() {
    static const Orientation chosen = [] {
        LatticeConfig ref;
        ref.N = 5;
        ref.J = 0.8;
        ref.t = 0.35;
        ref.gamma = 0.6;
        ref.eta = 1.7;
        ref.impurities = {2};
        const CellParameters p = cell_parameters(ref, {});
        const ComplexMatrix cross = build_cross_stitch(ref, p, false);
        const ComplexMatrix ssh = build_ssh(ref, p);
        const BlockUnitary u(ref.N);
        const double dev_u = (u.conjugate(cross, Orientation::U) - ssh).cwiseAbs().maxCoeff();
        const double dev_ud = (u.conjugate(cross, Orientation::UDagger) - ssh).cwiseAbs().maxCoeff();
        if (std::min(dev_u, dev_ud) > 1e-12) {
            throw Error(ErrorCode::MappingMismatch, "neither rotation orientation reproduces the SSH form");
        }
        return dev_u < dev_ud ? Orientation::U : Orientation::UDagger;
    }();
    return chosen;
}

double verify_mapping(const LatticeConfig& config, double threshold) {
    const Hamiltonian cross = build_hamiltonian(config, Basis::CrossStitch);
    const Hamiltonian ssh = build_hamiltonian(config, Basis::Ssh);
    const BlockUnitary u(config.N);
    const double dev = (u.conjugate(cross.data, ssh.orientation) - ssh.data).cwiseAbs().maxCoeff();
    if (dev > threshold) {
        std::ostringstream msg;
        msg << "mapping deviation " << dev << " exceeds " << threshold;
        throw Error(ErrorCode::MappingMismatch, msg.str());
    }
    return dev;
}

Complex analytic_trace(const LatticeConfig& config) {
    const int k = config.kappa();
    return -kI * (2.0 * config.gamma * (config.N - k) + config.eta * k);
}

void write_hamiltonian_csv(std::ostream& os, const Hamiltonian& h) {
    os << "# row,col,re,im (0-based interleaved indices; basis " << to_string(h.basis) << ")\n";
    for (int i = 0; i < h.dim(); ++i) {
        for (int j = 0; j < h.dim(); ++j) {
            const Complex z = h.data(i, j);
            if (z == Complex{}) continue;
            os << i << ',' << j << ',' << format_real(z.real()) << ',' << format_real(z.imag()) << '\n';
        }
    }
}

}  // namespace skinburst
