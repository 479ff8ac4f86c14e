#include "spme/basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spme {

double SpectralMap::operator()(double s) const {
    switch (form) {
        case Form::identity: return s;
        case Form::power: return std::pow(s, exponent);
        case Form::shifted_power: return std::pow(shift + s, exponent);
    }
    return s;
}

int default_quad_size(BasisKind kind, int n_modes) {
    return kind == BasisKind::dirichlet_sine ? 8 * n_modes : 4 * n_modes;
}

namespace {

// Uniform grid on [0,1] including both endpoints, trapezoid weights.  The
// sine modes vanish at the endpoints, so products e_i e_j are summed exactly
// by the discrete sine orthogonality as long as i + j < 2(M-1).
void build_dirichlet(EigenBasis& b) {
    const int n = b.n_modes, m = b.n_quad;
    const double h = 1.0 / (m - 1);
    b.quad_nodes.resize(m);
    b.quad_weights.resize(m);
    for (int k = 0; k < m; ++k) {
        b.quad_nodes[k] = k * h;
        b.quad_weights[k] = (k == 0 || k == m - 1) ? h / 2 : h;
    }
    const double pi = std::numbers::pi;
    b.base_eigenvalues.resize(n);
    b.eig_table.resize(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        b.base_eigenvalues[i] = (i + 1) * pi * (i + 1) * pi;
        for (int k = 0; k < m; ++k)
            b.eig_table[static_cast<std::size_t>(i) * m + k] =
                std::sqrt(2.0) * std::sin((i + 1) * pi * b.quad_nodes[k]);
    }
}

// Gauss quadrature for the standard Gaussian measure via the Jacobi matrix of
// the orthonormal (probabilists') Hermite polynomials: diagonal 0, off-diag
// sqrt(k).  Nodes are the eigenvalues, weights the squared first eigenvector
// components (they sum to 1 since m is a probability measure).
void build_hermite(EigenBasis& b) {
    const int n = b.n_modes, m = b.n_quad;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermite_ou quadrature: eigensolver failed");
    b.quad_nodes.resize(m);
    b.quad_weights.resize(m);
    for (int k = 0; k < m; ++k) {
        b.quad_nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        b.quad_weights[k] = v0 * v0;
    }
    b.base_eigenvalues.resize(n);
    for (int i = 0; i < n; ++i) b.base_eigenvalues[i] = i;  // lambda^(0) = i-1, 1-based

    // e_i = orthonormal Hermite of degree i-1 via the three-term recurrence.
    b.eig_table.resize(static_cast<std::size_t>(n) * m);
    for (int k = 0; k < m; ++k) {
        const double u = b.quad_nodes[k];
        double p_prev = 0.0, p = 1.0;
        for (int i = 0; i < n; ++i) {
            b.eig_table[static_cast<std::size_t>(i) * m + k] = p;
            const double p_next = (u * p - std::sqrt(static_cast<double>(i)) * p_prev) /
                                  std::sqrt(static_cast<double>(i + 1));
            p_prev = p;
            p = p_next;
        }
    }
}

} // namespace

EigenBasis build_basis(BasisKind kind, int n_modes, int n_quad, const SpectralMap& map) {
    if (n_modes < 1) throw std::invalid_argument("build_basis: n_modes must be >= 1");
    const int floor = kind == BasisKind::dirichlet_sine ? 4 * n_modes : 2 * n_modes;
    if (n_quad < floor)
        throw std::invalid_argument("build_basis: n_quad below oversampling floor (" +
                                    std::to_string(floor) + ")");

    EigenBasis b;
    b.kind = kind;
    b.n_modes = n_modes;
    b.n_quad = n_quad;
    if (kind == BasisKind::dirichlet_sine)
        build_dirichlet(b);
    else
        build_hermite(b);

    b.eigenvalues.resize(n_modes);
    for (int i = 0; i < n_modes; ++i) {
        b.eigenvalues[i] = map(b.base_eigenvalues[i]);
        if (!(b.eigenvalues[i] > 0.0))
            throw std::invalid_argument(
                "build_basis: spectral map must be strictly positive on the base spectrum "
                "(mode " + std::to_string(i + 1) + " mapped to a nonpositive value)");
        if (i > 0 && b.eigenvalues[i] < b.eigenvalues[i - 1])
            throw std::invalid_argument("build_basis: spectral map must be nondecreasing");
    }

    b.eig_table_t.resize(b.eig_table.size());
    for (int i = 0; i < n_modes; ++i)
        for (int k = 0; k < n_quad; ++k)
            b.eig_table_t[static_cast<std::size_t>(k) * n_modes + i] =
                b.eig_table[static_cast<std::size_t>(i) * n_quad + k];

    // Discrete orthonormality gate.
    double worst = 0.0;
    for (int i = 0; i < n_modes; ++i)
        for (int j = i; j < n_modes; ++j) {
            double s = 0.0;
            const double* ei = &b.eig_table[static_cast<std::size_t>(i) * n_quad];
            const double* ej = &b.eig_table[static_cast<std::size_t>(j) * n_quad];
            for (int k = 0; k < n_quad; ++k) s += b.quad_weights[k] * ei[k] * ej[k];
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    if (worst > 1e-10)
        throw std::runtime_error("build_basis: quadrature orthonormality off by " +
                                 std::to_string(worst));
    return b;
}

EigenBasis build_basis(BasisKind kind, int n_modes, const SpectralMap& map) {
    return build_basis(kind, n_modes, default_quad_size(kind, n_modes), map);
}

void synthesize(const EigenBasis& basis, std::span<const double> coeffs, std::span<double> grid) {
    const int n = basis.n_modes, m = basis.n_quad;
    if (static_cast<int>(coeffs.size()) != n)
        throw std::invalid_argument("synthesize: coefficient count != n_modes");
    if (static_cast<int>(grid.size()) != m)
        throw std::invalid_argument("synthesize: grid size != n_quad");
    for (int k = 0; k < m; ++k) {
        const double* row = &basis.eig_table_t[static_cast<std::size_t>(k) * n];
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += coeffs[i] * row[i];
        grid[k] = s;
    }
}

std::vector<double> synthesize(const EigenBasis& basis, const Field& coeffs) {
    std::vector<double> grid(basis.n_quad);
    synthesize(basis, coeffs, grid);
    return grid;
}

void analyze(const EigenBasis& basis, std::span<const double> grid, std::span<double> coeffs) {
    const int n = basis.n_modes, m = basis.n_quad;
    if (static_cast<int>(grid.size()) != m)
        throw std::invalid_argument("analyze: grid size != n_quad");
    if (static_cast<int>(coeffs.size()) != n)
        throw std::invalid_argument("analyze: coefficient count != n_modes");
    for (int i = 0; i < n; ++i) {
        const double* row = &basis.eig_table[static_cast<std::size_t>(i) * m];
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += basis.quad_weights[k] * grid[k] * row[k];
        coeffs[i] = s;
    }
}

Field analyze(const EigenBasis& basis, const std::vector<double>& grid) {
    Field coeffs(basis.n_modes);
    analyze(basis, grid, coeffs);
    return coeffs;
}

double norm_l2(const Field& coeffs) {
    double s = 0.0;
    for (double a : coeffs) s += a * a;
    return std::sqrt(s);
}

double norm_h(const EigenBasis& basis, const Field& coeffs) {
    double s = 0.0;
    for (int i = 0; i < basis.n_modes; ++i) s += coeffs[i] * coeffs[i] / basis.eigenvalues[i];
    return std::sqrt(s);
}

double norm_q(const Field& coeffs, const std::vector<double>& q_seq) {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (q_seq[i] == 0.0) throw std::invalid_argument("norm_q: q_i = 0");
        const double z = coeffs[i] / q_seq[i];
        s += z * z;
    }
    return std::sqrt(s);
}

double norm_lp_grid(const EigenBasis& basis, std::span<const double> grid, double p) {
    double s = 0.0;
    for (int k = 0; k < basis.n_quad; ++k)
        s += basis.quad_weights[k] * std::pow(std::abs(grid[k]), p);
    return std::pow(s, 1.0 / p);
}

double norm_lp(const EigenBasis& basis, const Field& coeffs, double p) {
    return norm_lp_grid(basis, synthesize(basis, coeffs), p);
}

NormReport norms(const EigenBasis& basis, const Field& coeffs, double r,
                 const std::vector<double>& q_seq) {
    if (r < 1.0) throw std::invalid_argument("norms: r must be >= 1");
    NormReport out;
    out.h = norm_h(basis, coeffs);
    out.l2 = norm_l2(coeffs);
    out.lr1 = norm_lp(basis, coeffs, r + 1.0);
    out.q = norm_q(coeffs, q_seq);
    return out;
}

HsReport hs_summability_report(const EigenBasis& basis, const std::vector<double>& q_seq) {
    HsReport rep;
    const int n = basis.n_modes;
    for (int i = 0; i < n; ++i)
        rep.partial_sum += q_seq[i] * q_seq[i] / basis.eigenvalues[i];
    if (n >= 4) {
        double last = 0.0, prev = 0.0;
        for (int i = n / 2; i < n; ++i) last += q_seq[i] * q_seq[i] / basis.eigenvalues[i];
        for (int i = n / 4; i < n / 2; ++i) prev += q_seq[i] * q_seq[i] / basis.eigenvalues[i];
        rep.tail_ratio = prev > 0.0 ? last / prev : 0.0;
    }
    return rep;
}

std::string to_string(BasisKind kind) {
    return kind == BasisKind::dirichlet_sine ? "dirichlet_sine" : "hermite_ou";
}

BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "dirichlet_sine") return BasisKind::dirichlet_sine;
    if (s == "hermite_ou") return BasisKind::hermite_ou;
    throw std::invalid_argument("unknown basis kind: " + s);
}

} // namespace spme
