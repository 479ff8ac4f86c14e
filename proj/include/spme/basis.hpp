#pragma once

// Spectral state space: eigenbasis of -L on L^2(m), quadrature grid, and the
// norms used throughout (H = H^{-1}, L^2, L^{r+1}, intrinsic Q-norm).
//
// Conventions: a field x is stored by its L^2(m) coefficients a_i = <x, e_i>,
// i = 1..N.  Then
//   ||x||_H^2  = sum a_i^2 / lambda_i,
//   ||x||_2^2  = sum a_i^2,
//   ||x||_Q^2  = sum a_i^2 / q_i^2,
//   ||x||_p    = (sum_k w_k |x(u_k)|^p)^{1/p}   (quadrature).

#include <span>
#include <string>
#include <vector>

namespace spme {

using Field = std::vector<double>;

enum class BasisKind { dirichlet_sine, hermite_ou };

struct SpectralMap {
    enum class Form { identity, power, shifted_power };
    Form form = Form::identity;
    double exponent = 1.0;
    double shift = 0.0;

    double operator()(double s) const;

    static SpectralMap identity() { return {}; }
    static SpectralMap power(double q) { return {Form::power, q, 0.0}; }
    static SpectralMap shifted_power(double eps, double q) { return {Form::shifted_power, q, eps}; }
};

struct EigenBasis {
    BasisKind kind = BasisKind::dirichlet_sine;
    int n_modes = 0;  // N
    int n_quad = 0;   // M
    std::vector<double> base_eigenvalues;  // lambda_i^(0)
    std::vector<double> eigenvalues;       // lambda_i = phi(lambda_i^(0)) > 0
    std::vector<double> quad_nodes;        // u_k
    std::vector<double> quad_weights;      // w_k, sum = 1
    std::vector<double> eig_table;         // e_i(u_k), [i*M + k]
    std::vector<double> eig_table_t;       // transposed, [k*N + i]

    double lambda1() const { return eigenvalues.front(); }
};

// M defaults to 8N (dirichlet_sine, composite trapezoid on a uniform grid)
// or 4N (hermite_ou, Gauss-Hermite).  Throws std::invalid_argument on a bad
// map or undersized grid; std::runtime_error if discrete orthonormality
// fails beyond 1e-10.
EigenBasis build_basis(BasisKind kind, int n_modes, int n_quad, const SpectralMap& map);
EigenBasis build_basis(BasisKind kind, int n_modes, const SpectralMap& map);

int default_quad_size(BasisKind kind, int n_modes);

// x(u_k) = sum_i a_i e_i(u_k)
void synthesize(const EigenBasis& basis, std::span<const double> coeffs, std::span<double> grid);
std::vector<double> synthesize(const EigenBasis& basis, const Field& coeffs);

// a_i = sum_k w_k f(u_k) e_i(u_k)
void analyze(const EigenBasis& basis, std::span<const double> grid, std::span<double> coeffs);
Field analyze(const EigenBasis& basis, const std::vector<double>& grid);

double norm_l2(const Field& coeffs);
double norm_h(const EigenBasis& basis, const Field& coeffs);
double norm_q(const Field& coeffs, const std::vector<double>& q_seq);
// L^p(m) norm by quadrature; grid buffer is synthesized internally.
double norm_lp(const EigenBasis& basis, const Field& coeffs, double p);
double norm_lp_grid(const EigenBasis& basis, std::span<const double> grid, double p);

struct NormReport {
    double h = 0, l2 = 0, lr1 = 0, q = 0;
};
NormReport norms(const EigenBasis& basis, const Field& coeffs, double r,
                 const std::vector<double>& q_seq);

struct HsReport {
    double partial_sum = 0;   // sum_{i<=N} q_i^2 / lambda_i
    double tail_ratio = 0;    // last dyadic block over the previous one
};
HsReport hs_summability_report(const EigenBasis& basis, const std::vector<double>& q_seq);

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& s);

} // namespace spme
