#pragma once

// Model coefficients for dX = { L Psi(t,X) + Phi(t,X) } dt + Q dW at Galerkin
// level, plus numerical checkers for the structural conditions the coupling
// and Harnack machinery rely on.

#include "spme/basis.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace spme {

// Piecewise-constant function of time; value(i) holds on [times[i-1], times[i]).
struct PiecewiseConstant {
    std::vector<double> times;   // strictly increasing breakpoints
    std::vector<double> values;  // size times.size() + 1

    double operator()(double t) const;
    double integral(double t) const;  // int_0^t, exact
    bool is_constant() const { return times.empty(); }
    double min_value() const;

    static PiecewiseConstant constant(double v) { return {{}, {v}}; }
};

struct ModelSpec {
    double r = 2.0;      // power exponent, >= 1
    double theta = 1.0;  // Harnack parameter, max(r-3,0) <= theta <= r-1

    // delta_t, xi_t, gamma_t of the structural dissipativity/coercivity
    // conditions; gamma also serves as the slope of the default linear Phi.
    PiecewiseConstant delta = PiecewiseConstant::constant(1.0);
    PiecewiseConstant xi = PiecewiseConstant::constant(1.0);
    PiecewiseConstant gamma = PiecewiseConstant::constant(0.0);

    // Growth-envelope bookkeeping (recorded, spot-checked only).
    double eta = 1.0;
    double sigma_growth = 0.0;

    std::vector<double> q_seq;  // diagonal noise coefficients, q_i != 0

    // Optional overrides; empty means the power law s -> |s|^{r-1} s and the
    // linear drift s -> gamma_t s.
    std::function<double(double, double)> psi_fn;  // (t, s)
    std::function<double(double, double)> phi_fn;

    double epsilon() const { return (3.0 - r + theta) / (4.0 + theta); }
    bool power_law_psi() const { return !psi_fn; }
    bool linear_phi() const { return !phi_fn; }

    double psi(double t, double s) const;
    double phi(double t, double s) const;

    bool stationary() const {
        return delta.is_constant() && xi.is_constant() && gamma.is_constant();
    }

    // Throws std::invalid_argument naming the first violated constraint.
    void validate(int n_modes) const;
    // Extra constraint for the long-run suites: gamma 1_{r=1} < delta^2 lambda_1.
    void validate_stationary(double lambda1) const;
};

std::vector<double> constant_q(int n_modes, double value);

// Largest c with (|a|^{r-1}a - |b|^{r-1}b)(a-b) >= c |a-b|^{r+1}: 2^{1-r}.
double power_law_delta(double r);

// Independent Gaussian modes with standard deviation scale/i; the sampling
// distribution used by all random-field checkers.
Field sample_field(const EigenBasis& basis, std::uint64_t seed, std::uint64_t id,
                   double scale = 1.0);

struct DriftWorkspace {
    std::vector<double> grid, mapped;
    Field coef;
    Field coef2;  // drift output buffer for the steppers
};

// Coefficient i of L Psi(t,x) + Phi(t,x): -lambda_i <Psi(x), e_i> + <Phi(x), e_i>.
void drift_galerkin(const EigenBasis& basis, const ModelSpec& spec, double t,
                    const Field& x, Field& out, DriftWorkspace& ws);
Field drift_galerkin(const EigenBasis& basis, const ModelSpec& spec, double t, const Field& x);

struct ConditionReport13 {
    double min_slack = 0;
    Field worst_x, worst_y;
    double delta_sq_used = 0;
    double gamma_used = 0;
};
// Slack of the monotonicity condition on random pairs, with delta^2 =
// power_law_delta(r); nonnegative slack means the condition holds.
ConditionReport13 check_condition_1_3(const EigenBasis& basis, const ModelSpec& spec,
                                      int n_samples, std::uint64_t seed);

struct ConditionReport14 {
    double xi_sq_used = 0;
    double min_ratio = 0;  // min over samples of lhs/rhs, >= 1 when the bound holds
};
// ||x||_{r+1}^{r+1} >= xi^2 ||x||_Q^{2+theta} ||x||_H^{r-1-theta} with xi^2
// assembled from inf q^2 and lambda_1.
ConditionReport14 check_condition_1_4(const EigenBasis& basis, const ModelSpec& spec,
                                      int n_samples, std::uint64_t seed);

double chain_xi_squared(const EigenBasis& basis, const ModelSpec& spec);

struct VariationalReport {
    double a1_max_rel_jump = 0;  // hemicontinuity proxy on a lambda-grid
    double a2_min_slack = 0;
    double a3_min_slack = 0;
    double a3_f_floor = 0;  // sum q_i^2 / lambda_i
    double a4_min_slack = 0;
    double a4_c_est = 0;
    bool ok = false;
};
VariationalReport check_variational_conditions(const EigenBasis& basis, const ModelSpec& spec,
                                               int n_samples, std::uint64_t seed);

// sup over an s-grid of (|Psi(s)| + |Phi(s) - sigma s|) / (1 + |s|^r).
double growth_envelope_sup(const ModelSpec& spec, double t, double s_max, int n_grid);

} // namespace spme
