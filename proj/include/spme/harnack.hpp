#pragma once

// Explicit Harnack constants and the Monte Carlo verification battery: the
// two-point inequality itself, the Girsanov reweighting identity, the strong
// Feller probe E|R - 1|, and the invariant-density L^p bound evaluator.

#include "spme/basis.hpp"
#include "spme/integrator.hpp"
#include "spme/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spme {

using Functional = std::function<double(const EigenBasis&, const Field&)>;

struct NamedFunctional {
    std::string name;
    Functional fn;
};

// Bounded positive defaults: 1/(1+||z||_H^2) and exp(-||z||_H).
std::vector<NamedFunctional> harnack_default_functionals();

// c(theta,t): the constant multiplying ||x-y||_H^{2(3-r+theta)/(2+theta)}
// (after the alpha/(alpha-1) factor) in the two-point inequality.  Piecewise
// coefficient integrals are evaluated exactly.
double harnack_constant(const ModelSpec& spec, double t);

// Exponent of ||x-y||_H in the inequality: 2(3-r+theta)/(2+theta).
double harnack_distance_exponent(const ModelSpec& spec);

struct StationaryConstant {
    double c_theta = 0;      // 2(4+theta)/(3-r+theta) * (xi delta)^{-4/(2+theta)}
    double bracket = 0;      // (1/gamma)(1 - e^{-eps gamma t}), -> eps t as gamma -> 0
    double bracket_pow = 0;  // bracket^{(4+theta)/(2+theta)}
    // Full exponent -alpha c(theta) d^{2(3-r+theta)/(2+theta)} / bracket_pow.
    double exponent(double alpha, double dist_h, const ModelSpec& spec) const;
};
// Time-homogeneous decomposition c(theta,t) = c_theta / bracket_pow.
StationaryConstant harnack_constant_stationary(const ModelSpec& spec, double t);

struct HarnackReport {
    std::string f_name;
    double alpha = 0, t = 0, dist_h = 0;
    double constant = 0;       // c(theta,t)
    double lhs = 0, rhs = 0;   // (P_t F(y))^alpha and P_t F^alpha(x) * exp factor
    double se_lhs = 0, se_rhs = 0;
    double p_f_y = 0, p_fa_x = 0;  // raw Monte Carlo means
    bool holds = false;            // lhs <= rhs + 3 * combined SE
};

// One-sided Monte Carlo test of the inequality for every combination of
// (t in t_list, F in fns, alpha in alphas); the two ensembles run on
// independent noise streams.  x = y degenerates to the Jensen case.
std::vector<HarnackReport> verify_harnack_mc(const EigenBasis& basis, const ModelSpec& spec,
                                             const std::vector<NamedFunctional>& fns,
                                             const std::vector<double>& alphas, const Field& x,
                                             const Field& y, const std::vector<double>& t_list,
                                             int n_paths, const PathConfig& cfg,
                                             ExecPolicy policy = ExecPolicy::openmp);

struct GirsanovReport {
    double reweighted = 0, se_reweighted = 0;  // E[R F(X_T)] over coupled pairs
    double direct = 0, se_direct = 0;          // E[F(X_T(y))] over plain paths
    double z_score = 0;
    double mean_r = 0, se_r = 0;               // normalization E R
    double ess = 0;                            // effective sample size of the weights
    bool low_ess = false;                      // ess < 100
    double coalesced_fraction = 0;
};
GirsanovReport girsanov_consistency(const EigenBasis& basis, const ModelSpec& spec,
                                    const Field& x, const Field& y, const Functional& f,
                                    double horizon, int n_paths, const PathConfig& cfg,
                                    ExecPolicy policy = ExecPolicy::openmp);

struct FellerPoint {
    double radius = 0;
    double mean_abs = 0, se = 0;  // E|R-1|
    double envelope = 0;          // sqrt(E R^2 bound - 1) from the moment bound
};
// y = x + rho * e_1 / ||e_1||_H for each radius, largest first.
std::vector<FellerPoint> strong_feller_probe(const EigenBasis& basis, const ModelSpec& spec,
                                             const Field& x, const std::vector<double>& radii,
                                             double horizon, int n_paths, const PathConfig& cfg,
                                             ExecPolicy policy = ExecPolicy::openmp);

// Closed-form bound on E R^{alpha'} for the coupled pair started at distance
// dist_h (includes the beta_safety factor kappa^2).
double girsanov_moment_bound(const EigenBasis& basis, const ModelSpec& spec, double dist_h,
                             double horizon, double alpha_prime, double kappa);

struct DensityBound {
    double bound = 0, se = 0;
    double mean_integrand = 0;
    int n_used = 0;
};
// Monte Carlo evaluation over invariant-measure samples of the upper bound
// on the transition density norm; alpha > 1.
DensityBound density_lp_bound(const EigenBasis& basis, const ModelSpec& spec,
                              const std::vector<Field>& mu_samples, const Field& x, double t,
                              double alpha);

} // namespace spme
