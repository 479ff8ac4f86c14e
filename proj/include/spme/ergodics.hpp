#pragma once

// Long-run behavior: invariant-measure sampling along one thinned chain,
// moment and concentration estimates, synchronous-coupling contraction
// diagnostics, and the ultracontractivity shape probe.

#include "spme/basis.hpp"
#include "spme/integrator.hpp"
#include "spme/model.hpp"

#include <string>
#include <vector>

namespace spme {

struct InvariantSampleSet {
    std::vector<Field> samples;
    double burn_in = 0;
    double thinning = 0;
    std::uint64_t seed = 0;
    std::string provenance;  // config echo
};

// Single trajectory from 0 with burn-in and thinning; throws on blow-up.
InvariantSampleSet sample_invariant(const EigenBasis& basis, const ModelSpec& spec,
                                    const PathConfig& cfg, int n_samples, double burn_in,
                                    double thinning);

void save_samples(const std::string& path, const InvariantSampleSet& set);
InvariantSampleSet load_samples(const std::string& path);

struct MomentRow {
    double eps0 = 0;
    double exp_moment = 0, exp_moment_se = 0;  // mean of e^{eps0 ||.||_H^{r+1}}
};
struct MomentReport {
    double lr1_moment = 0, lr1_moment_se = 0;  // mean of ||.||_{r+1}^{r+1}
    double h2_moment = 0, h2_moment_se = 0;
    std::vector<MomentRow> rows;
};
MomentReport moment_report(const EigenBasis& basis, const InvariantSampleSet& set,
                           const ModelSpec& spec, const std::vector<double>& eps0_grid,
                           std::size_t first = 0, std::size_t count = 0);

// Per-mode mean and second moment across the sample set.
struct ModeStats {
    std::vector<double> mean, mean_se, var, var_se;
};
ModeStats per_mode_stats(const InvariantSampleSet& set);

struct ContractionResult {
    std::vector<double> times;
    std::vector<double> dist_h;     // ||X_t(x) - X_t(y)||_H
    std::vector<double> envelope;   // sqrt of the scalar comparison solution
    bool monotone_ok = false;       // nonincreasing per step, 1e-8 relative
    bool envelope_ok = false;
    double max_rel_increase = 0;
};
// Synchronous coupling (shared noise, no extra drift); requires gamma <= 0.
ContractionResult contraction_check(const EigenBasis& basis, const ModelSpec& spec,
                                    const Field& x, const Field& y, const PathConfig& cfg,
                                    std::uint64_t trace_stride = 1);

// Scalar comparison envelope u(t) for ||D_t||_H^2: u' = -theta_tilde u^{(r+1)/2}
// with theta_tilde = delta^2 lambda_1^{(r-1)/2}.
double contraction_envelope(double u0, double t, double r, double theta_tilde);

struct UltraProbeRow {
    double t = 0;
    double sup_p2 = 0;       // max over the x-grid of (P_t f)^2
    double assembled = 0;    // moment-assembled sup bound at this t
};
struct UltraProbeResult {
    std::vector<UltraProbeRow> rows;
    double c_hat = 0;        // fitted constant of the pointwise bound
    double eps0_hat = 0;
    double exp_moment_hat = 0;
    double mu_ball_mass = 0; // empirical mu(||.||_H <= 1)
    double fit_a = 0, fit_b = 0, fit_s = 0;  // a * exp(b t^{-s}) fit
    double fit_rms = 0;
    bool fit_ok = false;
};
// f is e^{(eps0/2) ||z||_H^{r+1}} normalized to mu(f^2) = 1 against the
// sample set; (P_t f)(x) estimated by Monte Carlo on a (t, x) grid.
UltraProbeResult ultracontractivity_probe(const EigenBasis& basis, const ModelSpec& spec,
                                          const InvariantSampleSet& mu, double eps0,
                                          const std::vector<double>& t_grid,
                                          const std::vector<double>& x_radii, int n_paths,
                                          const PathConfig& cfg,
                                          ExecPolicy policy = ExecPolicy::openmp);

} // namespace spme
