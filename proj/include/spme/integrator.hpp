#pragma once

// Time discretization: tamed explicit Euler-Maruyama for single paths and for
// the coupled pair, Girsanov log-weight accumulation, coalescence handling.
//
// Ensemble drivers come in two flavours sharing one per-path kernel: a plain
// serial loop (the reference used by the tests) and an OpenMP loop over
// paths.  Per-path noise is counter-based, so both produce bit-identical
// results; tools/bench_paths.cpp compares their throughput.

#include "spme/basis.hpp"
#include "spme/model.hpp"

#include <cstdint>
#include <vector>

namespace spme {

enum class ExecPolicy { serial, openmp };

struct PathConfig {
    double horizon = 1.0;
    double dt = 1e-4;
    std::uint64_t seed = 1;
    bool taming = true;
    double tol_coal = 1e-6;    // coalescence threshold in H-norm
    double beta_safety = 1.05; // kappa >= 1, multiplier on beta_t
    bool with_noise = true;    // false = deterministic skeleton

    void validate() const;  // throws std::invalid_argument, names the field
    std::uint64_t n_steps() const;
};

// One tamed EM step; noise holds N(0, dt) increments dB_i, one per mode.
// Writes sum a_i^2 of the updated state into *l2sq when non-null (cheap
// overflow probe for the drivers).
void em_step_inplace(const EigenBasis& basis, const ModelSpec& spec, Field& a, double t,
                     double dt, bool taming, std::span<const double> noise,
                     DriftWorkspace& ws, double* l2sq = nullptr);
Field em_step(const EigenBasis& basis, const ModelSpec& spec, const Field& a, double t,
              double dt, const Field& noise, bool taming = true);

struct PathResult {
    Field x_final;
    bool ok = true;
    std::uint64_t fail_step = 0;
    std::vector<Field> snapshots;           // states at requested times
    std::vector<double> h2_trace;           // ||X_t||_H^2, when trace_stride > 0
    std::vector<double> lr1_trace;          // ||X_t||_{r+1}^{r+1}
};

PathResult simulate_path(const EigenBasis& basis, const ModelSpec& spec, const Field& x0,
                         const PathConfig& cfg, std::uint64_t path_id,
                         const std::vector<double>& snapshot_times = {},
                         std::uint64_t trace_stride = 0);

std::vector<PathResult> simulate_ensemble(const EigenBasis& basis, const ModelSpec& spec,
                                          const Field& x0, const PathConfig& cfg, int n_paths,
                                          const std::vector<double>& snapshot_times = {},
                                          ExecPolicy policy = ExecPolicy::openmp);

// beta_t = c delta_t xi_t exp(-(eps/2) int_0^t gamma), with c chosen so the
// drift budget int beta exp(-(eps/2) int gamma) dt equals (2/eps) ||x-y||_H^eps.
struct BetaSchedule {
    double c = 0;
    double eps = 0;
    double horizon = 0;
    const ModelSpec* spec = nullptr;

    double operator()(double t) const;
    double integral_beta_sq() const;               // int_0^T beta^2, exact piecewise
    double budget_weighted_integral() const;       // int_0^T beta e^{-(eps/2) int gamma}
};

BetaSchedule coupling_beta_schedule(const EigenBasis& basis, const ModelSpec& spec,
                                    const Field& x, const Field& y, double horizon);

// beta_t * diff / ||diff||_H^eps; the zero field when diff = 0.
Field coupling_drift(const EigenBasis& basis, const Field& diff, double eps, double beta_t);

struct CoupledOutcome {
    Field x_final, y_final;
    bool ok = true;
    std::uint64_t fail_step = 0;
    bool coalesced = false;
    double tau = -1.0;
    double girsanov_i = 0;   // running sum <zeta, dB>
    double girsanov_v = 0;   // running sum ||zeta||_2^2 dt
    double budget_lhs = 0;   // sum beta^2 ||D||_Q^{2+theta} / ||D||_H^{(2+theta) eps} dt
    std::vector<Field> x_snapshots;

    double log_r() const { return girsanov_i - 0.5 * girsanov_v; }
};

// Both marginals share the per-mode noise; Y gets the extra coupling drift
// with strength kappa * beta_t until the H-distance drops below tol_coal,
// after which the trajectories are glued and the accumulators freeze.
CoupledOutcome coupled_simulate(const EigenBasis& basis, const ModelSpec& spec, const Field& x,
                                const Field& y, const PathConfig& cfg, std::uint64_t path_id,
                                const std::vector<double>& snapshot_times = {});

std::vector<CoupledOutcome> coupled_ensemble(const EigenBasis& basis, const ModelSpec& spec,
                                             const Field& x, const Field& y,
                                             const PathConfig& cfg, int n_paths,
                                             const std::vector<double>& snapshot_times = {},
                                             ExecPolicy policy = ExecPolicy::openmp);

} // namespace spme
