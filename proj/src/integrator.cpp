#include "spme/integrator.hpp"

#include "spme/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spme {

void PathConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("run: dt must be > 0");
    if (!(horizon >= 0.0)) throw std::invalid_argument("run: horizon must be >= 0");
    if (horizon > 0.0 && !(dt < horizon + 1e-15))
        throw std::invalid_argument("run: dt must be < horizon");
    if (!(tol_coal > 0.0)) throw std::invalid_argument("run: tol_coal must be > 0");
    if (!(beta_safety >= 1.0)) throw std::invalid_argument("run: beta_safety must be >= 1");
}

std::uint64_t PathConfig::n_steps() const {
    return static_cast<std::uint64_t>(std::llround(horizon / dt));
}

namespace {

std::vector<std::uint64_t> snapshot_steps(const std::vector<double>& times, double dt,
                                          std::uint64_t n_steps) {
    std::vector<std::uint64_t> steps;
    steps.reserve(times.size());
    for (double t : times) {
        const auto s = static_cast<std::uint64_t>(std::llround(t / dt));
        if (s > n_steps) throw std::invalid_argument("snapshot time beyond horizon");
        steps.push_back(s);
    }
    return steps;
}

} // namespace

void em_step_inplace(const EigenBasis& basis, const ModelSpec& spec, Field& a, double t,
                     double dt, bool taming, std::span<const double> noise,
                     DriftWorkspace& ws, double* l2sq) {
    const int n = basis.n_modes;
    drift_galerkin(basis, spec, t, a, ws.coef2, ws);
    double factor = dt;
    if (taming) factor = dt / (1.0 + dt * norm_h(basis, ws.coef2));
    double acc = 0.0;
    if (noise.empty()) {
        for (int i = 0; i < n; ++i) {
            a[i] += ws.coef2[i] * factor;
            acc += a[i] * a[i];
        }
    } else {
        for (int i = 0; i < n; ++i) {
            a[i] += ws.coef2[i] * factor + spec.q_seq[i] * noise[i];
            acc += a[i] * a[i];
        }
    }
    if (l2sq) *l2sq = acc;
}

Field em_step(const EigenBasis& basis, const ModelSpec& spec, const Field& a, double t,
              double dt, const Field& noise, bool taming) {
    if (a.size() != static_cast<std::size_t>(basis.n_modes) || noise.size() != a.size())
        throw std::invalid_argument("em_step: dimension mismatch");
    Field out = a;
    DriftWorkspace ws;
    double l2sq = 0.0;
    em_step_inplace(basis, spec, out, t, dt, taming, noise, ws, &l2sq);
    if (!std::isfinite(l2sq)) throw std::runtime_error("em_step: state overflow");
    return out;
}

PathResult simulate_path(const EigenBasis& basis, const ModelSpec& spec, const Field& x0,
                         const PathConfig& cfg, std::uint64_t path_id,
                         const std::vector<double>& snapshot_times,
                         std::uint64_t trace_stride) {
    cfg.validate();
    const int n = basis.n_modes;
    if (x0.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("simulate_path: x0 size != n_modes");

    const std::uint64_t n_steps = cfg.n_steps();
    const auto snaps = snapshot_steps(snapshot_times, cfg.dt, n_steps);
    const double sq_dt = std::sqrt(cfg.dt);

    PathResult res;
    res.snapshots.resize(snaps.size());
    Field a = x0;
    DriftWorkspace ws;
    std::vector<double> noise(cfg.with_noise ? n : 0);

    auto record = [&](std::uint64_t step) {
        for (std::size_t j = 0; j < snaps.size(); ++j)
            if (snaps[j] == step) res.snapshots[j] = a;
        if (trace_stride > 0 && step % trace_stride == 0) {
            double h2 = 0.0;
            for (int i = 0; i < n; ++i) h2 += a[i] * a[i] / basis.eigenvalues[i];
            res.h2_trace.push_back(h2);
            res.lr1_trace.push_back(
                std::pow(norm_lp(basis, a, spec.r + 1.0), spec.r + 1.0));
        }
    };
    record(0);

    for (std::uint64_t step = 0; step < n_steps; ++step) {
        if (cfg.with_noise) {
            fill_gaussian(cfg.seed, path_id, step, noise);
            for (int i = 0; i < n; ++i) noise[i] *= sq_dt;
        }
        double l2sq = 0.0;
        em_step_inplace(basis, spec, a, step * cfg.dt, cfg.dt, cfg.taming, noise, ws, &l2sq);
        if (!std::isfinite(l2sq)) {
            res.ok = false;
            res.fail_step = step;
            break;
        }
        record(step + 1);
    }
    res.x_final = std::move(a);
    return res;
}

namespace {

template <class Fn>
void for_each_path(int n_paths, ExecPolicy policy, Fn&& body) {
    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(dynamic, 8)
        for (int p = 0; p < n_paths; ++p) body(p);
    } else {
        for (int p = 0; p < n_paths; ++p) body(p);
    }
}

} // namespace

std::vector<PathResult> simulate_ensemble(const EigenBasis& basis, const ModelSpec& spec,
                                          const Field& x0, const PathConfig& cfg, int n_paths,
                                          const std::vector<double>& snapshot_times,
                                          ExecPolicy policy) {
    std::vector<PathResult> out(n_paths);
    for_each_path(n_paths, policy, [&](int p) {
        out[p] = simulate_path(basis, spec, x0, cfg, static_cast<std::uint64_t>(p),
                               snapshot_times);
    });
    return out;
}

double BetaSchedule::operator()(double t) const {
    return c * spec->delta(t) * spec->xi(t) * std::exp(-0.5 * eps * spec->gamma.integral(t));
}

namespace {

// int_{t0}^{t1} f(t) exp(-w * Gamma(t)) dt for piecewise-constant data, exact
// per segment; f is delta*xi or (delta*xi)^2 depending on `squared`.
double weighted_integral(const ModelSpec& spec, double w, double horizon, bool squared) {
    const auto& bp = spec.delta.times;  // shared breakpoints (validated)
    double acc = 0.0, t_prev = 0.0, big_gamma = 0.0;
    std::size_t seg = 0;
    while (t_prev < horizon) {
        const double t_next =
            (seg < bp.size() && bp[seg] < horizon) ? bp[seg] : horizon;
        const double d = spec.delta.values[std::min(seg, spec.delta.values.size() - 1)];
        const double x = spec.xi.values[std::min(seg, spec.xi.values.size() - 1)];
        const double g = spec.gamma.values[std::min(seg, spec.gamma.values.size() - 1)];
        double f = d * x;
        if (squared) f *= f;
        const double len = t_next - t_prev;
        const double wg = w * g;
        double piece;
        if (std::abs(wg) < 1e-14)
            piece = f * std::exp(-w * big_gamma) * len;
        else
            piece = f * std::exp(-w * big_gamma) * (1.0 - std::exp(-wg * len)) / wg;
        acc += piece;
        big_gamma += g * len;
        t_prev = t_next;
        ++seg;
    }
    return acc;
}

} // namespace

double BetaSchedule::integral_beta_sq() const {
    // beta^2 = c^2 (delta xi)^2 exp(-eps int gamma)
    return c * c * weighted_integral(*spec, eps, horizon, true);
}

double BetaSchedule::budget_weighted_integral() const {
    return c * weighted_integral(*spec, eps, horizon, false);
}

BetaSchedule coupling_beta_schedule(const EigenBasis& basis, const ModelSpec& spec,
                                    const Field& x, const Field& y, double horizon) {
    Field diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
    const double dist = norm_h(basis, diff);
    if (dist == 0.0)
        throw std::invalid_argument("coupling_beta_schedule: x = y, coupling unnecessary");

    BetaSchedule sched;
    sched.eps = spec.epsilon();
    sched.horizon = horizon;
    sched.spec = &spec;
    const double denom = weighted_integral(spec, sched.eps, horizon, false);
    sched.c = 2.0 * std::pow(dist, sched.eps) / (sched.eps * denom);

    // Discrete form of the drift-budget hypothesis; exact for the piecewise
    // integrals above, so any violation indicates inconsistent coefficients.
    const double budget = sched.budget_weighted_integral();
    const double need = (2.0 / sched.eps) * std::pow(dist, sched.eps);
    if (budget < need * (1.0 - 1e-9))
        throw std::runtime_error("coupling_beta_schedule: drift budget check failed");
    return sched;
}

Field coupling_drift(const EigenBasis& basis, const Field& diff, double eps, double beta_t) {
    Field out(diff.size(), 0.0);
    const double dist = norm_h(basis, diff);
    if (dist == 0.0) return out;
    const double scale = beta_t / std::pow(dist, eps);
    for (std::size_t i = 0; i < diff.size(); ++i) out[i] = scale * diff[i];
    return out;
}

CoupledOutcome coupled_simulate(const EigenBasis& basis, const ModelSpec& spec, const Field& x,
                                const Field& y, const PathConfig& cfg, std::uint64_t path_id,
                                const std::vector<double>& snapshot_times) {
    cfg.validate();
    const int n = basis.n_modes;
    if (x.size() != static_cast<std::size_t>(n) || y.size() != x.size())
        throw std::invalid_argument("coupled_simulate: dimension mismatch");
    Field d0(n);
    for (int i = 0; i < n; ++i) d0[i] = x[i] - y[i];
    if (norm_h(basis, d0) == 0.0)
        throw std::invalid_argument("coupled_simulate: x = y, coupling unnecessary");

    const BetaSchedule sched = coupling_beta_schedule(basis, spec, x, y, cfg.horizon);
    const double eps = sched.eps;
    const double kappa = cfg.beta_safety;
    const std::uint64_t n_steps = cfg.n_steps();
    const auto snaps = snapshot_steps(snapshot_times, cfg.dt, n_steps);
    const double sq_dt = std::sqrt(cfg.dt);

    CoupledOutcome res;
    res.x_snapshots.resize(snaps.size());
    Field xa = x, ya = y;
    DriftWorkspace wsx, wsy;
    std::vector<double> noise(n, 0.0);
    Field drift_y(n);

    auto record = [&](std::uint64_t step) {
        for (std::size_t j = 0; j < snaps.size(); ++j)
            if (snaps[j] == step) res.x_snapshots[j] = xa;
    };
    record(0);

    for (std::uint64_t step = 0; step < n_steps; ++step) {
        const double t = step * cfg.dt;
        if (cfg.with_noise) {
            fill_gaussian(cfg.seed, path_id, step, noise);
            for (int i = 0; i < n; ++i) noise[i] *= sq_dt;
        }

        if (!res.coalesced) {
            double d_h2 = 0.0, d_q2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = xa[i] - ya[i];
                d_h2 += d * d / basis.eigenvalues[i];
                const double z = d / spec.q_seq[i];
                d_q2 += z * z;
            }
            const double d_h = std::sqrt(d_h2);
            if (d_h <= cfg.tol_coal) {
                res.coalesced = true;
                res.tau = t;
                ya = xa;
            } else {
                const double beta = kappa * sched(t);
                const double dpow = std::pow(d_h, eps);
                // zeta_i = beta (X-Y)_i / (q_i ||X-Y||_H^eps)
                const double zeta_scale = beta / dpow;
                double zdb = 0.0;
                for (int i = 0; i < n; ++i)
                    zdb += zeta_scale * (xa[i] - ya[i]) / spec.q_seq[i] * noise[i];
                res.girsanov_i += zdb;
                res.girsanov_v += zeta_scale * zeta_scale * d_q2 * cfg.dt;
                res.budget_lhs += beta * beta * std::pow(d_q2, (2.0 + spec.theta) / 2.0) /
                                  std::pow(d_h, (2.0 + spec.theta) * eps) * cfg.dt;

                // Coupling displacement, capped near coalescence so a step
                // cannot overshoot past the partner trajectory.
                double cscale = beta / dpow * cfg.dt;
                const double cdisp = cscale * d_h;  // H-norm of the displacement
                if (d_h < 10.0 * cfg.tol_coal && cdisp > d_h) cscale *= d_h / cdisp;
                for (int i = 0; i < n; ++i) drift_y[i] = cscale * (xa[i] - ya[i]);
            }
        }

        double l2x = 0.0;
        em_step_inplace(basis, spec, xa, t, cfg.dt, cfg.taming, noise, wsx, &l2x);
        if (res.coalesced) {
            ya = xa;
        } else {
            double l2y = 0.0;
            em_step_inplace(basis, spec, ya, t, cfg.dt, cfg.taming, noise, wsy, &l2y);
            for (int i = 0; i < n; ++i) ya[i] += drift_y[i];
            if (!std::isfinite(l2y)) {
                res.ok = false;
                res.fail_step = step;
                break;
            }
            double d_h2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = xa[i] - ya[i];
                d_h2 += d * d / basis.eigenvalues[i];
            }
            if (std::sqrt(d_h2) <= cfg.tol_coal) {
                res.coalesced = true;
                res.tau = (step + 1) * cfg.dt;
                ya = xa;
            }
        }
        if (!std::isfinite(l2x)) {
            res.ok = false;
            res.fail_step = step;
            break;
        }
        record(step + 1);
    }
    res.x_final = std::move(xa);
    res.y_final = std::move(ya);
    return res;
}

std::vector<CoupledOutcome> coupled_ensemble(const EigenBasis& basis, const ModelSpec& spec,
                                             const Field& x, const Field& y,
                                             const PathConfig& cfg, int n_paths,
                                             const std::vector<double>& snapshot_times,
                                             ExecPolicy policy) {
    std::vector<CoupledOutcome> out(n_paths);
    for_each_path(n_paths, policy, [&](int p) {
        out[p] = coupled_simulate(basis, spec, x, y, cfg, static_cast<std::uint64_t>(p),
                                  snapshot_times);
    });
    return out;
}

} // namespace spme
