#include "spme/ergodics.hpp"

#include "spme/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spme {

InvariantSampleSet sample_invariant(const EigenBasis& basis, const ModelSpec& spec,
                                    const PathConfig& cfg, int n_samples, double burn_in,
                                    double thinning) {
    spec.validate(basis.n_modes);
    spec.validate_stationary(basis.lambda1());
    if (n_samples < 1) throw std::invalid_argument("sample_invariant: n_samples must be >= 1");
    if (!(thinning > 0.0)) throw std::invalid_argument("sample_invariant: thinning must be > 0");

    const int n = basis.n_modes;
    const auto burn_steps = static_cast<std::uint64_t>(std::llround(burn_in / cfg.dt));
    const auto thin_steps = static_cast<std::uint64_t>(std::llround(thinning / cfg.dt));
    if (thin_steps == 0) throw std::invalid_argument("sample_invariant: thinning below dt");

    InvariantSampleSet set;
    set.burn_in = burn_in;
    set.thinning = thinning;
    set.seed = cfg.seed;
    set.samples.reserve(n_samples);
    {
        std::ostringstream os;
        os << "kind=" << to_string(basis.kind) << " n_modes=" << n << " r=" << spec.r
           << " dt=" << cfg.dt << " seed=" << cfg.seed;
        set.provenance = os.str();
    }

    Field a(n, 0.0);
    DriftWorkspace ws;
    std::vector<double> noise(n);
    const double sq_dt = std::sqrt(cfg.dt);
    const std::uint64_t total = burn_steps + thin_steps * static_cast<std::uint64_t>(n_samples);
    for (std::uint64_t step = 0; step < total; ++step) {
        fill_gaussian(cfg.seed, 0, step, noise);
        for (int i = 0; i < n; ++i) noise[i] *= sq_dt;
        double l2sq = 0.0;
        em_step_inplace(basis, spec, a, step * cfg.dt, cfg.dt, cfg.taming, noise, ws, &l2sq);
        if (!std::isfinite(l2sq))
            throw std::runtime_error("sample_invariant: chain blow-up at step " +
                                     std::to_string(step));
        if (step >= burn_steps && (step + 1 - burn_steps) % thin_steps == 0)
            set.samples.push_back(a);
    }
    return set;
}

void save_samples(const std::string& path, const InvariantSampleSet& set) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_samples: cannot open " + path);
    os << "# provenance: " << set.provenance << "\n";
    os << "# seed: " << set.seed << "\n";
    os << "# burn_in: " << set.burn_in << "\n";
    os << "# thinning: " << set.thinning << "\n";
    const std::size_t n = set.samples.empty() ? 0 : set.samples.front().size();
    for (std::size_t i = 0; i < n; ++i) os << (i ? "," : "") << "a_" << (i + 1);
    os << "\n";
    char buf[40];
    for (const auto& s : set.samples) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", s[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
}

InvariantSampleSet load_samples(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_samples: cannot open " + path);
    InvariantSampleSet set;
    std::string line;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find(':');
            if (pos != std::string::npos) {
                const std::string key = line.substr(2, pos - 2);
                const std::string val = line.substr(pos + 1);
                if (key == "provenance") set.provenance = val.substr(val.find_first_not_of(' '));
                if (key == "seed") set.seed = std::stoull(val);
                if (key == "burn_in") set.burn_in = std::stod(val);
                if (key == "thinning") set.thinning = std::stod(val);
            }
            continue;
        }
        if (!header_done) {  // column header
            header_done = true;
            continue;
        }
        Field row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        set.samples.push_back(std::move(row));
    }
    return set;
}

namespace {

struct MeanSe {
    double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
    return r;
}

} // namespace

MomentReport moment_report(const EigenBasis& basis, const InvariantSampleSet& set,
                           const ModelSpec& spec, const std::vector<double>& eps0_grid,
                           std::size_t first, std::size_t count) {
    if (set.samples.empty()) throw std::invalid_argument("moment_report: empty sample set");
    const std::size_t end =
        count == 0 ? set.samples.size() : std::min(first + count, set.samples.size());
    std::vector<double> lr1, h2, hpow;
    for (std::size_t s = first; s < end; ++s) {
        const auto& z = set.samples[s];
        lr1.push_back(std::pow(norm_lp(basis, z, spec.r + 1.0), spec.r + 1.0));
        const double h = norm_h(basis, z);
        h2.push_back(h * h);
        hpow.push_back(std::pow(h, spec.r + 1.0));
    }
    MomentReport rep;
    const MeanSe m1 = mean_se(lr1);
    rep.lr1_moment = m1.mean;
    rep.lr1_moment_se = m1.se;
    const MeanSe m2 = mean_se(h2);
    rep.h2_moment = m2.mean;
    rep.h2_moment_se = m2.se;
    for (double eps0 : eps0_grid) {
        std::vector<double> v(hpow.size());
        for (std::size_t i = 0; i < hpow.size(); ++i) v[i] = std::exp(eps0 * hpow[i]);
        const MeanSe m = mean_se(v);
        rep.rows.push_back({eps0, m.mean, m.se});
    }
    return rep;
}

ModeStats per_mode_stats(const InvariantSampleSet& set) {
    if (set.samples.empty()) throw std::invalid_argument("per_mode_stats: empty sample set");
    const std::size_t n = set.samples.front().size();
    ModeStats st;
    st.mean.resize(n);
    st.mean_se.resize(n);
    st.var.resize(n);
    st.var_se.resize(n);
    std::vector<double> col(set.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < set.samples.size(); ++s) col[s] = set.samples[s][i];
        const MeanSe m = mean_se(col);
        st.mean[i] = m.mean;
        st.mean_se[i] = m.se;
        std::vector<double> sq(col.size());
        for (std::size_t s = 0; s < col.size(); ++s)
            sq[s] = (col[s] - m.mean) * (col[s] - m.mean);
        const MeanSe v = mean_se(sq);
        st.var[i] = v.mean;
        st.var_se[i] = v.se;
    }
    return st;
}

double contraction_envelope(double u0, double t, double r, double theta_tilde) {
    if (u0 <= 0.0) return 0.0;
    if (r == 1.0) return u0 * std::exp(-theta_tilde * t);
    const double p = (r - 1.0) / 2.0;  // u' = -theta u^{1+p}
    return std::pow(std::pow(u0, -p) + theta_tilde * p * t, -1.0 / p);
}

ContractionResult contraction_check(const EigenBasis& basis, const ModelSpec& spec,
                                    const Field& x, const Field& y, const PathConfig& cfg,
                                    std::uint64_t trace_stride) {
    cfg.validate();
    if (spec.gamma(0.0) > 0.0 || spec.gamma.min_value() > 0.0)
        throw std::invalid_argument("contraction_check: needs gamma <= 0");
    const int n = basis.n_modes;
    const std::uint64_t n_steps = cfg.n_steps();
    const double sq_dt = std::sqrt(cfg.dt);

    Field xa = x, ya = y;
    DriftWorkspace wsx, wsy;
    std::vector<double> noise(n);

    const double d2 = spec.delta(0.0) * spec.delta(0.0);
    const double theta_tilde = d2 * std::pow(basis.lambda1(), (spec.r - 1.0) / 2.0);

    ContractionResult res;
    auto dist = [&]() {
        double h2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = xa[i] - ya[i];
            h2 += d * d / basis.eigenvalues[i];
        }
        return std::sqrt(h2);
    };
    const double u0 = dist() * dist();
    double prev = std::sqrt(u0);
    res.times.push_back(0.0);
    res.dist_h.push_back(prev);
    res.envelope.push_back(std::sqrt(u0));
    res.monotone_ok = true;
    res.envelope_ok = true;

    for (std::uint64_t step = 0; step < n_steps; ++step) {
        if (cfg.with_noise) {
            fill_gaussian(cfg.seed, 0, step, noise);
            for (int i = 0; i < n; ++i) noise[i] *= sq_dt;
        } else {
            std::fill(noise.begin(), noise.end(), 0.0);
        }
        const double t = step * cfg.dt;
        em_step_inplace(basis, spec, xa, t, cfg.dt, cfg.taming, noise, wsx);
        em_step_inplace(basis, spec, ya, t, cfg.dt, cfg.taming, noise, wsy);
        const double d = dist();
        if (prev > 0.0) {
            const double rel = (d - prev) / prev;
            res.max_rel_increase = std::max(res.max_rel_increase, rel);
            if (rel > 1e-8) res.monotone_ok = false;
        }
        prev = d;
        if ((step + 1) % trace_stride == 0 || step + 1 == n_steps) {
            const double tt = (step + 1) * cfg.dt;
            const double env = contraction_envelope(u0, tt, spec.r, theta_tilde);
            res.times.push_back(tt);
            res.dist_h.push_back(d);
            res.envelope.push_back(std::sqrt(env));
            if (d * d > env * (1.0 + 1e-6) + 1e-300) res.envelope_ok = false;
        }
    }
    return res;
}

namespace {

// sup_{u >= 0} [ c t^{-pt} (u+1)^{pd} - eps0 u^{r+1} ] by golden-section search;
// the objective is unimodal (concave difference of powers with pd < r+1).
double assemble_sup_exponent(double c_hat, double t, double p_time, double p_dist, double eps0,
                             double r) {
    auto obj = [&](double u) {
        return c_hat * std::pow(u + 1.0, p_dist) / std::pow(t, p_time) -
               eps0 * std::pow(u, r + 1.0);
    };
    double lo = 0.0, hi = 1.0;
    while (obj(hi * 2.0) > obj(hi) && hi < 1e8) hi *= 2.0;
    hi *= 2.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = obj(x1), f2 = obj(x2);
    for (int it = 0; it < 200 && b - a > 1e-10 * (1.0 + b); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = obj(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = obj(x1);
        }
    }
    return obj(0.5 * (a + b));
}

} // namespace

UltraProbeResult ultracontractivity_probe(const EigenBasis& basis, const ModelSpec& spec,
                                          const InvariantSampleSet& mu, double eps0,
                                          const std::vector<double>& t_grid,
                                          const std::vector<double>& x_radii, int n_paths,
                                          const PathConfig& cfg, ExecPolicy policy) {
    if (!(spec.r > 1.0))
        throw std::invalid_argument("ultracontractivity_probe: needs r > 1");
    if (mu.samples.empty())
        throw std::invalid_argument("ultracontractivity_probe: empty sample set");

    UltraProbeResult res;
    res.eps0_hat = eps0;

    // Normalize f so that mu(f^2) = 1 against the sample set.
    std::vector<double> hpow;
    hpow.reserve(mu.samples.size());
    int in_ball = 0;
    for (const auto& z : mu.samples) {
        const double h = norm_h(basis, z);
        hpow.push_back(std::pow(h, spec.r + 1.0));
        if (h <= 1.0) ++in_ball;
    }
    double m2 = 0.0;
    for (double h : hpow) m2 += std::exp(eps0 * h);
    m2 /= hpow.size();
    res.exp_moment_hat = m2;
    res.mu_ball_mass = static_cast<double>(in_ball) / mu.samples.size();
    const double f_norm = std::sqrt(m2);

    auto f = [&](const Field& z) {
        return std::exp(0.5 * eps0 * std::pow(norm_h(basis, z), spec.r + 1.0)) / f_norm;
    };

    const double p_time = (4.0 + spec.theta) / (2.0 + spec.theta);
    const double p_dist = harnack_distance_exponent(spec);
    const double t_max = *std::max_element(t_grid.begin(), t_grid.end());

    // One ensemble per grid point x, snapshots at every t in the grid.
    std::vector<std::vector<double>> p2(t_grid.size(), std::vector<double>(x_radii.size(), 0.0));
    for (std::size_t xi = 0; xi < x_radii.size(); ++xi) {
        Field x0(basis.n_modes, 0.0);
        x0[0] = std::sqrt(basis.lambda1()) * x_radii[xi];
        PathConfig c = cfg;
        c.horizon = t_max;
        c.seed = derive_seed(cfg.seed, 0x40 + xi);
        const auto ens = simulate_ensemble(basis, spec, x0, c, n_paths, t_grid, policy);
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
            double mean = 0.0;
            int n_ok = 0;
            for (const auto& p : ens)
                if (p.ok) {
                    mean += f(p.snapshots[ti]);
                    ++n_ok;
                }
            p2[ti][xi] = n_ok ? (mean / n_ok) * (mean / n_ok) : 0.0;
        }
    }

    // Fit the pointwise-bound constant: smallest c_hat dominating all (t, x).
    const double ball = std::max(res.mu_ball_mass, 1.0 / mu.samples.size());
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti)
        for (std::size_t xi = 0; xi < x_radii.size(); ++xi) {
            const double val = std::log(std::max(p2[ti][xi] * ball, 1e-300));
            const double c = val * std::pow(t_grid[ti], p_time) /
                             std::pow(x_radii[xi] + 1.0, p_dist);
            res.c_hat = std::max(res.c_hat, c);
        }
    if (res.c_hat <= 0.0) res.c_hat = 1e-3;

    // Assemble the moment-backed sup bound and record the per-t table.
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        UltraProbeRow row;
        row.t = t_grid[ti];
        row.sup_p2 = *std::max_element(p2[ti].begin(), p2[ti].end());
        const double expo =
            assemble_sup_exponent(res.c_hat, row.t, p_time, p_dist, eps0, spec.r);
        row.assembled = m2 / ball * std::exp(expo);
        res.rows.push_back(row);
    }

    // Fit a * exp(b t^{-s}) to the assembled curve: scan s, linear LS in
    // (log a, b) given s.
    double best_sse = std::numeric_limits<double>::infinity();
    for (double s = 0.5; s <= 8.0 + 1e-9; s += 0.005) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int n = static_cast<int>(res.rows.size());
        for (const auto& row : res.rows) {
            const double xv = std::pow(row.t, -s);
            const double yv = std::log(row.assembled);
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
        }
        const double det = n * sxx - sx * sx;
        if (std::abs(det) < 1e-30) continue;
        const double b = (n * sxy - sx * sy) / det;
        const double loga = (sy - b * sx) / n;
        double sse = 0;
        for (const auto& row : res.rows) {
            const double pred = loga + b * std::pow(row.t, -s);
            const double err = pred - std::log(row.assembled);
            sse += err * err;
        }
        if (sse < best_sse) {
            best_sse = sse;
            res.fit_a = std::exp(loga);
            res.fit_b = b;
            res.fit_s = s;
        }
    }
    res.fit_rms = std::sqrt(best_sse / res.rows.size());
    res.fit_ok = std::isfinite(best_sse);
    return res;
}

} // namespace spme
