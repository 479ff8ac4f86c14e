#include "spme/model.hpp"

#include "spme/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spme {

double PiecewiseConstant::operator()(double t) const {
    std::size_t i = 0;
    while (i < times.size() && t >= times[i]) ++i;
    return values[i];
}

double PiecewiseConstant::integral(double t) const {
    double acc = 0.0, prev = 0.0;
    std::size_t i = 0;
    for (; i < times.size() && times[i] < t; ++i) {
        acc += values[i] * (times[i] - prev);
        prev = times[i];
    }
    return acc + values[i] * (t - prev);
}

double PiecewiseConstant::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

double ModelSpec::psi(double t, double s) const {
    if (psi_fn) return psi_fn(t, s);
    return std::pow(std::abs(s), r - 1.0) * s;
}

double ModelSpec::phi(double t, double s) const {
    if (phi_fn) return phi_fn(t, s);
    return gamma(t) * s;
}

void ModelSpec::validate(int n_modes) const {
    if (!(r >= 1.0)) throw std::invalid_argument("model: r must be >= 1");
    if (!(theta >= 0.0)) throw std::invalid_argument("model: theta must be >= 0");
    if (!(theta > r - 3.0)) throw std::invalid_argument("model: theta must exceed r - 3");
    if (!(theta <= r - 1.0 + 1e-12))
        throw std::invalid_argument("model: theta must be <= r - 1");
    const double eps = epsilon();
    if (!(eps > 0.0 && eps <= 0.5))
        throw std::invalid_argument("model: epsilon = (3-r+theta)/(4+theta) must lie in (0, 1/2]");
    if (!(delta.min_value() > 0.0)) throw std::invalid_argument("model: delta_t must be > 0");
    if (!(xi.min_value() > 0.0)) throw std::invalid_argument("model: xi_t must be > 0");
    if (static_cast<int>(q_seq.size()) != n_modes)
        throw std::invalid_argument("model: q_seq size != n_modes");
    for (double q : q_seq)
        if (q == 0.0 || !std::isfinite(q))
            throw std::invalid_argument("model: q_i must be finite and nonzero");
    if (delta.times != xi.times || delta.times != gamma.times) {
        // Different breakpoint grids are allowed in principle, but all exact
        // piecewise integrals below assume one shared grid.
        if (!(delta.is_constant() && xi.is_constant() && gamma.is_constant()))
            throw std::invalid_argument("model: delta, xi, gamma must share breakpoints");
    }
}

void ModelSpec::validate_stationary(double lambda1) const {
    if (!stationary())
        throw std::invalid_argument("model: stationary suite needs constant delta, xi, gamma");
    const double d2 = delta(0.0) * delta(0.0);
    if (r == 1.0 && !(gamma(0.0) < d2 * lambda1))
        throw std::invalid_argument("model: stationary suite needs gamma < delta^2 lambda_1 at r=1");
}

std::vector<double> constant_q(int n_modes, double value) {
    return std::vector<double>(static_cast<std::size_t>(n_modes), value);
}

double power_law_delta(double r) { return std::exp2(1.0 - r); }

Field sample_field(const EigenBasis& basis, std::uint64_t seed, std::uint64_t id, double scale) {
    Field x(basis.n_modes);
    fill_gaussian(seed, id, 0, x);
    for (int i = 0; i < basis.n_modes; ++i) x[i] *= scale / (i + 1);
    return x;
}

void drift_galerkin(const EigenBasis& basis, const ModelSpec& spec, double t,
                    const Field& x, Field& out, DriftWorkspace& ws) {
    const int n = basis.n_modes, m = basis.n_quad;
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument("drift_galerkin: field size != n_modes");
    ws.grid.resize(m);
    ws.mapped.resize(m);
    ws.coef.resize(n);
    out.resize(n);

    synthesize(basis, x, ws.grid);
    for (int k = 0; k < m; ++k) ws.mapped[k] = spec.psi(t, ws.grid[k]);
    analyze(basis, ws.mapped, ws.coef);
    for (int i = 0; i < n; ++i) out[i] = -basis.eigenvalues[i] * ws.coef[i];

    if (spec.linear_phi()) {
        const double g = spec.gamma(t);
        if (g != 0.0)
            for (int i = 0; i < n; ++i) out[i] += g * x[i];
    } else {
        for (int k = 0; k < m; ++k) ws.mapped[k] = spec.phi(t, ws.grid[k]);
        analyze(basis, ws.mapped, ws.coef);
        for (int i = 0; i < n; ++i) out[i] += ws.coef[i];
    }
}

Field drift_galerkin(const EigenBasis& basis, const ModelSpec& spec, double t, const Field& x) {
    Field out;
    DriftWorkspace ws;
    drift_galerkin(basis, spec, t, x, out, ws);
    return out;
}

namespace {

// <Phi(x) - Phi(y), L^{-1}(x - y)> in L^2(m); L^{-1} e_i = -e_i / lambda_i.
double phi_pairing(const EigenBasis& basis, const ModelSpec& spec, double t,
                   const Field& x, const Field& y,
                   std::span<const double> gx, std::span<const double> gy) {
    const int n = basis.n_modes;
    if (spec.linear_phi()) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = x[i] - y[i];
            s += d * d / basis.eigenvalues[i];
        }
        return -spec.gamma(t) * s;
    }
    std::vector<double> dphi(basis.n_quad);
    for (int k = 0; k < basis.n_quad; ++k)
        dphi[k] = spec.phi(t, gx[k]) - spec.phi(t, gy[k]);
    Field c(n);
    analyze(basis, dphi, c);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += -c[i] * (x[i] - y[i]) / basis.eigenvalues[i];
    return s;
}

} // namespace

ConditionReport13 check_condition_1_3(const EigenBasis& basis, const ModelSpec& spec,
                                      int n_samples, std::uint64_t seed) {
    if (!spec.power_law_psi())
        throw std::invalid_argument("check_condition_1_3: needs the default power-law psi");
    const double t = 0.0;
    ConditionReport13 rep;
    rep.delta_sq_used = power_law_delta(spec.r);
    rep.gamma_used = spec.gamma(t);
    rep.min_slack = std::numeric_limits<double>::infinity();

    const int m = basis.n_quad;
    std::vector<double> gx(m), gy(m);
    for (int s = 0; s < n_samples; ++s) {
        Field x = sample_field(basis, seed, 2 * static_cast<std::uint64_t>(s));
        Field y = sample_field(basis, seed, 2 * static_cast<std::uint64_t>(s) + 1);
        synthesize(basis, x, gx);
        synthesize(basis, y, gy);

        double psi_term = 0.0, diff_rp1 = 0.0;
        for (int k = 0; k < m; ++k) {
            const double d = gx[k] - gy[k];
            psi_term += basis.quad_weights[k] * (spec.psi(t, gx[k]) - spec.psi(t, gy[k])) * (-d);
            diff_rp1 += basis.quad_weights[k] * std::pow(std::abs(d), spec.r + 1.0);
        }
        const double lhs = 2.0 * psi_term - 2.0 * phi_pairing(basis, spec, t, x, y, gx, gy);
        double h2 = 0.0;
        for (int i = 0; i < basis.n_modes; ++i) {
            const double d = x[i] - y[i];
            h2 += d * d / basis.eigenvalues[i];
        }
        const double rhs = -rep.delta_sq_used * diff_rp1 + rep.gamma_used * h2;
        const double slack = rhs - lhs;
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst_x = x;
            rep.worst_y = y;
        }
    }
    return rep;
}

double chain_xi_squared(const EigenBasis& basis, const ModelSpec& spec) {
    double qmin2 = std::numeric_limits<double>::infinity();
    for (double q : spec.q_seq) qmin2 = std::min(qmin2, q * q);
    if (!(qmin2 > 0.0)) throw std::invalid_argument("chain_xi_squared: inf q_i^2 must be > 0");
    return std::pow(qmin2, (2.0 + spec.theta) / 2.0) *
           std::pow(basis.lambda1(), (spec.r - 1.0 - spec.theta) / 2.0);
}

ConditionReport14 check_condition_1_4(const EigenBasis& basis, const ModelSpec& spec,
                                      int n_samples, std::uint64_t seed) {
    ConditionReport14 rep;
    rep.xi_sq_used = chain_xi_squared(basis, spec);
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_samples; ++s) {
        Field x = sample_field(basis, seed, static_cast<std::uint64_t>(s));
        const double lhs = std::pow(norm_lp(basis, x, spec.r + 1.0), spec.r + 1.0);
        const double rhs = rep.xi_sq_used *
                           std::pow(norm_q(x, spec.q_seq), 2.0 + spec.theta) *
                           std::pow(norm_h(basis, x), spec.r - 1.0 - spec.theta);
        if (rhs == 0.0) continue;  // degenerate input, ratio treated as +inf
        rep.min_ratio = std::min(rep.min_ratio, lhs / rhs);
    }
    return rep;
}

VariationalReport check_variational_conditions(const EigenBasis& basis, const ModelSpec& spec,
                                               int n_samples, std::uint64_t seed) {
    if (!spec.power_law_psi())
        throw std::invalid_argument("check_variational_conditions: needs the power-law psi");
    const double t = 0.0;
    const int n = basis.n_modes, m = basis.n_quad;
    VariationalReport rep;
    rep.a2_min_slack = rep.a3_min_slack = rep.a4_min_slack =
        std::numeric_limits<double>::infinity();
    const double gamma = spec.gamma(t);
    const double K = 2.0 * std::max(gamma, 0.0);
    const double alpha = 2.0 * power_law_delta(spec.r);
    for (int i = 0; i < n; ++i)
        rep.a3_f_floor += spec.q_seq[i] * spec.q_seq[i] / basis.eigenvalues[i];

    std::vector<double> ga(m), gb(m);

    // Pairing <A(v), w> = -<Psi(v), w> - <Phi(v), L^{-1} w>.
    auto pairing = [&](std::span<const double> gv, const Field& v, const Field& w,
                       std::span<const double> gw) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += basis.quad_weights[k] * spec.psi(t, gv[k]) * gw[k];
        double phi_part;
        if (spec.linear_phi()) {
            phi_part = 0.0;
            for (int i = 0; i < n; ++i)
                phi_part += -gamma * v[i] * w[i] / basis.eigenvalues[i];
        } else {
            std::vector<double> pg(m);
            for (int k = 0; k < m; ++k) pg[k] = spec.phi(t, gv[k]);
            Field c(n);
            analyze(basis, pg, c);
            phi_part = 0.0;
            for (int i = 0; i < n; ++i) phi_part += -c[i] * w[i] / basis.eigenvalues[i];
        }
        return -s - phi_part;
    };

    // (A1) hemicontinuity on a lambda-grid.
    {
        Field v1 = sample_field(basis, seed, 1000001);
        Field v2 = sample_field(basis, seed, 1000002);
        Field v = sample_field(basis, seed, 1000003);
        synthesize(basis, v, gb);
        const int n_grid = 41;
        std::vector<double> g(n_grid);
        double scale = 1.0;
        for (int j = 0; j < n_grid; ++j) {
            const double lam = -2.0 + 4.0 * j / (n_grid - 1);
            Field vj(n);
            for (int i = 0; i < n; ++i) vj[i] = v1[i] + lam * v2[i];
            synthesize(basis, vj, ga);
            g[j] = pairing(ga, vj, v, gb);
            scale = std::max(scale, std::abs(g[j]));
        }
        for (int j = 1; j < n_grid; ++j)
            rep.a1_max_rel_jump = std::max(rep.a1_max_rel_jump, std::abs(g[j] - g[j - 1]) / scale);
    }

    for (int s = 0; s < n_samples; ++s) {
        Field v1 = sample_field(basis, seed, 3 * static_cast<std::uint64_t>(s) + 1);
        Field v2 = sample_field(basis, seed, 3 * static_cast<std::uint64_t>(s) + 2);
        synthesize(basis, v1, ga);
        synthesize(basis, v2, gb);

        // (A2) monotonicity: 2<A(v1)-A(v2), v1-v2> <= K ||v1-v2||_H^2.
        {
            double mono = 0.0, h2 = 0.0;
            for (int k = 0; k < m; ++k)
                mono += basis.quad_weights[k] *
                        (spec.psi(t, ga[k]) - spec.psi(t, gb[k])) * (ga[k] - gb[k]);
            for (int i = 0; i < n; ++i) {
                const double d = v1[i] - v2[i];
                h2 += d * d / basis.eigenvalues[i];
            }
            const double lhs = 2.0 * (-mono) - 2.0 * phi_pairing(basis, spec, t, v1, v2, ga, gb);
            rep.a2_min_slack = std::min(rep.a2_min_slack, K * h2 - lhs);
        }

        // (A3) coercivity with f = ||Q||_HS^2 and alpha = 2 delta^2.
        {
            double vv = 0.0, vrp1 = 0.0, h2 = 0.0;
            for (int k = 0; k < m; ++k) {
                vv += basis.quad_weights[k] * spec.psi(t, ga[k]) * ga[k];
                vrp1 += basis.quad_weights[k] * std::pow(std::abs(ga[k]), spec.r + 1.0);
            }
            for (int i = 0; i < n; ++i) h2 += v1[i] * v1[i] / basis.eigenvalues[i];
            double phi_v;
            if (spec.linear_phi()) {
                phi_v = -gamma * h2;
            } else {
                std::vector<double> pg(m);
                for (int k = 0; k < m; ++k) pg[k] = spec.phi(t, ga[k]);
                Field c(n);
                analyze(basis, pg, c);
                phi_v = 0.0;
                for (int i = 0; i < n; ++i) phi_v += -c[i] * v1[i] / basis.eigenvalues[i];
            }
            const double two_av = 2.0 * (-vv - phi_v);
            rep.a3_min_slack = std::min(
                rep.a3_min_slack,
                rep.a3_f_floor + K * h2 - (two_av + rep.a3_f_floor + alpha * vrp1));
        }

        // (A4) boundedness of A against the Hoelder envelope
        // |<A(v1), v2>| <= ||Psi(v1)||_{(r+1)/r} ||v2||_{r+1} + ||Phi(v1)||_2 ||v2||_2 / lambda_1.
        {
            const double p_dual = (spec.r + 1.0) / spec.r;
            const double g = pairing(ga, v1, v2, gb);
            double psi_dual = 0.0, v2_rp1 = 0.0, phi_l2 = 0.0, v2_l2 = 0.0;
            for (int k = 0; k < m; ++k) {
                psi_dual += basis.quad_weights[k] *
                            std::pow(std::abs(spec.psi(t, ga[k])), p_dual);
                v2_rp1 += basis.quad_weights[k] * std::pow(std::abs(gb[k]), spec.r + 1.0);
                phi_l2 += basis.quad_weights[k] * spec.phi(t, ga[k]) * spec.phi(t, ga[k]);
                v2_l2 += basis.quad_weights[k] * gb[k] * gb[k];
            }
            const double phi_bound = std::sqrt(phi_l2 * v2_l2) / basis.lambda1();
            const double v2_norm = std::pow(v2_rp1, 1.0 / (spec.r + 1.0));
            const double envelope = std::pow(psi_dual, 1.0 / p_dual) * v2_norm + phi_bound;
            rep.a4_min_slack = std::min(rep.a4_min_slack, envelope - std::abs(g));
            const double vr = std::pow(norm_lp_grid(basis, ga, spec.r + 1.0), spec.r);
            if (v2_norm > 0.0)
                rep.a4_c_est = std::max(rep.a4_c_est, std::abs(g) / v2_norm / (1.0 + vr));
        }
    }
    rep.ok = rep.a2_min_slack > -1e-8 && rep.a3_min_slack > -1e-8 &&
             rep.a4_min_slack > -1e-8 && rep.a1_max_rel_jump < 0.5;
    return rep;
}

double growth_envelope_sup(const ModelSpec& spec, double t, double s_max, int n_grid) {
    double sup = 0.0;
    for (int j = 0; j <= n_grid; ++j) {
        const double s = -s_max + 2.0 * s_max * j / n_grid;
        const double num = std::abs(spec.psi(t, s)) + std::abs(spec.phi(t, s) - spec.sigma_growth * s);
        sup = std::max(sup, num / (1.0 + std::pow(std::abs(s), spec.r)));
    }
    return sup;
}

} // namespace spme
