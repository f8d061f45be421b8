#include "vbl/scalar_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "vbl/pcg.hpp"

namespace vbl {

ScalarField scalar_forcing_field(const ForcingSpec& spec, const ScalarField& rho) {
    ScalarField out(rho.grid());
    switch (spec.kind) {
        case ForcingSpec::Kind::none:
            return out;
        case ForcingSpec::Kind::constant:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec.amp;
            return out;
        case ForcingSpec::Kind::rho_power:
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double r = rho[i];
                if (r > 0.0 && r >= spec.threshold) out[i] = spec.amp * std::pow(r, spec.exponent);
            }
            return out;
    }
    return out;
}

VectorField scalar_g_field(const GSpec& spec, const ScalarField& rho) {
    const Grid& g = rho.grid();
    VectorField out(g, g.dim);
    if (spec.f.kind == ForcingSpec::Kind::none) return out;
    if (spec.axis < 0 || spec.axis >= g.dim)
        throw std::invalid_argument("scalar_g_field: axis out of range");
    const ScalarField prof = scalar_forcing_field(spec.f, rho);
    auto c = out.comp(spec.axis);
    for (std::size_t i = 0; i < prof.size(); ++i) c[i] = prof[i];
    return out;
}

namespace {

void check_state(const ScalarRunState& s) {
    if (s.mu.min() < 1.0) throw std::invalid_argument("scalar state: mu >= 1 violated");
    if (s.transport.rho.min() < 0.0)
        throw std::invalid_argument("scalar state: rho >= 0 violated");
}

// y = (rho/dt) x - div(mu_face grad x), faces carry the arithmetic mean of mu.
void apply_diffusion_operator(const Grid& g, const ScalarField& rho, const ScalarField& mu,
                              double dt, std::span<const double> x, std::span<double> y) {
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double acc = rho[i] / dt * x[i];
        for (int a = 0; a < g.dim; ++a) {
            const std::size_t ip = g.shift(i, a, +1);
            const std::size_t im = g.shift(i, a, -1);
            const double mu_p = 0.5 * (mu[i] + mu[ip]);
            const double mu_m = 0.5 * (mu[im] + mu[i]);
            acc += (mu_p * (x[i] - x[ip]) + mu_m * (x[i] - x[im])) * inv_h2;
        }
        y[i] = acc;
    }
}

}  // namespace

ScalarRunState advance_scalar(const ScalarRunState& s, double dt, StepInfo* info) {
    check_state(s);
    const Grid& g = s.transport.rho.grid();

    const ScalarField theta_n = s.theta;
    UpwindResult adv = upwind_transport(s.transport, std::span<const ScalarField>(&theta_n, 1), dt);
    const ScalarField& rho_new = adv.rho;
    const ScalarField& m_star = adv.transported[0];

    // Right-hand side: m*/dt + rho F + div(rho G), with the post-advection rho.
    VectorField rho_G(g, g.dim);
    for (int a = 0; a < g.dim; ++a) {
        auto dst = rho_G.comp(a);
        const auto src = s.G.comp(a);
        for (std::size_t i = 0; i < g.cells(); ++i) dst[i] = rho_new[i] * src[i];
    }
    const ScalarField div_rho_G = divergence(rho_G);

    std::vector<double> b(g.cells());
    for (std::size_t i = 0; i < g.cells(); ++i)
        b[i] = m_star[i] / dt + rho_new[i] * s.F[i] + div_rho_G[i];

    double total_mass = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) total_mass += rho_new[i];
    const bool singular = total_mass == 0.0;

    std::vector<double> inv_diag(g.cells());
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double d = rho_new[i] / dt;
        for (int a = 0; a < g.dim; ++a) {
            d += 0.5 * (s.mu[i] + s.mu[g.shift(i, a, +1)]) * inv_h2;
            d += 0.5 * (s.mu[g.shift(i, a, -1)] + s.mu[i]) * inv_h2;
        }
        inv_diag[i] = 1.0 / d;
    }

    LinearOp A = [&](std::span<const double> x, std::span<double> y) {
        apply_diffusion_operator(g, rho_new, s.mu, dt, x, y);
        if (singular) {
            double mean = 0.0;
            for (double v : y) mean += v;
            mean /= static_cast<double>(y.size());
            for (double& v : y) v -= mean;
        }
    };

    double pinned_mean = 0.0;
    if (singular) {
        // rho == 0 everywhere: the operator only sees mean-zero data.
        double mean_b = 0.0;
        for (double v : b) mean_b += v;
        mean_b /= static_cast<double>(b.size());
        for (double& v : b) v -= mean_b;
        for (std::size_t i = 0; i < g.cells(); ++i) pinned_mean += theta_n[i];
        pinned_mean /= static_cast<double>(g.cells());
    }

    std::vector<double> x(g.cells(), 0.0);
    PcgOptions opt;
    opt.rel_tol = 1e-10;
    opt.max_iter = 10 * static_cast<int>(g.cells());
    const PcgResult res = pcg(A, b, x, inv_diag, opt);
    if (info) {
        info->cg_iterations = res.iterations;
        info->cg_rel_residual = res.rel_residual;
    }

    ScalarRunState out;
    out.theta = ScalarField(g);
    for (std::size_t i = 0; i < g.cells(); ++i) out.theta[i] = x[i] + pinned_mean;
    out.transport.rho = rho_new;
    out.transport.v = s.transport.v;
    out.transport.t = s.transport.t + dt;
    out.mu = s.mu;
    out.F = s.F;
    out.G = s.G;
    out.t = s.t + dt;
    return out;
}

EnergyResidual energy_residual(const ScalarRunState& before, const ScalarRunState& after,
                               double dt, const ConvexTestFunction& phi) {
    const Grid& g = before.transport.rho.grid();
    const double ymax =
        2.0 * std::max(before.theta.max_abs(), after.theta.max_abs()) + 1.0;
    const AdmissibilityReport adm = check_admissible_scalar(phi, ymax);
    if (!adm.ok)
        throw std::invalid_argument("energy_residual: inadmissible phi '" + phi.label +
                                    "': " + adm.failures.front());

    const double vol = g.cell_volume();
    double level_before = 0.0, level_after = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        level_before += before.transport.rho[i] * phi.value(before.theta[i]);
        level_after += after.transport.rho[i] * phi.value(after.theta[i]);
    }
    level_before *= vol;
    level_after *= vol;

    // Face-based convex dissipation with the same face viscosities the
    // implicit step used; nonnegative because phi' is monotone.
    double dissipation = 0.0;
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int a = 0; a < g.dim; ++a) {
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const std::size_t ip = g.shift(i, a, +1);
            const double mu_f = 0.5 * (before.mu[i] + before.mu[ip]);
            const double dth = after.theta[ip] - after.theta[i];
            const double dphi = phi.d1(after.theta[ip]) - phi.d1(after.theta[i]);
            dissipation += mu_f * dphi * dth * inv_h2;
        }
    }
    dissipation *= vol;

    VectorField rho_G(g, g.dim);
    for (int a = 0; a < g.dim; ++a) {
        auto dst = rho_G.comp(a);
        const auto src = before.G.comp(a);
        for (std::size_t i = 0; i < g.cells(); ++i) dst[i] = after.transport.rho[i] * src[i];
    }
    const ScalarField div_rho_G = divergence(rho_G);

    double f_term = 0.0, g_term = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const double dphi = phi.d1(after.theta[i]);
        f_term += after.transport.rho[i] * before.F[i] * dphi;
        g_term += dphi * div_rho_G[i];
    }
    f_term *= vol;
    g_term *= vol;

    EnergyResidual out;
    out.residual = level_after - level_before + dt * dissipation - dt * f_term - dt * g_term;
    out.scale_terms = std::fabs(level_after) + std::fabs(level_before) +
                      dt * std::fabs(dissipation) + dt * std::fabs(f_term) +
                      dt * std::fabs(g_term);
    return out;
}

ScalarRunResult run_scalar(const ScalarRunConfig& cfg) {
    const Grid& g = cfg.theta0.grid();
    if (!cfg.theta0.finite() || !cfg.transport0.rho.finite())
        throw std::invalid_argument("run_scalar: non-finite initial data");

    const double ymax = 2.0 * cfg.theta0.max_abs() + 10.0;
    for (const auto& phi : cfg.battery) {
        const AdmissibilityReport adm = check_admissible_scalar(phi, ymax);
        if (!adm.ok)
            throw std::invalid_argument("run_scalar: battery member '" + phi.label +
                                        "' inadmissible: " + adm.failures.front());
    }

    ScalarRunResult out;
    ScalarRunState state;
    state.theta = cfg.theta0;
    state.transport = cfg.transport0;
    state.mu = cfg.mu;
    state.F = scalar_forcing_field(cfg.forcing, cfg.transport0.rho);
    state.G = scalar_g_field(cfg.gforcing, cfg.transport0.rho);
    state.t = cfg.transport0.t;

    out.snapshots.push_back(state);
    out.snapshot_times.push_back(state.t);
    out.step_times.push_back(state.t);
    out.step_max_abs.push_back(state.theta.max_abs());

    const ConvexTestFunction scale_phi = phi_square();
    const double t_end = state.t + cfg.T;
    int step = 0;
    while (state.t < t_end - 1e-14 * (1.0 + t_end)) {
        double dt = std::min(cfg.max_dt, cfl_dt(state.transport.v, g, cfg.cfl));
        dt = std::min(dt, t_end - state.t);
        StepInfo info;
        ScalarRunState next = advance_scalar(state, dt, &info);
        out.max_cg_iterations = std::max(out.max_cg_iterations, info.cg_iterations);
        ++step;

        const double scale =
            std::max(energy_residual(state, next, dt, scale_phi).scale_terms, 1e-30);
        for (const auto& phi : cfg.battery) {
            const EnergyResidual er = energy_residual(state, next, dt, phi);
            out.residuals.push_back({step, next.t, phi.label, er.residual, scale});
            const double rel = er.residual / scale;
            out.max_rel_residual = std::max(out.max_rel_residual, rel);
        }

        // Refresh the density-dependent sources for the next step.
        next.F = scalar_forcing_field(cfg.forcing, next.transport.rho);
        next.G = scalar_g_field(cfg.gforcing, next.transport.rho);

        state = std::move(next);
        out.step_times.push_back(state.t);
        out.step_max_abs.push_back(state.theta.max_abs());
        const bool last = !(state.t < t_end - 1e-14 * (1.0 + t_end));
        if (step % cfg.snapshot_every == 0 || last) {
            out.snapshots.push_back(state);
            out.snapshot_times.push_back(state.t);
        }
    }
    out.steps = step;
    return out;
}

}  // namespace vbl
