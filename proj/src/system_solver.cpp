#include "vbl/system_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "vbl/pcg.hpp"

namespace vbl {

namespace {
constexpr double kZeroGuard = 1e-30;  // |u| below this contributes 0 to cross terms
}

bool MatrixField::finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

ScalarField nu_field(const ScalarField& mu, const ScalarField& lambda) {
    ScalarField out(mu.grid());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * mu[i] + 3.0 * lambda[i];
    return out;
}

void validate_coefficients(const SystemRunState& s) {
    if (!(s.kappa > 0.0) || !(s.kappa < 0.5))
        throw std::invalid_argument("system state: need 0 < kappa < 1/2");
    for (std::size_t i = 0; i < s.mu.size(); ++i) {
        if (s.mu[i] < 1.0) throw std::invalid_argument("system state: mu >= 1 violated");
        const double nu = 2.0 * s.mu[i] + 3.0 * s.lambda[i];
        if (nu < 1.0)
            throw std::invalid_argument("system state: nu = 2 mu + 3 lambda >= 1 violated");
        if (3.0 * std::fabs(s.lambda[i]) > s.kappa * nu * (1.0 + 1e-12))
            throw std::invalid_argument("system state: 3|lambda| <= kappa nu violated");
    }
    if (s.transport.rho.min() < 0.0)
        throw std::invalid_argument("system state: rho >= 0 violated");
}

namespace {

// Operator (rho/dt) I - div(2 mu grad .) - grad(lambda div .), flattened as
// three component blocks of grid.cells() each.
struct ImplicitVelocityOp {
    const Grid& g;
    const ScalarField& rho;
    const ScalarField& mu;
    const ScalarField& lambda;
    double dt;
    bool pin_mean;

    void operator()(std::span<const double> x, std::span<double> y) const {
        const std::size_t N = g.cells();
        const double inv_h2 = 1.0 / (g.h * g.h);
        for (int j = 0; j < 3; ++j) {
            const double* xj = x.data() + static_cast<std::size_t>(j) * N;
            double* yj = y.data() + static_cast<std::size_t>(j) * N;
            for (std::size_t i = 0; i < N; ++i) {
                double acc = rho[i] / dt * xj[i];
                for (int a = 0; a < g.dim; ++a) {
                    const std::size_t ip = g.shift(i, a, +1);
                    const std::size_t im = g.shift(i, a, -1);
                    const double mu_p = mu[i] + mu[ip];  // 2 * arithmetic face mean
                    const double mu_m = mu[im] + mu[i];
                    acc += (mu_p * (xj[i] - xj[ip]) + mu_m * (xj[i] - xj[im])) * inv_h2;
                }
                yj[i] = acc;
            }
        }
        // lambda block: y_a -= D_a(lambda * div x) for the spatial components.
        const double inv2h = 1.0 / (2.0 * g.h);
        std::vector<double> ls(N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            double div = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                const double* xa = x.data() + static_cast<std::size_t>(a) * N;
                div += (xa[g.shift(i, a, +1)] - xa[g.shift(i, a, -1)]) * inv2h;
            }
            ls[i] = lambda[i] * div;
        }
        for (int a = 0; a < g.dim; ++a) {
            double* ya = y.data() + static_cast<std::size_t>(a) * N;
            for (std::size_t i = 0; i < N; ++i)
                ya[i] -= (ls[g.shift(i, a, +1)] - ls[g.shift(i, a, -1)]) * inv2h;
        }
        if (pin_mean) {
            for (int j = 0; j < 3; ++j) {
                double* yj = y.data() + static_cast<std::size_t>(j) * N;
                double mean = 0.0;
                for (std::size_t i = 0; i < N; ++i) mean += yj[i];
                mean /= static_cast<double>(N);
                for (std::size_t i = 0; i < N; ++i) yj[i] -= mean;
            }
        }
    }
};

}  // namespace

MatrixField barotropic_g_field(const BarotropicSpec& spec, const ScalarField& rho) {
    MatrixField out(rho.grid());
    if (!spec.enabled) return out;
    const int d = rho.grid().dim;
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < rho.size(); ++i)
            out.at(a, a, i) = rho[i] > 0.0 ? -spec.amp * std::pow(rho[i], spec.gamma - 1.0) : 0.0;
    return out;
}

SystemRunState advance_velocity(const SystemRunState& s, double dt, StepInfo* info) {
    validate_coefficients(s);
    const Grid& g = s.transport.rho.grid();
    const std::size_t N = g.cells();
    if (s.u.ncomp() != 3) throw std::invalid_argument("advance_velocity: u must have 3 components");

    std::vector<ScalarField> comps;
    comps.reserve(3);
    for (int j = 0; j < 3; ++j) comps.push_back(s.u.component(j));
    UpwindResult adv = upwind_transport(s.transport, comps, dt);
    const ScalarField& rho_new = adv.rho;

    // div(rho G) per component from the post-advection density.
    std::vector<double> b(3 * N, 0.0);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int j = 0; j < 3; ++j) {
        double* bj = b.data() + static_cast<std::size_t>(j) * N;
        for (std::size_t i = 0; i < N; ++i)
            bj[i] = adv.transported[j][i] / dt + rho_new[i] * s.F.at(j, i);
        for (int a = 0; a < g.dim; ++a) {
            for (std::size_t i = 0; i < N; ++i) {
                const std::size_t ip = g.shift(i, a, +1);
                const std::size_t im = g.shift(i, a, -1);
                bj[i] += (rho_new[ip] * s.G.at(a, j, ip) - rho_new[im] * s.G.at(a, j, im)) * inv2h;
            }
        }
    }

    double total_mass = 0.0;
    for (std::size_t i = 0; i < N; ++i) total_mass += rho_new[i];
    const bool singular = total_mass == 0.0;

    std::vector<double> inv_diag(3 * N);
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (std::size_t i = 0; i < N; ++i) {
        double d = rho_new[i] / dt;
        for (int a = 0; a < g.dim; ++a) {
            d += (s.mu[i] + s.mu[g.shift(i, a, +1)]) * inv_h2;
            d += (s.mu[g.shift(i, a, -1)] + s.mu[i]) * inv_h2;
        }
        for (int j = 0; j < 3; ++j) inv_diag[static_cast<std::size_t>(j) * N + i] = 1.0 / d;
    }

    std::array<double, 3> pinned_mean{0.0, 0.0, 0.0};
    if (singular) {
        for (int j = 0; j < 3; ++j) {
            double* bj = b.data() + static_cast<std::size_t>(j) * N;
            double mean = 0.0;
            for (std::size_t i = 0; i < N; ++i) mean += bj[i];
            mean /= static_cast<double>(N);
            for (std::size_t i = 0; i < N; ++i) bj[i] -= mean;
            double mu_mean = 0.0;
            for (std::size_t i = 0; i < N; ++i) mu_mean += s.u.at(j, i);
            pinned_mean[static_cast<std::size_t>(j)] = mu_mean / static_cast<double>(N);
        }
    }

    const ImplicitVelocityOp op{g, rho_new, s.mu, s.lambda, dt, singular};
    std::vector<double> x(3 * N, 0.0);
    PcgOptions opt;
    opt.rel_tol = 1e-10;
    opt.max_iter = 30 * static_cast<int>(N);  // 10 * unknown count
    const PcgResult res = pcg([&op](std::span<const double> in, std::span<double> out_) {
        op(in, out_);
    }, b, x, inv_diag, opt);
    if (info) {
        info->cg_iterations = res.iterations;
        info->cg_rel_residual = res.rel_residual;
    }

    SystemRunState out;
    out.u = VectorField(g, 3);
    for (int j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < N; ++i)
            out.u.at(j, i) = x[static_cast<std::size_t>(j) * N + i] +
                             pinned_mean[static_cast<std::size_t>(j)];
    out.transport.rho = rho_new;
    out.transport.v = s.transport.v;
    out.transport.t = s.transport.t + dt;
    out.mu = s.mu;
    out.lambda = s.lambda;
    out.F = s.F;
    out.G = s.G;
    out.kappa = s.kappa;
    out.t = s.t + dt;
    return out;
}

SystemEnergyResidual system_energy_residual(const SystemRunState& before,
                                            const SystemRunState& after, double dt,
                                            const ConvexTestFunction& phi) {
    const Grid& g = before.transport.rho.grid();
    const std::size_t N = g.cells();
    const ScalarField mag_before = before.u.magnitude();
    const ScalarField mag_after = after.u.magnitude();
    const double ymax = 2.0 * std::max(mag_before.max(), mag_after.max()) + 1.0;
    const AdmissibilityReport adm = check_admissible_system(phi, ymax);
    if (!adm.ok)
        throw std::invalid_argument("system_energy_residual: inadmissible phi '" + phi.label +
                                    "': " + adm.failures.front());

    const double vol = g.cell_volume();
    double level_before = 0.0, level_after = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        level_before += before.transport.rho[i] * phi.value(mag_before[i]);
        level_after += after.transport.rho[i] * phi.value(mag_after[i]);
    }
    level_before *= vol;
    level_after *= vol;

    // g = phi'(|u|)/|u| and Phi = g u (the gradient of phi(|x|)).
    std::vector<double> gw(N);
    for (std::size_t i = 0; i < N; ++i) gw[i] = phi.d1_over_y(mag_after[i]);
    VectorField Phi(g, 3);
    for (int j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < N; ++i) Phi.at(j, i) = gw[i] * after.u.at(j, i);

    // nu_eff = 2 mu + 3 min(lambda, 0): equals nu for lambda <= 0 and is the
    // cellwise-true lower bound of the viscous quadratic form otherwise.
    std::vector<double> nu_eff(N);
    for (std::size_t i = 0; i < N; ++i)
        nu_eff[i] = 2.0 * before.mu[i] + 3.0 * std::min(before.lambda[i], 0.0);

    // Face dissipation split: T1 ~ int nu (phi'/|u|) |grad u|^2,
    // T2 ~ int nu [phi'' - phi'/|u|] |grad|u||^2. Their sum is the monotone
    // form (Phi(b)-Phi(a)).(b-a); each piece is nonnegative for admissible phi.
    double t1 = 0.0, t2 = 0.0;
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int a = 0; a < g.dim; ++a) {
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t ip = g.shift(i, a, +1);
            const double nf = 0.5 * (nu_eff[i] + nu_eff[ip]);
            double du2 = 0.0;
            for (int j = 0; j < 3; ++j) {
                const double d = after.u.at(j, ip) - after.u.at(j, i);
                du2 += d * d;
            }
            const double A = mag_after[i], B = mag_after[ip];
            t1 += nf * 0.5 * (gw[i] + gw[ip]) * du2 * inv_h2;
            t2 += nf * 0.5 * (gw[ip] - gw[i]) * (B - A) * (B + A) * inv_h2;
        }
    }
    t1 *= vol;
    t2 *= vol;

    // Cross term: lambda * X * div u with X = div(Phi) - g div u, the discrete
    // form of [phi''-phi'/|u|] sum_ij d_i u_j u_i u_j / |u|^2 div u.
    const ScalarField div_u = divergence(after.u);
    const ScalarField div_Phi = divergence(Phi);
    double cross = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (mag_after[i] < kZeroGuard) continue;
        cross += before.lambda[i] * (div_Phi[i] - gw[i] * div_u[i]) * div_u[i];
    }
    cross *= vol;

    double f_term = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += before.F.at(j, i) * Phi.at(j, i);
        f_term += after.transport.rho[i] * s;
    }
    f_term *= vol;

    double g_term = 0.0;
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int a = 0; a < g.dim; ++a) {
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t ip = g.shift(i, a, +1);
            const std::size_t im = g.shift(i, a, -1);
            for (int j = 0; j < 3; ++j) {
                const double div_rg = (after.transport.rho[ip] * before.G.at(a, j, ip) -
                                       after.transport.rho[im] * before.G.at(a, j, im)) *
                                      inv2h;
                g_term += Phi.at(j, i) * div_rg;
            }
        }
    }
    g_term *= vol;

    SystemEnergyResidual out;
    out.residual =
        level_after - level_before + dt * (t1 + t2) + dt * cross - dt * f_term - dt * g_term;
    out.scale_terms = std::fabs(level_after) + std::fabs(level_before) + dt * std::fabs(t1) +
                      dt * std::fabs(t2) + dt * std::fabs(cross) + dt * std::fabs(f_term) +
                      dt * std::fabs(g_term);
    out.lambda_cross = cross;
    return out;
}

SystemRunResult run_system(const SystemRunConfig& cfg) {
    const Grid& g = cfg.u0.grid();
    const double ymax = 2.0 * cfg.u0.magnitude().max() + 10.0;
    for (const auto& phi : cfg.battery) {
        const AdmissibilityReport adm = check_admissible_system(phi, ymax);
        if (!adm.ok)
            throw std::invalid_argument("run_system: battery member '" + phi.label +
                                        "' inadmissible: " + adm.failures.front());
    }

    SystemRunResult out;
    SystemRunState state;
    state.u = cfg.u0;
    state.transport = cfg.transport0;
    state.mu = cfg.mu;
    state.lambda = cfg.lambda;
    state.kappa = cfg.kappa;
    state.F = cfg.F0;
    state.G = barotropic_g_field(cfg.barotropic, cfg.transport0.rho);
    state.t = cfg.transport0.t;
    validate_coefficients(state);

    out.snapshots.push_back(state);
    out.snapshot_times.push_back(state.t);
    out.step_times.push_back(state.t);
    out.step_max_mag.push_back(state.u.magnitude().max());

    const ConvexTestFunction scale_phi = phi_square();
    const double t_end = state.t + cfg.T;
    int step = 0;
    while (state.t < t_end - 1e-14 * (1.0 + t_end)) {
        double dt = std::min(cfg.max_dt, cfl_dt(state.transport.v, g, cfg.cfl));
        dt = std::min(dt, t_end - state.t);
        StepInfo info;
        SystemRunState next = advance_velocity(state, dt, &info);
        out.max_cg_iterations = std::max(out.max_cg_iterations, info.cg_iterations);
        ++step;

        const double scale =
            std::max(system_energy_residual(state, next, dt, scale_phi).scale_terms, 1e-30);
        for (const auto& phi : cfg.battery) {
            const SystemEnergyResidual er = system_energy_residual(state, next, dt, phi);
            out.residuals.push_back({step, next.t, phi.label, er.residual, scale,
                                     er.lambda_cross});
            out.max_rel_residual = std::max(out.max_rel_residual, er.residual / scale);
        }

        next.G = barotropic_g_field(cfg.barotropic, next.transport.rho);
        state = std::move(next);
        out.step_times.push_back(state.t);
        out.step_max_mag.push_back(state.u.magnitude().max());
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
