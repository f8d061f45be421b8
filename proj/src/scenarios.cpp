#include "vbl/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace vbl {

namespace {

using std::numbers::pi;

const std::vector<ScenarioInfo> kRegistry = {
    {"heat_sanity",
     "constant density, zero velocity, unit viscosity: plain periodic heat flow",
     "sanity case where the equation degenerates to the heat equation; max principle "
     "and the convex energy inequality hold step by step",
     ScenarioType::scalar,
     "[grid]\n"
     "dim = 1\n"
     "n = 1024\n"
     "length = 1.0\n"
     "[time]\n"
     "T = 0.1\n"
     "cfl = 0.45\n"
     "max_dt = 5e-4\n"
     "snapshot_every = 4\n"
     "[scenario]\n"
     "name = heat_sanity\n"
     "theta_amp = 1.0\n"
     "blob_width = 0.08\n"
     "blob_center = 0.5\n"
     "[coefficients]\n"
     "mu = 1.0\n"
     "[degiorgi]\n"
     "kind = scalar_bounded\n"
     "K = auto\n"
     "kmax = 10\n"
     "[exponents]\n"
     "alpha = 0.5\n"
     "p = 4\n"
     "q = 8\n"
     "r = 2\n"},

    {"vacuum_blob",
     "compactly supported density translated at constant speed; exact vacuum outside; "
     "forcing with rho^alpha F bounded",
     "uniform sup bound on theta that does not degenerate on cavities; the density-floor "
     "sweep measures the uniformity directly",
     ScenarioType::scalar,
     "[grid]\n"
     "dim = 1\n"
     "n = 256\n"
     "length = 1.0\n"
     "[time]\n"
     "T = 0.4\n"
     "cfl = 0.45\n"
     "max_dt = 2e-3\n"
     "snapshot_every = 1\n"
     "[scenario]\n"
     "name = vacuum_blob\n"
     "theta_amp = 0.0\n"
     "blob_width = 0.18\n"
     "blob_center = 0.3\n"
     "velocity = 0.8\n"
     "forcing_alpha = 0.5\n"
     "forcing_amp = 0.6\n"
     "forcing_threshold = 0.3\n"
     "density_floor = 0.0\n"
     "[coefficients]\n"
     "mu = 1.0\n"
     "[degiorgi]\n"
     "kind = scalar_layer\n"
     "K = auto\n"
     "t0 = 0.08\n"
     "eta = 0.5\n"
     "kmax = 8\n"
     "[exponents]\n"
     "alpha = 0.5\n"
     "p = 4\n"
     "q = 8\n"
     "r = 2\n"},

    {"rough_mu",
     "discontinuous striped viscosity (mu in {1, mu_high}) with a translating density",
     "only measurability and mu >= 1 are used by the bounds; the striped coefficient "
     "exercises that generality",
     ScenarioType::scalar,
     "[grid]\n"
     "dim = 1\n"
     "n = 256\n"
     "length = 1.0\n"
     "[time]\n"
     "T = 0.1\n"
     "cfl = 0.45\n"
     "max_dt = 1e-3\n"
     "snapshot_every = 1\n"
     "[scenario]\n"
     "name = rough_mu\n"
     "theta_amp = 1.0\n"
     "blob_width = 0.1\n"
     "blob_center = 0.35\n"
     "velocity = 0.7\n"
     "rho_base = 0.5\n"
     "mu_high = 10.0\n"
     "mu_stripes = 4\n"
     "[coefficients]\n"
     "mu = 1.0\n"
     "mu_kind = stripes\n"
     "[degiorgi]\n"
     "kind = scalar_bounded\n"
     "K = auto\n"
     "kmax = 10\n"
     "[exponents]\n"
     "alpha = 0.5\n"
     "p = 4\n"
     "q = 8\n"
     "r = 2\n"},

    {"barotropic_forcing",
     "vector unknown with G = -rho^{gamma-1} I (pressure-type forcing), both viscosity "
     "terms active",
     "the G term of the vector energy inequality in its physical form; the lambda cross "
     "term is bounded by sqrt(2/3) kappa U_{k-1}",
     ScenarioType::system,
     "[grid]\n"
     "dim = 2\n"
     "n = 48\n"
     "length = 1.0\n"
     "[time]\n"
     "T = 0.15\n"
     "cfl = 0.2\n"
     "max_dt = 2e-3\n"
     "snapshot_every = 2\n"
     "[scenario]\n"
     "name = barotropic_forcing\n"
     "gamma = 2.0\n"
     "u_amp = 0.5\n"
     "blob_width = 0.2\n"
     "blob_center = 0.4\n"
     "velocity = 0.4\n"
     "rho_base = 0.3\n"
     "[coefficients]\n"
     "mu = 1.0\n"
     "lambda = -0.13\n"
     "kappa = 0.25\n"
     "[degiorgi]\n"
     "kind = system_bounded\n"
     "K = auto\n"
     "kmax = 8\n"
     "[exponents]\n"
     "alpha = 0.5\n"
     "p = 4\n"
     "q = 8\n"
     "r = 2\n"},

    {"system_kappa_sweep",
     "vector bump decaying under both viscosities; kappa sets the second-viscosity "
     "budget and the target tail exponent",
     "tail bound measure{|u| >= 2 C_k} <= U_k / C_k^2 and the integrability target "
     "2 + log2(1/kappa)",
     ScenarioType::system,
     "[grid]\n"
     "dim = 1\n"
     "n = 256\n"
     "length = 1.0\n"
     "[time]\n"
     "T = 0.15\n"
     "cfl = 0.45\n"
     "max_dt = 1e-3\n"
     "snapshot_every = 1\n"
     "[scenario]\n"
     "name = system_kappa_sweep\n"
     "u_amp = 1.0\n"
     "blob_width = 0.3\n"
     "blob_center = 0.5\n"
     "rho_base = 1.0\n"
     "[coefficients]\n"
     "mu = 1.0\n"
     "lambda = -0.13\n"
     "kappa = 0.25\n"
     "[degiorgi]\n"
     "kind = system_bounded\n"
     "K = 0.25\n"
     "kmax = 8\n"
     "[exponents]\n"
     "alpha = 0.5\n"
     "p = 4\n"
     "q = 8\n"
     "r = 2\n"},

    {"recursion_only",
     "no grid: iterates the abstract decay recursions (model preset and both lemma "
     "variants) and writes their traces",
     "the decay lemmas turned into deterministic computations: the K dichotomy and the "
     "geometric decay certificate U_k <= C (eps1 kappa)^k",
     ScenarioType::recursion,
     "[grid]\n"
     "dim = 1\n"
     "n = 4\n"
     "length = 1.0\n"
     "[time]\n"
     "T = 0\n"
     "[scenario]\n"
     "name = recursion_only\n"
     "[coefficients]\n"
     "mu = 1.0\n"
     "[degiorgi]\n"
     "kind = scalar_bounded\n"
     "K = 10\n"
     "kmax = 10\n"
     "[exponents]\n"
     "alpha = 0.5\n"
     "p = 4\n"
     "q = 8\n"
     "r = 2\n"},
};

ScalarField build_mu_field(const ExperimentConfig& c, const Grid& g) {
    if (c.mu_kind == "const") return ScalarField(g, c.mu);
    // Striped discontinuous coefficient: mu or mu_high by sign of a sine.
    ScalarField mu(g, c.mu);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double x = g.coord(i, 0);
        if (std::sin(2.0 * pi * c.mu_stripes * x / g.length) > 0.0) mu[i] = c.mu_high;
    }
    return mu;
}

void apply_density_floor(ScalarField& rho, double floor) {
    if (floor <= 0.0) return;
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::max(rho[i], floor);
}

ScalarField gaussian_theta(const ExperimentConfig& c, const Grid& g) {
    ScalarField th(g);
    for (std::size_t i = 0; i < th.size(); ++i) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double d = std::fmod(g.coord(i, a) - c.blob_center, g.length);
            if (d < -0.5 * g.length) d += g.length;
            if (d >= 0.5 * g.length) d -= g.length;
            r2 += d * d;
        }
        th[i] = c.theta_amp * std::exp(-0.5 * r2 / (c.blob_width * c.blob_width));
    }
    return th;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_registry() { return kRegistry; }

const ScenarioInfo* find_scenario(const std::string& name) {
    for (const auto& s : kRegistry)
        if (s.name == name) return &s;
    return nullptr;
}

std::string list_scenarios_text() {
    std::ostringstream out;
    out << "registered scenarios:\n";
    for (const auto& s : kRegistry) {
        out << "  " << s.name << "\n    " << s.description << "\n    checks: " << s.hook
            << "\n";
    }
    return out.str();
}

ScalarRunConfig build_scalar_run(const ExperimentConfig& c) {
    const Grid g(c.dim, c.n, c.length);
    ScalarRunConfig rc;
    rc.T = c.T;
    rc.cfl = c.cfl;
    rc.max_dt = c.max_dt;
    rc.snapshot_every = c.snapshot_every;
    rc.mu = build_mu_field(c, g);

    if (c.scenario == "heat_sanity") {
        rc.theta0 = gaussian_theta(c, g);
        rc.transport0.rho = ScalarField(g, 1.0);
        rc.transport0.v = VectorField(g, g.dim, 0.0);
    } else if (c.scenario == "vacuum_blob") {
        ManufacturedParams mp;
        mp.amplitude = 1.0;
        mp.width = c.blob_width;
        mp.center = c.blob_center;
        mp.velocity = c.velocity;
        rc.transport0 = manufactured_pair(ManufacturedKind::vacuum_blob, mp, g, 0.0);
        rc.theta0 = c.theta_amp == 0.0 ? ScalarField(g) : gaussian_theta(c, g);
        rc.forcing.kind = ForcingSpec::Kind::rho_power;
        rc.forcing.amp = c.forcing_amp;
        rc.forcing.exponent = -c.forcing_alpha;
        rc.forcing.threshold = c.forcing_threshold;
    } else if (c.scenario == "rough_mu") {
        ManufacturedParams mp;
        mp.amplitude = 1.0;
        mp.width = c.blob_width;
        mp.center = c.blob_center;
        mp.velocity = c.velocity;
        mp.base = c.rho_base;
        rc.transport0 = manufactured_pair(ManufacturedKind::translate, mp, g, 0.0);
        rc.theta0 = gaussian_theta(c, g);
    } else {
        throw std::invalid_argument("build_scalar_run: scenario '" + c.scenario +
                                    "' is not a scalar scenario");
    }

    apply_density_floor(rc.transport0.rho, c.density_floor);

    const double scale = std::max({rc.theta0.max_abs(), 0.5 * c.forcing_amp * c.T, 1e-3});
    rc.battery = scalar_battery(scale);
    return rc;
}

SystemRunConfig build_system_run(const ExperimentConfig& c) {
    const Grid g(c.dim, c.n, c.length);
    SystemRunConfig rc;
    rc.T = c.T;
    rc.cfl = c.cfl;
    rc.max_dt = c.max_dt;
    rc.snapshot_every = c.snapshot_every;
    rc.mu = build_mu_field(c, g);
    rc.lambda = ScalarField(g, c.lambda);
    rc.kappa = c.kappa;
    rc.F0 = VectorField(g, 3, 0.0);

    if (c.scenario == "barotropic_forcing") {
        ManufacturedParams mp;
        mp.amplitude = 1.0;
        mp.width = c.blob_width;
        mp.center = c.blob_center;
        mp.velocity = c.velocity;
        mp.base = c.rho_base;
        rc.transport0 = manufactured_pair(ManufacturedKind::translate, mp, g, 0.0);
        rc.u0 = VectorField(g, 3, 0.0);
        // A gentle initial swirl keeps |u| nontrivial before the forcing acts.
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const double x = g.coord(i, 0);
            rc.u0.at(0, i) = c.u_amp * std::sin(2.0 * pi * x / g.length);
        }
        rc.barotropic.enabled = true;
        rc.barotropic.gamma = c.gamma;
        rc.barotropic.amp = 1.0;
    } else if (c.scenario == "system_kappa_sweep") {
        rc.transport0.rho = ScalarField(g, c.rho_base > 0.0 ? c.rho_base : 1.0);
        rc.transport0.v = VectorField(g, g.dim, 0.0);
        rc.u0 = VectorField(g, 3, 0.0);
        for (std::size_t i = 0; i < g.cells(); ++i) {
            double r2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                double d = std::fmod(g.coord(i, a) - c.blob_center, g.length);
                if (d < -0.5 * g.length) d += g.length;
                if (d >= 0.5 * g.length) d -= g.length;
                r2 += d * d;
            }
            const double s = std::sqrt(r2) / c.blob_width;
            const double z = 1.0 - s * s;
            rc.u0.at(0, i) = z > 0.0 ? c.u_amp * z * z * z : 0.0;
        }
    } else {
        throw std::invalid_argument("build_system_run: scenario '" + c.scenario +
                                    "' is not a system scenario");
    }

    apply_density_floor(rc.transport0.rho, c.density_floor);
    rc.battery = system_battery(std::max(rc.u0.magnitude().max(), 1e-3));
    return rc;
}

Trajectory make_scalar_trajectory(const ScalarRunResult& run, const ScalarField& mu) {
    Trajectory traj;
    if (run.snapshots.empty()) throw std::invalid_argument("make_scalar_trajectory: empty run");
    traj.grid = run.snapshots.front().theta.grid();
    traj.nu = mu;
    traj.lambda = ScalarField(traj.grid, 0.0);
    traj.kappa = 0.0;
    traj.T = run.snapshot_times.back();
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        Snapshot snap;
        snap.t = run.snapshot_times[s];
        snap.rho = run.snapshots[s].transport.rho;
        snap.u = VectorField(traj.grid, 3);
        const ScalarField& th = run.snapshots[s].theta;
        for (int j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < th.size(); ++i) snap.u.at(j, i) = th[i];
        traj.snaps.push_back(std::move(snap));
    }
    return traj;
}

Trajectory make_system_trajectory(const SystemRunResult& run, const ScalarField& mu,
                                  const ScalarField& lambda, double kappa) {
    Trajectory traj;
    if (run.snapshots.empty()) throw std::invalid_argument("make_system_trajectory: empty run");
    traj.grid = run.snapshots.front().u.grid();
    traj.nu = nu_field(mu, lambda);
    traj.lambda = lambda;
    traj.kappa = kappa;
    traj.T = run.snapshot_times.back();
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        Snapshot snap;
        snap.t = run.snapshot_times[s];
        snap.rho = run.snapshots[s].transport.rho;
        snap.u = run.snapshots[s].u;
        traj.snaps.push_back(std::move(snap));
    }
    return traj;
}

}  // namespace vbl
