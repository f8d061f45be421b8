#pragma once
// Time stepping for the advected-diffused scalar
//   d_t(rho theta) + div(rho v theta) - div(mu grad theta) = rho F + div(rho G)
// in the form that keeps the convex energy inequality checkable per step:
// explicit conservative upwind advection of (rho, rho*theta) with shared face
// fluxes, then a backward-Euler diffusion solve
//   (rho^{n+1}/dt) theta^{n+1} - div(mu grad theta^{n+1})
//       = (rho theta)^* / dt + rho^{n+1} F + div(rho^{n+1} G).
// The implicit matrix stays SPD on cavities (rho = 0) because mu >= 1; a
// globally constant nullspace can only appear when rho vanishes identically
// and is pinned by fixing the mean.

#include <string>
#include <vector>

#include "vbl/continuity.hpp"
#include "vbl/convex.hpp"
#include "vbl/grid.hpp"

namespace vbl {

struct ForcingSpec {
    enum class Kind { none, constant, rho_power };
    Kind kind = Kind::none;
    double amp = 0.0;
    double exponent = 0.0;   // rho_power: value = amp * rho^exponent (may be negative)
    double threshold = 0.0;  // rho_power active only where rho >= threshold (and rho > 0)
};

// Cellwise forcing from the density. Vacuum convention: where rho = 0 the
// stored value is 0 (the equation only ever sees rho * F).
ScalarField scalar_forcing_field(const ForcingSpec& spec, const ScalarField& rho);

struct GSpec {
    ForcingSpec f;
    int axis = 0;  // component of G that carries the profile
};
VectorField scalar_g_field(const GSpec& spec, const ScalarField& rho);

struct ScalarRunState {
    ScalarField theta;
    TransportState transport;
    ScalarField mu;  // mu >= 1 cellwise
    ScalarField F;   // forcing applied over the next step
    VectorField G;   // grid.dim components
    double t = 0.0;
};

struct StepInfo {
    int cg_iterations = 0;
    double cg_rel_residual = 0.0;
};

// One step; dt must satisfy the advective positivity bound. Linear solve is
// diagonally preconditioned CG at relative tolerance 1e-10 with an iteration
// cap of 10 * n^dim; hitting the cap throws.
ScalarRunState advance_scalar(const ScalarRunState& s, double dt, StepInfo* info = nullptr);

struct EnergyResidual {
    double residual = 0.0;     // left minus right of the energy inequality
    double scale_terms = 0.0;  // sum of absolute term magnitudes
};

// Residual of the convex energy inequality over one step:
//   R = [int rho phi(theta)]^{n+1} - [...]^n + dt * D - dt * int rho F phi'
//       - dt * int phi' div(rho G)
// with D the face-based dissipation sum mu_f (phi'(th_b)-phi'(th_a))(th_b-th_a)/h^2,
// the discrete counterpart of int mu phi''(theta)|grad theta|^2 (mean value of
// phi'' at faces). Sources are the ones the step applied (taken from
// `before`), weighted by the post-step density. The scheme is suitable when
// R <= tol. Inadmissible phi throws.
EnergyResidual energy_residual(const ScalarRunState& before, const ScalarRunState& after,
                               double dt, const ConvexTestFunction& phi);

struct ScalarRunConfig {
    ScalarField theta0;
    TransportState transport0;
    ScalarField mu;
    ForcingSpec forcing;
    GSpec gforcing;
    double T = 0.1;
    double cfl = 0.45;
    double max_dt = 1e-3;
    int snapshot_every = 1;  // in steps; initial and final always recorded
    std::vector<ConvexTestFunction> battery;
};

struct ResidualRecord {
    int step = 0;
    double t = 0.0;  // time after the step
    std::string phi_label;
    double residual = 0.0;
    double scale = 0.0;  // per-step problem scale (square-phi terms)
};

struct ScalarRunResult {
    std::vector<ScalarRunState> snapshots;
    std::vector<double> snapshot_times;
    std::vector<ResidualRecord> residuals;
    std::vector<double> step_times;    // time after each step (step 0 = initial)
    std::vector<double> step_max_abs;  // max|theta| at those times
    double max_rel_residual = 0.0;
    int steps = 0;
    int max_cg_iterations = 0;
};

ScalarRunResult run_scalar(const ScalarRunConfig& cfg);

}  // namespace vbl
