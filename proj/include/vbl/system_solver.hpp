#pragma once
// Time stepping for the vector unknown u (3 components on a 1D/2D grid):
//   d_t(rho u) + div(rho v (x) u) - div(2 mu grad u) - grad(lambda div u)
//       = rho F + div(rho G),
// same splitting as the scalar module: upwind advection of (rho, rho u_j)
// with shared fluxes, then one coupled implicit solve. The implicit operator
// is coercive because nu = 2 mu + 3 lambda >= 1 bounds the divergence
// penalty from below; the grad(lambda div .) block couples the first
// grid.dim components.

#include <string>
#include <vector>

#include "vbl/continuity.hpp"
#include "vbl/convex.hpp"
#include "vbl/grid.hpp"
#include "vbl/scalar_solver.hpp"

namespace vbl {

// G_{ij}: i indexes grid axes (rows), j the 3 unknown components.
class MatrixField {
public:
    MatrixField() = default;
    MatrixField(const Grid& g, double fill = 0.0)
        : grid_(g), rows_(g.dim), v_(g.cells() * static_cast<std::size_t>(g.dim) * 3, fill) {}

    const Grid& grid() const { return grid_; }
    int rows() const { return rows_; }
    std::size_t cells() const { return grid_.cells(); }
    double at(int i, int j, std::size_t c) const { return v_[block(i, j) + c]; }
    double& at(int i, int j, std::size_t c) { return v_[block(i, j) + c]; }
    bool finite() const;

private:
    std::size_t block(int i, int j) const {
        return (static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(j)) * cells();
    }
    Grid grid_;
    int rows_ = 0;
    std::vector<double> v_;
};

struct SystemRunState {
    VectorField u;  // 3 components
    TransportState transport;
    ScalarField mu;      // mu >= 1
    ScalarField lambda;  // 3|lambda| <= kappa * nu, nu = 2 mu + 3 lambda >= 1
    VectorField F;       // 3 components
    MatrixField G;
    double kappa = 0.25;  // in (0, 1/2)
    double t = 0.0;
};

ScalarField nu_field(const ScalarField& mu, const ScalarField& lambda);

// Cellwise coefficient conditions; throws naming the violated one.
void validate_coefficients(const SystemRunState& s);

SystemRunState advance_velocity(const SystemRunState& s, double dt, StepInfo* info = nullptr);

struct SystemEnergyResidual {
    double residual = 0.0;
    double scale_terms = 0.0;
    double lambda_cross = 0.0;  // the lambda cross term (signed, per unit time)
};

// Residual of the vector energy inequality over one step. Left side: change
// of int rho phi(|u|) plus the two nu-weighted dissipation sums (face forms
// of int nu (phi'/|u|)|grad u|^2 and int nu [phi'' - phi'/|u|] |grad|u||^2,
// weighted with nu_eff = 2 mu + 3 min(lambda, 0)). Right side: the lambda
// cross term, the F term and the G term. Cells with |u| < 1e-30 contribute
// zero to the cross term. Requires phi admissible for the vector case.
SystemEnergyResidual system_energy_residual(const SystemRunState& before,
                                            const SystemRunState& after, double dt,
                                            const ConvexTestFunction& phi);

struct BarotropicSpec {
    bool enabled = false;
    double gamma = 2.0;  // G_ij = -amp * rho^{gamma-1} delta_ij
    double amp = 1.0;
};
MatrixField barotropic_g_field(const BarotropicSpec& spec, const ScalarField& rho);

struct SystemRunConfig {
    VectorField u0;  // 3 components
    TransportState transport0;
    ScalarField mu;
    ScalarField lambda;
    double kappa = 0.25;
    VectorField F0;  // static forcing (3 components)
    BarotropicSpec barotropic;
    double T = 0.1;
    double cfl = 0.45;
    double max_dt = 1e-3;
    int snapshot_every = 1;
    std::vector<ConvexTestFunction> battery;
};

struct SystemResidualRecord {
    int step = 0;
    double t = 0.0;
    std::string phi_label;
    double residual = 0.0;
    double scale = 0.0;
    double lambda_cross = 0.0;
};

struct SystemRunResult {
    std::vector<SystemRunState> snapshots;
    std::vector<double> snapshot_times;
    std::vector<SystemResidualRecord> residuals;
    std::vector<double> step_times;
    std::vector<double> step_max_mag;  // max|u| after each step
    double max_rel_residual = 0.0;
    int steps = 0;
    int max_cg_iterations = 0;
};

SystemRunResult run_system(const SystemRunConfig& cfg);

}  // namespace vbl
