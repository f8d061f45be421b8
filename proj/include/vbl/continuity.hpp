#pragma once
// Density/velocity pairs satisfying the continuity equation
//   d_t rho + div(rho v) = 0,
// either stepped by conservative first-order upwind transport or built from
// manufactured exact solutions. Upwind keeps rho >= 0 and conserves mass to
// roundoff, which is what the downstream inequality checks need; accuracy is
// secondary here.

#include <span>
#include <vector>

#include "vbl/grid.hpp"

namespace vbl {

// Floor used when the velocity is identically zero; callers cap the
// resulting dt with their configured max_dt.
inline constexpr double kTinyVelocity = 1e-30;

struct TransportState {
    ScalarField rho;
    VectorField v;  // grid.dim components
    double t = 0.0;
};

// dt = cfl * h / max(|v|_inf, tiny).
double cfl_dt(const VectorField& v, const Grid& g, double cfl);

// Sharp positivity bound for the upwind update: a step of size dt keeps
// rho >= 0 (and the advected cell averages convex combinations) iff
// dt * max_outflow_factor <= 1. The factor is the worst-case cellwise sum
// over axes of outgoing face speeds divided by h.
double max_outflow_factor(const VectorField& v, const Grid& g);

struct UpwindResult {
    ScalarField rho;                       // updated density
    std::vector<ScalarField> transported;  // updated rho*q for each carried q
};

// One conservative upwind step of rho and any cell quantities q carried with
// the same face fluxes (so q rides the same discrete characteristics).
// Face velocities are arithmetic means of the adjacent cells.
// Throws if dt violates the sharp positivity bound.
UpwindResult upwind_transport(const TransportState& s, std::span<const ScalarField> carried,
                              double dt);

TransportState advance_density(const TransportState& s, double dt);

enum class ManufacturedKind { translate, vacuum_blob, compressive_1d };

struct ManufacturedParams {
    double amplitude = 1.0;
    double width = 0.15;    // absolute width of the profile
    double center = 0.3;    // initial profile center (axis 0; same on axis 1 in 2D)
    double velocity = 0.8;  // constant advection speed (per axis for translate kinds)
    double base = 0.0;      // additive base density (translate only)
    double period = 1.0;    // compressive_1d: domain traversal time T0
    double modulation = 0.4;  // compressive_1d: velocity modulation in (0,1)
};

// Exact-in-the-continuum (rho, v) at time t:
//   translate       rho0(x - vt), constant v, rho0 a periodized Gaussian + base
//   vacuum_blob     compactly supported C^2 bump translated (exact zeros outside)
//   compressive_1d  steady v(x) = L / (T0 (1 + eps cos(2 pi x / L))),
//                   rho from the characteristics of the conservation law
TransportState manufactured_pair(ManufacturedKind kind, const ManufacturedParams& p,
                                 const Grid& g, double t);

}  // namespace vbl
