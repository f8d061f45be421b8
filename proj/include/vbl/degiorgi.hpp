#pragma once
// Level-set analysis of a stored trajectory: truncation energies U_k under
// threshold/time ladders, the pointwise truncation inequalities, the weighted
// interpolation and time-layer bounds (with calibrated embedding constants),
// the second-viscosity bound, the Chebyshev tail table, and the recursion fit
// that ties the measured U_k to the abstract decay lemmas.
//
// Everything here is a pure read-only measurement over snapshots; gradients
// are the centered ones from the grid module.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbl/grid.hpp"

namespace vbl {

enum class ScheduleKind { scalar_bounded, scalar_layer, system_bounded, system_layer };

const char* schedule_kind_name(ScheduleKind k);
std::optional<ScheduleKind> parse_schedule_kind(const std::string& s);

// Threshold ladder C_k and time ladder T_k.
//   scalar kinds: C_k = K (1 - 2^-k)   (C_k increases to K)
//   system kinds: C_k = K 2^k
//   bounded kinds: T_k = 0; layer kinds: T_k = t0 (1 - eta^k), so that
//   T_k - T_{k-1} = t0 eta^{k-1} (1 - eta) > 0.
struct LevelSchedule {
    ScheduleKind kind = ScheduleKind::scalar_bounded;
    double K = 1.0;
    double t0 = 0.0;
    double eta = 0.5;
    int kmax = 10;

    bool scalar() const {
        return kind == ScheduleKind::scalar_bounded || kind == ScheduleKind::scalar_layer;
    }
    bool layer() const {
        return kind == ScheduleKind::scalar_layer || kind == ScheduleKind::system_layer;
    }
    double C(int k) const;
    double Tk(int k) const;
    void validate() const;
};

struct Snapshot {
    double t = 0.0;
    ScalarField rho;
    VectorField u;  // 3 components
};

struct Trajectory {
    Grid grid;
    std::vector<Snapshot> snaps;
    ScalarField nu;      // static coefficient field (>= 1)
    ScalarField lambda;  // zero for scalar-derived trajectories
    double kappa = 0.0;  // 0 marks "no second viscosity"
    double T = 0.0;      // final time

    std::vector<double> times() const;
};

// --- pointwise level-set objects ---------------------------------------

// (|u| - C)_+ cellwise.
ScalarField truncate(const VectorField& u, double C);

// d_k with centered gradients:
//   d_k^2 = (C 1_{|u|>=C} / |u|) |grad|u||^2 + (v_k / |u|) |grad u|^2,
// zero where |u| = 0.
ScalarField dk_field(const VectorField& u, double C);

// r_k = (div u) (u . grad|u|) C / |u|^2 on {|u| >= C}.
ScalarField rk_field(const VectorField& u, double C);

// --- level energies ------------------------------------------------------

struct LevelEnergy {
    double U = 0.0;
    double sup_part = 0.0;   // sup over snapshots with t > T_k of int rho v_k^2 / 2
    double diss_part = 0.0;  // integral over (T_k, T] of int nu d_k^2
};

// Throws if the window (T_k, T] is empty.
LevelEnergy level_energy(const Trajectory& traj, const LevelSchedule& sched, int k);

// --- pointwise truncation inequalities ----------------------------------

struct AppendixCheck {
    std::string name;
    double worst_violation = 0.0;  // max(0, lhs - rhs) over cells
};

struct AppendixReport {
    std::vector<AppendixCheck> checks;
    double worst() const;
};

// The five pointwise bounds tied to the splitting u = u v_k/|u| + u(1 - v_k/|u|):
//   |u (1 - v_k/|u|)| <= C                  (exact algebra)
//   (v_k/|u|) |grad u| <= d_k               (exact algebra)
//   1_{|u|>=C} |grad|u|| <= d_k             (exact given centered gradients)
//   |grad v_k| <= d_k                       (checked against d_k on the stencil)
//   |grad(u v_k/|u|)| <= 3 d_k              (same stencil comparison)
// The last two compare against the max of d_k over the centered-difference
// stencil, since the difference at a cell samples its neighbors; violations
// on smooth fields shrink like h.
AppendixReport check_appendix(const VectorField& u, double C);

// --- integrability exponents ---------------------------------------------

struct SourceExponents {
    double alpha = 0.5;  // in (0,1)
    double p = 4.0;      // time exponent of the source norm (may be kInf)
    double q = 8.0;      // space exponent (may be kInf)
    double r = 2.0;      // density integrability exponent, > 3/2 for layer kinds

    // Largest beta > 1 usable in the source estimates:
    // beta = min(2 - alpha - 1/p, 1 + 2 alpha - 3/q).
    double derive_beta() const;
    std::vector<std::string> validate(bool layer) const;
};

// --- interpolation / embedding checks ------------------------------------

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;  // calibrated constant included
    bool pass = false;
};

// || rho^alpha v_k^{2 beta} ||_{L^{p1}(T_k,T;L^{q1})} <= C_S U_k^beta with
// p1 = 1/(beta - alpha), q1 = 3/(2 alpha + beta). Requires 0 < alpha < 1 < beta,
// p1 >= 1 and q1 >= 1; violations are named. C_S is the calibrated constant.
BoundCheck check_interpolation(const Trajectory& traj, const LevelSchedule& sched, int k,
                               double alpha, double beta, double C_S);

// Largest lhs/U_k^beta ratio over k <= sched.kmax and the (alpha, beta) probe
// set; the stability of this constant under refinement is the testable
// surrogate for the unquantified embedding constant.
double calibrate_interpolation_constant(const Trajectory& traj, const LevelSchedule& sched,
                                        std::span<const std::pair<double, double>> probes);

// Special case used by the model cascade: || rho^{1/5} theta_{k-1} ||^2_{L^{10/3}}
// <= C U_{k-1} with theta = |u|/sqrt(3) and the matching scalar energy.
BoundCheck check_sobolev_special(const Trajectory& traj, const LevelSchedule& sched, int k,
                                 double C_S);
double calibrate_sobolev_special_constant(const Trajectory& traj, const LevelSchedule& sched);

// Time-layer bound (layer schedules, r > 3/2):
//   (T_k - T_{k-1})^{-1} int_{T_{k-1}}^{T_k} int rho v_k^2/2
//     <= C_S (t0 eta^{k-1}(1-eta))^{-1} (C_k - C_{k-1})^{-2a/3}
//        ||rho||_{Linf Lr}^{(3-a)/3} U_{k-1}^{1 + a/3},   a = (2r-3)/(r-1).
BoundCheck check_time_layer(const Trajectory& traj, const LevelSchedule& sched, int k, double r,
                            double C_S);
double calibrate_time_layer_constant(const Trajectory& traj, const LevelSchedule& sched,
                                     double r);

// Second viscosity: |int int lambda r_k| <= sqrt(2/3) kappa U_{k-1} over
// (T_{k-1}, T]. System schedules only (the scalar ladder makes
// C_k/(C_k - C_{k-1}) unbounded). Pass tolerance is (1 + 1e-6).
BoundCheck check_second_viscosity(const Trajectory& traj, const LevelSchedule& sched, int k);

// --- recursion fit ---------------------------------------------------------

struct RecursionFit {
    bool pass = false;
    double A_fit = 0.0;  // smallest prefactor closing the inequality for all usable k
    double beta1 = 0.0, beta2 = 0.0, gamma = 0.0;  // exponents used
    double empirical_beta = 0.0;  // least-squares slope of the log-log recursion
    int levels_used = 0;
    std::vector<double> slack;  // per-k log-slack (rhs/lhs)
    std::string note;
};

// Fits the measured U_k against
//   scalar: U_k <= A_fit (A_p^k / K^gamma) (U_{k-1}^{beta1} + U_{k-1}^{beta2})
//   system: U_k <= A_fit (U_{k-1}^{beta1} + U_{k-1}^{beta2}) / K^gamma
//                 + eps kappa U_{k-1}
// with beta1 = (1+beta)/2, beta2 = beta, gamma = 2 beta - 1, A_p = 2^gamma,
// beta from the exponents and eps = sqrt(2/3). U_{k-1} = 0 with U_k > 0 is a
// hard failure.
RecursionFit check_recursion(std::span<const double> U, const LevelSchedule& sched,
                             const SourceExponents& exps, double kappa = 0.0);

// --- Chebyshev tails --------------------------------------------------------

struct TailRow {
    int k = 0;
    double C_k = 0.0;
    double measure = 0.0;  // space-time Lebesgue measure of {|u| >= 2 C_k}, t > T_k
    double bound = 0.0;    // U_k / C_k^2
    bool exact_ok = false; // measure <= bound (+ roundoff)
};

struct TailTable {
    std::vector<TailRow> rows;
    double fitted_exponent = 0.0;  // p-hat from measure ~ 2^{-p k}; +inf if tails empty
    double target_exponent = 0.0;  // 2 + log2(1/kappa)
    int positive_levels = 0;
    std::string note;
};

// System schedules only. The measure <= U_k/C_k^2 inequality is asserted per
// level; the exponent fit uses levels with positive measure.
TailTable chebyshev_tail(const Trajectory& traj, const LevelSchedule& sched);

double tail_target_exponent(double kappa);  // 2 + log2(1/kappa)

// --- terminal check ---------------------------------------------------------

struct GradientVanishing {
    bool pass = false;
    double worst_excess = 0.0;  // max over window of (|u| - K)_+
    double t_at = 0.0;
    std::size_t cell_at = 0;
};

// Verifies (|u| - K)_+ = 0 (within 1e-12) at every cell for t > sup_k T_k:
// the sup bound K is realized on the trajectory.
GradientVanishing gradient_vanishing(const Trajectory& traj, const LevelSchedule& sched,
                                     double K);

}  // namespace vbl
