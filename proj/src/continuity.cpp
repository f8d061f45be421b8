#include "vbl/continuity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vbl {

double cfl_dt(const VectorField& v, const Grid& g, double cfl) {
    if (!(cfl > 0.0) || cfl > 1.0) throw std::invalid_argument("cfl_dt: need 0 < cfl <= 1");
    const double vmax = v.max_abs();
    return cfl * g.h / (vmax > kTinyVelocity ? vmax : kTinyVelocity);
}

double max_outflow_factor(const VectorField& v, const Grid& g) {
    if (v.ncomp() < g.dim) throw std::invalid_argument("max_outflow_factor: missing components");
    double worst = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double s = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const auto c = v.comp(a);
            const double vf_plus = 0.5 * (c[i] + c[g.shift(i, a, +1)]);
            const double vf_minus = 0.5 * (c[g.shift(i, a, -1)] + c[i]);
            s += std::max(vf_plus, 0.0) + std::max(-vf_minus, 0.0);
        }
        worst = s > worst ? s : worst;
    }
    return worst / g.h;
}

UpwindResult upwind_transport(const TransportState& s, std::span<const ScalarField> carried,
                              double dt) {
    const Grid& g = s.rho.grid();
    if (!(dt > 0.0)) throw std::invalid_argument("upwind_transport: dt must be positive");
    const double factor = max_outflow_factor(s.v, g);
    if (dt * factor > 1.0 + 1e-12)
        throw std::invalid_argument("upwind_transport: dt violates the positivity CFL bound");

    UpwindResult out;
    out.rho = s.rho;
    out.transported.reserve(carried.size());
    for (const auto& q : carried) {
        (void)q;
        out.transported.emplace_back(g);
    }
    // Start transported fields from rho*q.
    for (std::size_t m = 0; m < carried.size(); ++m)
        for (std::size_t i = 0; i < g.cells(); ++i)
            out.transported[m][i] = s.rho[i] * carried[m][i];

    const double lam = dt / g.h;
    for (int a = 0; a < g.dim; ++a) {
        // Flux differences accumulate axis by axis on the time-n fields
        // (unsplit update: rho' = rho - lam * sum_axes dF_axis).
        const auto vc = s.v.comp(a);
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const std::size_t ip = g.shift(i, a, +1);
            const std::size_t im = g.shift(i, a, -1);
            const double vf_p = 0.5 * (vc[i] + vc[ip]);
            const double vf_m = 0.5 * (vc[im] + vc[i]);
            const double ap_p = std::max(vf_p, 0.0), am_p = std::min(vf_p, 0.0);
            const double ap_m = std::max(vf_m, 0.0), am_m = std::min(vf_m, 0.0);

            const double flux_p_rho = ap_p * s.rho[i] + am_p * s.rho[ip];
            const double flux_m_rho = ap_m * s.rho[im] + am_m * s.rho[i];
            out.rho[i] -= lam * (flux_p_rho - flux_m_rho);

            for (std::size_t m = 0; m < carried.size(); ++m) {
                const ScalarField& q = carried[m];
                const double flux_p = ap_p * s.rho[i] * q[i] + am_p * s.rho[ip] * q[ip];
                const double flux_m = ap_m * s.rho[im] * q[im] + am_m * s.rho[i] * q[i];
                out.transported[m][i] -= lam * (flux_p - flux_m);
            }
        }
    }
    // Clamp the -0.0 / roundoff shadow so downstream rho >= 0 checks are exact.
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (out.rho[i] < 0.0 && out.rho[i] > -1e-300) out.rho[i] = 0.0;
    return out;
}

TransportState advance_density(const TransportState& s, double dt) {
    TransportState out;
    out.rho = upwind_transport(s, {}, dt).rho;
    out.v = s.v;
    out.t = s.t + dt;
    return out;
}

namespace {

using std::numbers::pi;

// Distance to c on the periodic axis of length L, in [-L/2, L/2).
double periodic_dist(double x, double c, double L) {
    double d = std::fmod(x - c, L);
    if (d < -0.5 * L) d += L;
    if (d >= 0.5 * L) d -= L;
    return d;
}

double periodized_gaussian(double x, double c, double sigma, double L) {
    double s = 0.0;
    for (int m = -12; m <= 12; ++m) {
        const double d = x - c - m * L;
        s += std::exp(-0.5 * d * d / (sigma * sigma));
    }
    return s;
}

// C^2 compact bump: (1 - s^2)^3 on |s| < 1, exactly zero outside.
double bump3(double s) {
    const double z = 1.0 - s * s;
    return z > 0.0 ? z * z * z : 0.0;
}

struct CompressiveFlow {
    double L, T0, eps;
    double v(double x) const { return L / (T0 * (1.0 + eps * std::cos(2.0 * pi * x / L))); }
    // Travel time from 0 to x along the characteristic: integral of 1/v.
    double tau(double x) const {
        return (T0 / L) * (x + eps * L / (2.0 * pi) * std::sin(2.0 * pi * x / L));
    }
    // Invert tau (strictly increasing, tau(L) = T0) by Newton with bisection
    // fallback; s is reduced to [0, T0).
    double tau_inverse(double s) const {
        double wraps = std::floor(s / T0);
        s -= wraps * T0;
        double lo = 0.0, hi = L;
        double x = s / T0 * L;
        for (int it = 0; it < 100; ++it) {
            const double f = tau(x) - s;
            if (f > 0.0) hi = x; else lo = x;
            const double step = f * v(x);
            double xn = x - step;
            if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
            if (std::fabs(xn - x) < 1e-15 * L) { x = xn; break; }
            x = xn;
        }
        return x + wraps * L;
    }
};

}  // namespace

TransportState manufactured_pair(ManufacturedKind kind, const ManufacturedParams& p,
                                 const Grid& g, double t) {
    TransportState out;
    out.t = t;
    switch (kind) {
        case ManufacturedKind::translate: {
            out.v = VectorField(g, g.dim, p.velocity);
            out.rho = ScalarField(g);
            for (std::size_t i = 0; i < g.cells(); ++i) {
                double r = 1.0;
                for (int a = 0; a < g.dim; ++a)
                    r *= periodized_gaussian(g.coord(i, a), p.center + p.velocity * t, p.width,
                                             g.length);
                out.rho[i] = p.base + p.amplitude * r;
            }
            return out;
        }
        case ManufacturedKind::vacuum_blob: {
            out.v = VectorField(g, g.dim, p.velocity);
            out.rho = ScalarField(g);
            for (std::size_t i = 0; i < g.cells(); ++i) {
                double r2 = 0.0;
                for (int a = 0; a < g.dim; ++a) {
                    const double d =
                        periodic_dist(g.coord(i, a), p.center + p.velocity * t, g.length);
                    r2 += d * d;
                }
                out.rho[i] = p.amplitude * bump3(std::sqrt(r2) / p.width);
            }
            return out;
        }
        case ManufacturedKind::compressive_1d: {
            if (g.dim != 1)
                throw std::invalid_argument("manufactured_pair: compressive_1d requires dim == 1");
            if (!(p.modulation > 0.0) || p.modulation >= 1.0)
                throw std::invalid_argument("manufactured_pair: modulation must lie in (0,1)");
            const CompressiveFlow flow{g.length, p.period, p.modulation};
            out.v = VectorField(g, 1);
            out.rho = ScalarField(g);
            for (std::size_t i = 0; i < g.cells(); ++i) {
                const double x = g.coord(i, 0);
                out.v.at(0, i) = flow.v(x);
                // m = rho*v is constant along characteristics of the steady flow.
                const double x0 = flow.tau_inverse(flow.tau(x) - t);
                const double rho0 =
                    p.base + p.amplitude * periodized_gaussian(x0, p.center, p.width, g.length);
                out.rho[i] = rho0 * flow.v(x0) / flow.v(x);
            }
            return out;
        }
    }
    throw std::invalid_argument("manufactured_pair: unknown kind");
}

}  // namespace vbl
