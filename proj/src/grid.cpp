#include "vbl/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace vbl {

Grid::Grid(int dim_, int n_, double length_) : dim(dim_), n(n_), length(length_) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
    if (n < 4) throw std::invalid_argument("Grid: need n >= 4 cells per axis");
    if (!(length > 0.0)) throw std::invalid_argument("Grid: length must be positive");
    h = length / n;
}

ScalarField ScalarField::from_function(const Grid& g, const std::function<double(double)>& f) {
    if (g.dim != 1) throw std::invalid_argument("from_function(1D) requires dim == 1");
    ScalarField out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(g.coord(i, 0));
    return out;
}

ScalarField ScalarField::from_function(const Grid& g,
                                       const std::function<double(double, double)>& f) {
    if (g.dim != 2) throw std::invalid_argument("from_function(2D) requires dim == 2");
    ScalarField out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(g.coord(i, 0), g.coord(i, 1));
    return out;
}

double ScalarField::max() const {
    double m = -kInf;
    for (double x : v_) m = x > m ? x : m;
    return m;
}

double ScalarField::min() const {
    double m = kInf;
    for (double x : v_) m = x < m ? x : m;
    return m;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : v_) {
        const double a = std::fabs(x);
        m = a > m ? a : m;
    }
    return m;
}

bool ScalarField::finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

ScalarField VectorField::component(int c) const {
    ScalarField out(grid_);
    const auto s = comp(c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i];
    return out;
}

ScalarField VectorField::magnitude() const {
    ScalarField out(grid_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < ncomp_; ++c) {
            const double x = at(c, i);
            s += x * x;
        }
        out[i] = std::sqrt(s);
    }
    return out;
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (double x : v_) {
        const double a = std::fabs(x);
        m = a > m ? a : m;
    }
    return m;
}

bool VectorField::finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

ScalarField axis_diff(const ScalarField& f, int axis) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("axis_diff: axis out of range");
    ScalarField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (f[g.shift(i, axis, +1)] - f[g.shift(i, axis, -1)]) * inv2h;
    return out;
}

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid();
    VectorField out(g, g.dim);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int a = 0; a < g.dim; ++a) {
        auto c = out.comp(a);
        for (std::size_t i = 0; i < f.size(); ++i)
            c[i] = (f[g.shift(i, a, +1)] - f[g.shift(i, a, -1)]) * inv2h;
    }
    return out;
}

ScalarField divergence(const VectorField& w) {
    const Grid& g = w.grid();
    if (w.ncomp() < g.dim)
        throw std::invalid_argument("divergence: field has fewer components than grid axes");
    ScalarField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int a = 0; a < g.dim; ++a) {
        const auto c = w.comp(a);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += (c[g.shift(i, a, +1)] - c[g.shift(i, a, -1)]) * inv2h;
    }
    return out;
}

ScalarField grad_norm_sq(const VectorField& w) {
    const Grid& g = w.grid();
    ScalarField out(g);
    const double inv2h = 1.0 / (2.0 * g.h);
    for (int c = 0; c < w.ncomp(); ++c) {
        const auto s = w.comp(c);
        for (int a = 0; a < g.dim; ++a) {
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double d = (s[g.shift(i, a, +1)] - s[g.shift(i, a, -1)]) * inv2h;
                out[i] += d * d;
            }
        }
    }
    return out;
}

double integral(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
    return s * f.grid().cell_volume();
}

double dot(const ScalarField& a, const ScalarField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid().cell_volume();
}

double weighted_l2(const ScalarField& f, const ScalarField& rho) {
    if (f.size() != rho.size()) throw std::invalid_argument("weighted_l2: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (rho[i] < 0.0) throw std::invalid_argument("weighted_l2: negative density");
        s += rho[i] * f[i] * f[i];
    }
    return s * f.grid().cell_volume();
}

namespace {

double weighted_value(double rho, double w, double f) {
    if (w == 0.0) return f;
    return std::pow(rho, w) * f;
}

}  // namespace

double space_norm(const ScalarField& f, const ScalarField& rho, const NormSpec& spec) {
    if (spec.q < 1.0) throw std::invalid_argument("space_norm: require q >= 1");
    if (f.size() != rho.size()) throw std::invalid_argument("space_norm: size mismatch");
    const double vol = f.grid().cell_volume();
    if (spec.q == kInf) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double a = std::fabs(weighted_value(rho[i], spec.weight_exponent, f[i]));
            m = a > m ? a : m;
        }
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        s += std::pow(std::fabs(weighted_value(rho[i], spec.weight_exponent, f[i])), spec.q);
    return std::pow(s * vol, 1.0 / spec.q);
}

double space_time_norm(std::span<const double> times, std::span<const ScalarField> f,
                       std::span<const ScalarField> rho, const NormSpec& spec, double t_start) {
    if (spec.p < 1.0 || spec.q < 1.0)
        throw std::invalid_argument("space_time_norm: require p >= 1 and q >= 1");
    if (times.size() != f.size() || times.size() != rho.size())
        throw std::invalid_argument("space_time_norm: trajectory length mismatch");
    if (times.empty()) return 0.0;

    if (spec.p == kInf) {
        double m = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] > t_start)) continue;
            const double s = space_norm(f[i], rho[i], spec);
            m = s > m ? s : m;
        }
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > t_start)) continue;
        const double w = times[i] - std::max(times[i - 1], t_start);
        if (!(w > 0.0)) continue;
        acc += w * std::pow(space_norm(f[i], rho[i], spec), spec.p);
    }
    return std::pow(acc, 1.0 / spec.p);
}

}  // namespace vbl
