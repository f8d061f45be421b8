#pragma once
// Uniform periodic grids in 1D/2D with cell-centered fields, second-order
// centered difference operators, and the plain / density-weighted /
// space-time norms shared by the solvers and the level-set analyzer.
//
// All reductions run in a fixed cell order so repeated runs are
// bit-identical.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace vbl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grid {
    int dim = 1;          // 1 or 2
    int n = 4;            // cells per axis
    double length = 1.0;  // edge length of the periodic box
    double h = 0.25;      // cell width, length / n

    Grid() = default;
    Grid(int dim_, int n_, double length_);

    std::size_t cells() const {
        return dim == 1 ? static_cast<std::size_t>(n)
                        : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    }
    double cell_volume() const { return dim == 1 ? h : h * h; }

    int wrap(int i) const {
        int m = i % n;
        return m < 0 ? m + n : m;
    }
    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(wrap(j)) * static_cast<std::size_t>(dim == 1 ? 0 : n) +
               static_cast<std::size_t>(wrap(i));
    }
    // Periodic neighbor of a flat index along an axis.
    std::size_t shift(std::size_t idx, int axis, int delta) const {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(n));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(n));
        if (axis == 0) return index(i + delta, j);
        return index(i, j + delta);
    }
    // Cell-center coordinate along an axis.
    double coord(std::size_t idx, int axis) const {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(n));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(n));
        return ((axis == 0 ? i : j) + 0.5) * h;
    }

    bool operator==(const Grid&) const = default;
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), v_(g.cells(), fill) {}

    static ScalarField from_function(const Grid& g, const std::function<double(double)>& f);
    static ScalarField from_function(const Grid& g,
                                     const std::function<double(double, double)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

    double max() const;
    double min() const;
    double max_abs() const;
    bool finite() const;

private:
    Grid grid_;
    std::vector<double> v_;
};

// Component-major storage: comp(c) is a contiguous block of grid.cells().
// Velocities carry grid.dim components; the system unknown carries 3.
class VectorField {
public:
    VectorField() = default;
    VectorField(const Grid& g, int ncomp, double fill = 0.0)
        : grid_(g), ncomp_(ncomp), v_(g.cells() * static_cast<std::size_t>(ncomp), fill) {}

    const Grid& grid() const { return grid_; }
    int ncomp() const { return ncomp_; }
    std::size_t cells() const { return grid_.cells(); }

    double at(int c, std::size_t i) const { return v_[block(c) + i]; }
    double& at(int c, std::size_t i) { return v_[block(c) + i]; }
    std::span<const double> comp(int c) const { return {v_.data() + block(c), cells()}; }
    std::span<double> comp(int c) { return {v_.data() + block(c), cells()}; }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

    ScalarField component(int c) const;
    ScalarField magnitude() const;  // cellwise Euclidean norm over components
    double max_abs() const;
    bool finite() const;

private:
    std::size_t block(int c) const { return static_cast<std::size_t>(c) * cells(); }
    Grid grid_;
    int ncomp_ = 0;
    std::vector<double> v_;
};

// Centered second-order periodic difference of f along an axis: (f[i+e]-f[i-e])/2h.
ScalarField axis_diff(const ScalarField& f, int axis);

// grad f: one component per grid axis.
VectorField gradient(const ScalarField& f);

// div w: sum of centered differences of the first grid.dim components.
// Adjoint to -gradient under the cell-sum inner product (summation by parts).
ScalarField divergence(const VectorField& w);

// Frobenius norm squared of the centered Jacobian: sum_{c,axis} (D_axis w_c)^2.
ScalarField grad_norm_sq(const VectorField& w);

double integral(const ScalarField& f);                               // sum f h^dim
double dot(const ScalarField& a, const ScalarField& b);              // sum a b h^dim
double weighted_l2(const ScalarField& f, const ScalarField& rho);    // sum rho f^2 h^dim

struct NormSpec {
    double p = 2.0;                // time exponent, may be kInf
    double q = 2.0;                // space exponent, may be kInf
    double weight_exponent = 0.0;  // exponent applied to rho inside the norm
};

// L^q norm over space of rho^w * f (cell sums weighted by h^dim; q = inf -> max).
double space_norm(const ScalarField& f, const ScalarField& rho, const NormSpec& spec);

// Discrete L^p-in-time of L^q-in-space over the window (t_start, T].
// Time quadrature is right-endpoint over snapshot intervals clipped to the
// window; p = inf takes the max over snapshots with t > t_start.
double space_time_norm(std::span<const double> times, std::span<const ScalarField> f,
                       std::span<const ScalarField> rho, const NormSpec& spec, double t_start);

}  // namespace vbl
