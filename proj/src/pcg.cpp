#include "vbl/pcg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbl {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

PcgResult pcg(const LinearOp& A, std::span<const double> b, std::span<double> x,
              std::span<const double> inv_diag, const PcgOptions& opt) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);

    A(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];

    const double bnorm = std::sqrt(dot(b, b));
    const double target = opt.rel_tol * (bnorm > 0.0 ? bnorm : 1.0);

    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= target) return {0, bnorm > 0.0 ? rnorm / bnorm : 0.0};

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i];
    double rz = dot(r, z);

    for (int it = 1; it <= opt.max_iter; ++it) {
        A(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) throw std::runtime_error("pcg: operator not positive definite");
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= target) return {it, bnorm > 0.0 ? rnorm / bnorm : 0.0};
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw std::runtime_error("pcg: iteration cap " + std::to_string(opt.max_iter) +
                             " reached with relative residual " +
                             std::to_string(bnorm > 0.0 ? rnorm / bnorm : rnorm));
}

}  // namespace vbl
