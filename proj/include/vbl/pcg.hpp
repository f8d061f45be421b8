#pragma once
// Preconditioned conjugate gradients for the SPD implicit-step operators.
// Matrix-free: the caller supplies the operator apply and the inverse
// diagonal. Deterministic: fixed-order reductions, no parallel sums.

#include <functional>
#include <span>

namespace vbl {

using LinearOp = std::function<void(std::span<const double>, std::span<double>)>;

struct PcgOptions {
    double rel_tol = 1e-10;  // on the true residual, relative to ||b||
    int max_iter = 1000;     // hitting the cap is a hard error, never silent
};

struct PcgResult {
    int iterations = 0;
    double rel_residual = 0.0;
};

// Solves A x = b starting from the given x. Throws std::runtime_error if the
// iteration cap is reached before the tolerance.
PcgResult pcg(const LinearOp& A, std::span<const double> b, std::span<double> x,
              std::span<const double> inv_diag, const PcgOptions& opt);

}  // namespace vbl
