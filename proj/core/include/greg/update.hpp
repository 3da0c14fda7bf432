#pragma once

#include "greg/activation.hpp"
#include "greg/linear_init.hpp"
#include "greg/toeplitz.hpp"
#include "greg/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace greg {

// Values of the fixed functions f^1..f^r on the current sample columns.
// For the raw-input fixed function this is just the data matrix itself.
using FixedValues = std::vector<std::reference_wrapper<const Matrix>>;

// Raw steepest-descent direction parameters before momentum mixing:
//   w0 = E[Gamma(f) D^T z f^T],  wk = E[Gamma(f) D^T z (f^k)^T],
//   b  = E[Gamma(f) D^T z].
struct Direction {
    Matrix w0;               // d x d
    std::vector<Matrix> wk;  // r entries, d x d_k
    Vector b;                // d
};

// Exponentially mixed direction parameters. The update is literally
// v <- alpha v + w (no 1-alpha scaling); magnitudes are controlled by the
// step policy, not by the mixing.
struct Momentum {
    Matrix v0;
    std::vector<Matrix> vk;
    Vector e;
    double alpha0 = 0.0;
    std::vector<double> alpha;  // alpha[k-1] mixes vk[k-1]
    double beta = 0.0;

    static Momentum zero(Index d, const std::vector<Index>& dk, double alpha0,
                         std::vector<double> alpha, double beta);
};

// Z = Y - D F - c 1^T.
Matrix residual(const Eigen::Ref<const Matrix>& Y, const Eigen::Ref<const Matrix>& F,
                const AffineHead& head, int workers = 1);

Direction compute_direction(const Eigen::Ref<const Matrix>& F, const FixedValues& fk,
                            const Eigen::Ref<const Matrix>& Z,
                            const Eigen::Ref<const Matrix>& D, const Activation& act,
                            int workers = 1);

void momentum_update(Momentum& state, const Direction& dir);

// Per-sample update field psi = Gamma(f)[v0 f + sum_k vk f^k + e], one column
// per sample. The v0 term may be given either densely or as a convolution
// kernel over a grid structure.
Matrix direction_vector(const Momentum& state, const Eigen::Ref<const Matrix>& F,
                        const FixedValues& fk, const Activation& act, int workers = 1);

Matrix layer_direction_vector(const Activation& act, const Matrix* v0_dense,
                              const ConvStructure* conv, const Vector* conv_kernel,
                              const std::vector<Matrix>& vk, const Vector& e,
                              const Eigen::Ref<const Matrix>& F, const FixedValues& fk,
                              int workers = 1);

// Exact minimizer of L(mu) = E||z - mu D psi||^2, i.e.
// mu = E[z^T D psi] / E[||D psi||^2]. Empty optional when the denominator
// vanishes (degenerate direction; the caller stops the stage).
std::optional<double> line_search_step(const Eigen::Ref<const Matrix>& Z,
                                       const Eigen::Ref<const Matrix>& Dpsi,
                                       int workers = 1);

}  // namespace greg
