#pragma once

#include "greg/activation.hpp"
#include "greg/linear_init.hpp"
#include "greg/toeplitz.hpp"
#include "greg/types.hpp"
#include "greg/update.hpp"

#include <cstdint>
#include <vector>

namespace greg {

enum class LayerKind : uint8_t { plain = 0, conv = 1 };

// Kernel coefficients plus the grid geometry they act on.
struct ConvKernel {
    Index grid_rows = 0;
    Index grid_cols = 0;
    Index window = 0;
    Vector coeffs;  // window^2, offsets in build_conv_structure order
};

// One trained layer: a snapshot of the mixed direction parameters together
// with the step size that was taken along them.
struct Layer {
    LayerKind kind = LayerKind::plain;
    Matrix v0;             // d x d, plain layers
    ConvKernel v0_kernel;  // conv layers
    std::vector<Matrix> vk;
    Vector e;
    double mu = 0.0;
};

// Inventory of supported fixed functions f^k.
enum class FixedFunction : uint32_t { raw_input = 0 };

// The model is the optimization trajectory itself: a reduction, an ordered
// stack of layers replayed one by one, and an affine readout.
struct ModelState {
    Matrix U;  // d x n
    AffineHead head;
    Activation act;
    std::vector<FixedFunction> fixed;  // size r
    std::vector<Layer> layers;

    Index n() const { return U.cols(); }
    Index d() const { return U.rows(); }
    Index m() const { return head.D.rows(); }
};

// Values of the model's fixed functions on a sample batch. raw_input aliases
// the batch itself, so the returned refs are only valid while X lives.
FixedValues fixed_values(const ModelState& model, const Matrix& X);

// F += mu * Gamma(F)[v0 F + sum_k vk f^k + e] for every column.
void apply_layer(const Layer& layer, const Activation& act,
                 const FixedValues& fk, Matrix& F, int workers = 1);

// f0 = U x, then every layer in order.
Vector forward(const ModelState& model, const Eigen::Ref<const Vector>& x);
Matrix forward_batch(const ModelState& model, const Matrix& X, int workers = 1);

// argmax of D forward(x) + c, ties to the smallest index.
Index predict(const ModelState& model, const Eigen::Ref<const Vector>& x);

// One modified residual-network step f' = g(W f + b) - g(f) + f.
Vector resnet_step(const Eigen::Ref<const Matrix>& W, const Eigen::Ref<const Vector>& b,
                   const Activation& act, const Eigen::Ref<const Vector>& f);

// || resnet_step(I + eps Wbar, eps bbar, f) - (f + eps Gamma(f)[Wbar f + bbar]) ||_2.
// Scales as O(eps^2) for smooth g; identically zero for the identity map.
double resnet_limit_error(const Activation& act, const Eigen::Ref<const Matrix>& Wbar,
                          const Eigen::Ref<const Vector>& bbar,
                          const Eigen::Ref<const Vector>& f, double eps);

}  // namespace greg
