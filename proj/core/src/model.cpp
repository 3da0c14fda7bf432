#include "greg/model.hpp"

#include "greg/parallel.hpp"

namespace greg {

FixedValues fixed_values(const ModelState& model, const Matrix& X) {
    FixedValues fk;
    for (const FixedFunction f : model.fixed) {
        switch (f) {
            case FixedFunction::raw_input:
                fk.emplace_back(std::cref(X));
                break;
        }
    }
    return fk;
}

void apply_layer(const Layer& layer, const Activation& act,
                 const FixedValues& fk, Matrix& F, int workers) {
    Matrix psi;
    if (layer.kind == LayerKind::plain) {
        psi = layer_direction_vector(act, &layer.v0, nullptr, nullptr, layer.vk,
                                     layer.e, F, fk, workers);
    } else {
        const ConvStructure s = build_conv_structure(
            layer.v0_kernel.grid_rows, layer.v0_kernel.grid_cols, layer.v0_kernel.window);
        psi = layer_direction_vector(act, nullptr, &s, &layer.v0_kernel.coeffs, layer.vk,
                                     layer.e, F, fk, workers);
    }
    F += layer.mu * psi;
}

Matrix forward_batch(const ModelState& model, const Matrix& X, int workers) {
    if (X.rows() != model.n())
        throw std::invalid_argument("forward: input dimension mismatch");
    Matrix F(model.d(), X.cols());
    for_each_chunk(X.cols(), workers, [&](Index, Index begin, Index end) {
        F.middleCols(begin, end - begin).noalias() = model.U * X.middleCols(begin, end - begin);
    });
    const FixedValues fk = fixed_values(model, X);
    for (const Layer& layer : model.layers) apply_layer(layer, model.act, fk, F, workers);
    return F;
}

Vector forward(const ModelState& model, const Eigen::Ref<const Vector>& x) {
    Matrix X = x;
    return forward_batch(model, X, 1).col(0);
}

Index predict(const ModelState& model, const Eigen::Ref<const Vector>& x) {
    const Vector scores = model.head.D * forward(model, x) + model.head.c;
    Index best = 0;
    for (Index i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;  // strict: ties keep the smaller index
    return best;
}

Vector resnet_step(const Eigen::Ref<const Matrix>& W, const Eigen::Ref<const Vector>& b,
                   const Activation& act, const Eigen::Ref<const Vector>& f) {
    if (W.rows() != f.size() || W.cols() != f.size() || b.size() != f.size())
        throw std::invalid_argument("resnet_step: shape mismatch");
    Vector pre = W * f + b;
    Vector out(f.size());
    for (Index i = 0; i < f.size(); ++i)
        out[i] = act.g(pre[i]) - act.g(f[i]) + f[i];
    return out;
}

double resnet_limit_error(const Activation& act, const Eigen::Ref<const Matrix>& Wbar,
                          const Eigen::Ref<const Vector>& bbar,
                          const Eigen::Ref<const Vector>& f, double eps) {
    const Index d = f.size();
    const Matrix W = Matrix::Identity(d, d) + eps * Wbar;
    const Vector stepped = resnet_step(W, eps * bbar, act, f);
    const Vector flow = f + eps * gamma_apply(act, f, Wbar * f + bbar);
    return (stepped - flow).norm();
}

}  // namespace greg
