#include "greg/update.hpp"

#include "greg/dataset.hpp"
#include "greg/parallel.hpp"

namespace greg {

Momentum Momentum::zero(Index d, const std::vector<Index>& dk, double alpha0,
                        std::vector<double> alpha, double beta) {
    if (alpha.size() != dk.size())
        throw std::invalid_argument("momentum: one alpha per fixed function required");
    Momentum m;
    m.v0 = Matrix::Zero(d, d);
    for (const Index dim : dk) m.vk.push_back(Matrix::Zero(d, dim));
    m.e = Vector::Zero(d);
    m.alpha0 = alpha0;
    m.alpha = std::move(alpha);
    m.beta = beta;
    return m;
}

Matrix residual(const Eigen::Ref<const Matrix>& Y, const Eigen::Ref<const Matrix>& F,
                const AffineHead& head, int workers) {
    if (Y.cols() != F.cols())
        throw std::invalid_argument("residual: sample counts differ");
    Matrix Z(Y.rows(), Y.cols());
    for_each_chunk(Y.cols(), workers, [&](Index, Index begin, Index end) {
        const Index len = end - begin;
        Z.middleCols(begin, len).noalias() = Y.middleCols(begin, len);
        Z.middleCols(begin, len).noalias() -= head.D * F.middleCols(begin, len);
        Z.middleCols(begin, len).colwise() -= head.c;
    });
    return Z;
}

Direction compute_direction(const Eigen::Ref<const Matrix>& F, const FixedValues& fk,
                            const Eigen::Ref<const Matrix>& Z,
                            const Eigen::Ref<const Matrix>& D, const Activation& act,
                            int workers) {
    const Index T = F.cols();
    if (Z.cols() != T)
        throw std::invalid_argument("compute_direction: sample counts differ");
    for (const Matrix& f : fk)
        if (f.cols() != T)
            throw std::invalid_argument("compute_direction: fixed values sample counts differ");

    // H = Gamma(F) .* (D^T Z), one column per sample; every expectation below
    // is a blocked mean against H.
    Matrix H(F.rows(), T);
    for_each_chunk(T, workers, [&](Index, Index begin, Index end) {
        const Index len = end - begin;
        Matrix local = D.transpose() * Z.middleCols(begin, len);
        H.middleCols(begin, len) =
            gprime_matrix(act, F.middleCols(begin, len)).cwiseProduct(local);
    });

    Direction dir;
    dir.w0 = cross_moment(H, F, workers);
    for (const Matrix& f : fk) dir.wk.push_back(cross_moment(H, f, workers));
    dir.b = empirical_expectation(H, workers);
    return dir;
}

void momentum_update(Momentum& state, const Direction& dir) {
    if (dir.wk.size() != state.vk.size())
        throw std::invalid_argument("momentum_update: fixed-function counts differ");
    state.v0 = state.alpha0 * state.v0 + dir.w0;
    for (size_t k = 0; k < state.vk.size(); ++k)
        state.vk[k] = state.alpha[k] * state.vk[k] + dir.wk[k];
    state.e = state.beta * state.e + dir.b;
}

Matrix layer_direction_vector(const Activation& act, const Matrix* v0_dense,
                              const ConvStructure* conv, const Vector* conv_kernel,
                              const std::vector<Matrix>& vk, const Vector& e,
                              const Eigen::Ref<const Matrix>& F, const FixedValues& fk,
                              int workers) {
    if (fk.size() != vk.size())
        throw std::invalid_argument("direction vector: fixed-function counts differ");
    const Index T = F.cols();
    const Index d = F.rows();

    Matrix psi(d, T);
    for_each_chunk(T, workers, [&](Index, Index begin, Index end) {
        const Index len = end - begin;
        Matrix lin = Matrix::Zero(d, len);
        if (v0_dense != nullptr)
            lin.noalias() = (*v0_dense) * F.middleCols(begin, len);
        else
            add_conv_product(*conv, *conv_kernel, F.middleCols(begin, len), lin);
        for (size_t k = 0; k < vk.size(); ++k)
            lin.noalias() += vk[k] * fk[k].get().middleCols(begin, len);
        lin.colwise() += e;
        psi.middleCols(begin, len) =
            gprime_matrix(act, F.middleCols(begin, len)).cwiseProduct(lin);
    });
    return psi;
}

Matrix direction_vector(const Momentum& state, const Eigen::Ref<const Matrix>& F,
                        const FixedValues& fk, const Activation& act, int workers) {
    return layer_direction_vector(act, &state.v0, nullptr, nullptr, state.vk, state.e,
                                  F, fk, workers);
}

std::optional<double> line_search_step(const Eigen::Ref<const Matrix>& Z,
                                       const Eigen::Ref<const Matrix>& Dpsi,
                                       int workers) {
    const double denom = mean_column_dot(Dpsi, Dpsi, workers);
    if (!(denom > 0.0)) return std::nullopt;
    return mean_column_dot(Z, Dpsi, workers) / denom;
}

}  // namespace greg
