#include "greg/linear_init.hpp"

#include "greg/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace greg {

namespace {
constexpr double kRidgeEps = 1e-8;
}

Matrix compute_pca_basis(const Eigen::Ref<const Matrix>& X, Index d, int workers) {
    const Index n = X.rows();
    if (d < 1 || d > n)
        throw std::invalid_argument("pca basis: need 1 <= d <= n");

    const Matrix second_moment = cross_moment(X, X, workers);
    if (!second_moment.allFinite())
        throw NumericError("pca basis: second moment not finite");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(second_moment);
    if (eig.info() != Eigen::Success)
        throw NumericError("pca basis: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; reorder descending with stable
    // index-order tie breaking.
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return eig.eigenvalues()[a] > eig.eigenvalues()[b];
    });

    Matrix U(d, n);
    for (Index r = 0; r < d; ++r) {
        Vector v = eig.eigenvectors().col(order[size_t(r)]);
        for (Index i = 0; i < n; ++i) {
            if (v[i] != 0.0) {
                if (v[i] < 0.0) v = -v;
                break;
            }
        }
        U.row(r) = v.transpose();
    }
    return U;
}

AffineHead fit_head(const Eigen::Ref<const Matrix>& F,
                    const Eigen::Ref<const Matrix>& Y, int workers) {
    if (F.cols() != Y.cols())
        throw std::invalid_argument("fit_head: sample counts differ");
    const Index d = F.rows();
    const Index m = Y.rows();

    const Matrix Sff = cross_moment(F, F, workers);  // E[F F^T]
    const Matrix Syf = cross_moment(Y, F, workers);  // E[Y F^T]
    const Vector mf = empirical_expectation(F, workers);
    const Vector my = empirical_expectation(Y, workers);
    if (!Sff.allFinite() || !Syf.allFinite() || !mf.allFinite() || !my.allFinite())
        throw NumericError("fit_head: non-finite inputs");

    const double trace = Sff.trace();
    AffineHead head;
    if (!(trace > 0.0)) {
        // All-zero features: best affine fit is the label mean.
        head.D = Matrix::Zero(m, d);
        head.c = my;
        return head;
    }

    // Augmented normal equations on [F; 1]: [D c] G = [Syf my].
    Matrix G(d + 1, d + 1);
    G.topLeftCorner(d, d) = Sff + (kRidgeEps * trace / double(d)) * Matrix::Identity(d, d);
    G.block(0, d, d, 1) = mf;
    G.block(d, 0, 1, d) = mf.transpose();
    G(d, d) = 1.0;

    Matrix rhs(d + 1, m);
    rhs.topRows(d) = Syf.transpose();
    rhs.bottomRows(1) = my.transpose();

    const Matrix sol = G.ldlt().solve(rhs);  // (d+1) x m
    head.D = sol.topRows(d).transpose();
    head.c = sol.bottomRows(1).transpose();
    if (!head.D.allFinite() || !head.c.allFinite())
        throw NumericError("fit_head: solve produced non-finite parameters");
    return head;
}

}  // namespace greg
