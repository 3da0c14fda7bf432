#pragma once

#include "greg/types.hpp"

namespace greg {

// Affine readout y ~ D f + c from reduced features to label space.
struct AffineHead {
    Matrix D;  // m x d
    Vector c;  // m
};

// Rows are the eigenvectors of the uncentered second moment E[x x^T] for the
// d largest eigenvalues, descending, ties broken by original index.
// Sign convention: the first nonzero coordinate of each row is positive.
Matrix compute_pca_basis(const Eigen::Ref<const Matrix>& X, Index d, int workers = 1);

// Minimum-MSE affine fit of Y on F, solved from the uncentered moments via
// the augmented normal equations. A ridge of 1e-8 * trace(E[FF^T])/d is added
// to the feature block so degenerate features stay solvable.
AffineHead fit_head(const Eigen::Ref<const Matrix>& F,
                    const Eigen::Ref<const Matrix>& Y, int workers = 1);

}  // namespace greg
