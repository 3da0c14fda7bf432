#pragma once

#include "greg/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace greg {

// 2-D convolution acting on a feature vector laid out as a row-major
// grid_rows x grid_cols grid. The matrices whose (p, q) entry depends only on
// the in-window 2-D offset between pixels p and q form a linear subspace of
// dimension window^2; everything below is bookkeeping for that subspace.
struct ConvStructure {
    struct Offset {
        int drow;
        int dcol;
    };
    // Contiguous diagonal segment: targets [target_begin, target_begin+length)
    // pair with sources [source_begin, source_begin+length).
    struct Run {
        Index target_begin;
        Index source_begin;
        Index length;
    };

    Index grid_rows = 0;
    Index grid_cols = 0;
    Index window = 0;

    std::vector<Offset> offsets;  // window^2 entries, row-major over (drow, dcol)
    // Per offset, every matrix position (target p, source q) with
    // q = p shifted by the offset inside the grid.
    std::vector<std::vector<std::pair<Index, Index>>> index_map;
    std::vector<std::vector<Run>> runs;  // same positions as contiguous spans

    Index dim() const { return grid_rows * grid_cols; }
};

ConvStructure build_conv_structure(Index grid_rows, Index grid_cols, Index window);

// Result of projecting a dense matrix onto the convolution subspace.
// kernel holds the per-offset means (the coefficients of the orthogonal
// projection P(W)), pnorm its Frobenius norm, wconv = P(W)/pnorm the
// unit-norm argmax of <V, W> over unit-norm convolution matrices.
struct ConvProjection {
    Vector kernel;
    double pnorm = 0.0;
    Matrix wconv;
};

// Empty optional signals P(W) = 0 (the direction has no convolution
// component); callers fall back to the unprojected direction.
std::optional<ConvProjection> project_to_conv(const Eigen::Ref<const Matrix>& W,
                                              const ConvStructure& s);

// Per-offset means of W, i.e. the coefficients of P(W).
Vector project_kernel(const Eigen::Ref<const Matrix>& W, const ConvStructure& s);

// Dense matrix induced by kernel coefficients (offsets order).
Matrix conv_matrix(const ConvStructure& s, const Eigen::Ref<const Vector>& kernel);

// out += scale * C(kernel) * in, without materializing the dense matrix.
void add_conv_product(const ConvStructure& s, const Eigen::Ref<const Vector>& kernel,
                      const Eigen::Ref<const Matrix>& in, Eigen::Ref<Matrix> out,
                      double scale = 1.0);

}  // namespace greg
