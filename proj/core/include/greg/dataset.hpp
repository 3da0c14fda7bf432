#pragma once

#include "greg/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace greg {

// Empirical distribution of (x, y) pairs, stored column-per-sample.
struct Dataset {
    Matrix X;  // n x T, features in [0, 1]
    Matrix Y;  // m x T, one-hot labels

    Index n() const { return X.rows(); }
    Index m() const { return Y.rows(); }
    Index samples() const { return X.cols(); }
};

// IDX container parsing (big-endian magic + dimension sizes, raw u8 payload).
// Images come back as one flattened row-major column per image, scaled by
// 1/255. Labels come back one-hot.
Matrix parse_idx_images(std::span<const std::byte> bytes);
Matrix parse_idx_labels(std::span<const std::byte> bytes, Index num_classes);

// Inverse of the parsers, used for round-trip checks and dataset slicing.
// Pixel values are rescaled by 255 and rounded back to bytes.
std::vector<std::byte> serialize_idx_images(const Matrix& X, Index rows, Index cols);
std::vector<std::byte> serialize_idx_labels(const Matrix& Y);

Dataset load_dataset(const std::string& images_path, const std::string& labels_path,
                     Index num_classes = 10);

// Row-wise mean over columns, accumulated per fixed 4096-column chunk and
// combined in chunk order. Bit-identical for any worker count.
Vector empirical_expectation(const Eigen::Ref<const Matrix>& values, int workers = 1);

// E[a b^T] over paired columns of A (k1 x T) and B (k2 x T), same blocked
// reduction scheme as empirical_expectation.
Matrix cross_moment(const Eigen::Ref<const Matrix>& A,
                    const Eigen::Ref<const Matrix>& B, int workers = 1);

// E[a^T b] over paired columns; the scalar sibling of cross_moment.
double mean_column_dot(const Eigen::Ref<const Matrix>& A,
                       const Eigen::Ref<const Matrix>& B, int workers = 1);

}  // namespace greg
