#include "greg/toeplitz.hpp"

#include <cmath>

namespace greg {

ConvStructure build_conv_structure(Index grid_rows, Index grid_cols, Index window) {
    if (window <= 0 || window % 2 == 0)
        throw std::invalid_argument("conv window must be odd and positive");
    if (grid_rows < window || grid_cols < window)
        throw std::invalid_argument("grid dimensions must be >= window");

    ConvStructure s;
    s.grid_rows = grid_rows;
    s.grid_cols = grid_cols;
    s.window = window;

    const int half = static_cast<int>(window / 2);
    for (int dr = -half; dr <= half; ++dr)
        for (int dc = -half; dc <= half; ++dc)
            s.offsets.push_back({dr, dc});

    s.index_map.resize(s.offsets.size());
    s.runs.resize(s.offsets.size());
    for (size_t o = 0; o < s.offsets.size(); ++o) {
        const int dr = s.offsets[o].drow;
        const int dc = s.offsets[o].dcol;
        const Index pr_begin = std::max<Index>(0, -dr);
        const Index pr_end = grid_rows - std::max<Index>(0, dr);
        const Index pc_begin = std::max<Index>(0, -dc);
        const Index pc_end = grid_cols - std::max<Index>(0, dc);
        for (Index pr = pr_begin; pr < pr_end; ++pr) {
            const Index p0 = pr * grid_cols + pc_begin;
            const Index q0 = (pr + dr) * grid_cols + pc_begin + dc;
            const Index len = pc_end - pc_begin;
            s.runs[o].push_back({p0, q0, len});
            for (Index i = 0; i < len; ++i)
                s.index_map[o].emplace_back(p0 + i, q0 + i);
        }
    }
    return s;
}

Vector project_kernel(const Eigen::Ref<const Matrix>& W, const ConvStructure& s) {
    if (W.rows() != s.dim() || W.cols() != s.dim())
        throw std::invalid_argument("project_kernel: matrix does not match structure");
    Vector kernel(Index(s.offsets.size()));
    for (size_t o = 0; o < s.offsets.size(); ++o) {
        double sum = 0.0;
        for (const auto& [p, q] : s.index_map[o]) sum += W(p, q);
        kernel[Index(o)] = sum / double(s.index_map[o].size());
    }
    return kernel;
}

Matrix conv_matrix(const ConvStructure& s, const Eigen::Ref<const Vector>& kernel) {
    if (kernel.size() != Index(s.offsets.size()))
        throw std::invalid_argument("conv_matrix: kernel size does not match structure");
    Matrix W = Matrix::Zero(s.dim(), s.dim());
    for (size_t o = 0; o < s.offsets.size(); ++o)
        for (const auto& [p, q] : s.index_map[o]) W(p, q) = kernel[Index(o)];
    return W;
}

std::optional<ConvProjection> project_to_conv(const Eigen::Ref<const Matrix>& W,
                                              const ConvStructure& s) {
    ConvProjection proj;
    proj.kernel = project_kernel(W, s);

    // The offset indicator matrices are mutually orthogonal, so
    // ||P(W)||_F^2 = sum_o count_o * kernel_o^2.
    double sq = 0.0;
    for (size_t o = 0; o < s.offsets.size(); ++o)
        sq += double(s.index_map[o].size()) * proj.kernel[Index(o)] * proj.kernel[Index(o)];
    proj.pnorm = std::sqrt(sq);
    if (proj.pnorm == 0.0) return std::nullopt;

    proj.wconv = conv_matrix(s, proj.kernel / proj.pnorm);
    return proj;
}

void add_conv_product(const ConvStructure& s, const Eigen::Ref<const Vector>& kernel,
                      const Eigen::Ref<const Matrix>& in, Eigen::Ref<Matrix> out,
                      double scale) {
    if (kernel.size() != Index(s.offsets.size()))
        throw std::invalid_argument("add_conv_product: kernel size does not match structure");
    if (in.rows() != s.dim() || out.rows() != s.dim() || in.cols() != out.cols())
        throw std::invalid_argument("add_conv_product: shape mismatch");
    for (size_t o = 0; o < s.offsets.size(); ++o) {
        const double w = scale * kernel[Index(o)];
        if (w == 0.0) continue;
        for (const auto& run : s.runs[o])
            out.middleRows(run.target_begin, run.length) +=
                w * in.middleRows(run.source_begin, run.length);
    }
}

}  // namespace greg
