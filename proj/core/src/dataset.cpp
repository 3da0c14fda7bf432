#include "greg/dataset.hpp"

#include "greg/parallel.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

namespace greg {
namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

class BigEndianReader {
public:
    explicit BigEndianReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    uint32_t read_u32(const char* what) {
        if (pos_ + 4 > bytes_.size())
            throw DataError(std::string("idx: truncated header while reading ") + what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v = (v << 8) | static_cast<uint32_t>(std::to_integer<uint8_t>(bytes_[pos_++]));
        return v;
    }

    std::span<const std::byte> payload() const { return bytes_.subspan(pos_); }

private:
    std::span<const std::byte> bytes_;
    size_t pos_ = 0;
};

void append_u32_be(std::vector<std::byte>& out, uint32_t v) {
    out.push_back(static_cast<std::byte>((v >> 24) & 0xff));
    out.push_back(static_cast<std::byte>((v >> 16) & 0xff));
    out.push_back(static_cast<std::byte>((v >> 8) & 0xff));
    out.push_back(static_cast<std::byte>(v & 0xff));
}

std::vector<std::byte> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw DataError("failed reading file: " + path);
    return bytes;
}

}  // namespace

Matrix parse_idx_images(std::span<const std::byte> bytes) {
    BigEndianReader r(bytes);
    const uint32_t magic = r.read_u32("magic");
    if (magic != kImagesMagic)
        throw DataError("idx: wrong magic for image file");
    const uint32_t count = r.read_u32("count");
    const uint32_t rows = r.read_u32("rows");
    const uint32_t cols = r.read_u32("cols");
    const size_t pixels = size_t(count) * rows * cols;
    const auto payload = r.payload();
    if (payload.size() < pixels)
        throw DataError("idx: truncated image payload");
    if (payload.size() > pixels)
        throw DataError("idx: trailing bytes after image payload");

    const Index n = Index(rows) * Index(cols);
    Matrix X(n, Index(count));
    for (Index t = 0; t < Index(count); ++t)
        for (Index i = 0; i < n; ++i)
            X(i, t) = std::to_integer<uint8_t>(payload[size_t(t) * n + i]) / 255.0;
    return X;
}

Matrix parse_idx_labels(std::span<const std::byte> bytes, Index num_classes) {
    if (num_classes <= 0) throw std::invalid_argument("num_classes must be positive");
    BigEndianReader r(bytes);
    const uint32_t magic = r.read_u32("magic");
    if (magic != kLabelsMagic)
        throw DataError("idx: wrong magic for label file");
    const uint32_t count = r.read_u32("count");
    const auto payload = r.payload();
    if (payload.size() < count)
        throw DataError("idx: truncated label payload");
    if (payload.size() > count)
        throw DataError("idx: trailing bytes after label payload");

    Matrix Y = Matrix::Zero(num_classes, Index(count));
    for (Index t = 0; t < Index(count); ++t) {
        const uint8_t label = std::to_integer<uint8_t>(payload[size_t(t)]);
        if (label >= num_classes)
            throw DataError("idx: label value out of range");
        Y(Index(label), t) = 1.0;
    }
    return Y;
}

std::vector<std::byte> serialize_idx_images(const Matrix& X, Index rows, Index cols) {
    if (rows * cols != X.rows())
        throw std::invalid_argument("rows*cols must equal feature dimension");
    std::vector<std::byte> out;
    out.reserve(16 + size_t(X.size()));
    append_u32_be(out, kImagesMagic);
    append_u32_be(out, uint32_t(X.cols()));
    append_u32_be(out, uint32_t(rows));
    append_u32_be(out, uint32_t(cols));
    for (Index t = 0; t < X.cols(); ++t)
        for (Index i = 0; i < X.rows(); ++i)
            out.push_back(static_cast<std::byte>(
                static_cast<uint8_t>(std::lround(X(i, t) * 255.0))));
    return out;
}

std::vector<std::byte> serialize_idx_labels(const Matrix& Y) {
    std::vector<std::byte> out;
    out.reserve(8 + size_t(Y.cols()));
    append_u32_be(out, kLabelsMagic);
    append_u32_be(out, uint32_t(Y.cols()));
    for (Index t = 0; t < Y.cols(); ++t) {
        Index label = 0;
        Y.col(t).maxCoeff(&label);
        out.push_back(static_cast<std::byte>(static_cast<uint8_t>(label)));
    }
    return out;
}

Dataset load_dataset(const std::string& images_path, const std::string& labels_path,
                     Index num_classes) {
    Dataset ds;
    ds.X = parse_idx_images(read_file(images_path));
    ds.Y = parse_idx_labels(read_file(labels_path), num_classes);
    if (ds.X.cols() != ds.Y.cols())
        throw DataError("image/label sample counts differ");
    return ds;
}

Vector empirical_expectation(const Eigen::Ref<const Matrix>& values, int workers) {
    const Index T = values.cols();
    if (T == 0) throw DataError("empirical expectation of an empty dataset");

    const Index nchunks = chunk_count(T);
    Matrix partial = Matrix::Zero(values.rows(), nchunks);
    for_each_chunk(T, workers, [&](Index c, Index begin, Index end) {
        Vector acc = Vector::Zero(values.rows());
        for (Index t = begin; t < end; ++t) acc += values.col(t);
        partial.col(c) = acc;
    });

    Vector total = Vector::Zero(values.rows());
    for (Index c = 0; c < nchunks; ++c) total += partial.col(c);
    return total / double(T);
}

Matrix cross_moment(const Eigen::Ref<const Matrix>& A,
                    const Eigen::Ref<const Matrix>& B, int workers) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("cross_moment: column counts differ");
    const Index T = A.cols();
    if (T == 0) throw DataError("cross moment of an empty dataset");

    const Index nchunks = chunk_count(T);
    std::vector<Matrix> partial(static_cast<size_t>(nchunks));
    for_each_chunk(T, workers, [&](Index c, Index begin, Index end) {
        partial[size_t(c)].noalias() =
            A.middleCols(begin, end - begin) * B.middleCols(begin, end - begin).transpose();
    });

    Matrix total = Matrix::Zero(A.rows(), B.rows());
    for (Index c = 0; c < nchunks; ++c) total += partial[size_t(c)];
    return total / double(T);
}

double mean_column_dot(const Eigen::Ref<const Matrix>& A,
                       const Eigen::Ref<const Matrix>& B, int workers) {
    if (A.cols() != B.cols() || A.rows() != B.rows())
        throw std::invalid_argument("mean_column_dot: shapes differ");
    const Index T = A.cols();
    if (T == 0) throw DataError("mean column dot of an empty dataset");

    const Index nchunks = chunk_count(T);
    std::vector<double> partial(static_cast<size_t>(nchunks), 0.0);
    for_each_chunk(T, workers, [&](Index c, Index begin, Index end) {
        partial[size_t(c)] = A.middleCols(begin, end - begin)
                                 .cwiseProduct(B.middleCols(begin, end - begin))
                                 .sum();
    });

    double total = 0.0;
    for (Index c = 0; c < nchunks; ++c) total += partial[size_t(c)];
    return total / double(T);
}

}  // namespace greg
