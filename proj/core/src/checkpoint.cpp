#include "greg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace greg {
namespace {

constexpr char kMagic[4] = {'G', 'R', 'E', 'G'};
constexpr uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void u8(uint8_t v) { out_.put(static_cast<char>(v)); }

    void u32(uint32_t v) {
        char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out_.write(buf, 4);
    }

    void f64(double v) {
        const uint64_t bits = std::bit_cast<uint64_t>(v);
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
        out_.write(buf, 8);
    }

    void matrix(const Matrix& M) {  // row-major
        for (Index i = 0; i < M.rows(); ++i)
            for (Index j = 0; j < M.cols(); ++j) f64(M(i, j));
    }

    void vector(const Vector& v) {
        for (Index i = 0; i < v.size(); ++i) f64(v[i]);
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    uint8_t u8() {
        char c;
        if (!in_.get(c)) throw CheckpointError("checkpoint: truncated file");
        return static_cast<uint8_t>(c);
    }

    uint32_t u32() {
        char buf[4];
        if (!in_.read(buf, 4)) throw CheckpointError("checkpoint: truncated file");
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(buf[i]);
        return v;
    }

    double f64() {
        char buf[8];
        if (!in_.read(buf, 8)) throw CheckpointError("checkpoint: truncated file");
        uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<uint8_t>(buf[i]);
        return std::bit_cast<double>(bits);
    }

    Matrix matrix(Index rows, Index cols) {
        Matrix M(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) M(i, j) = f64();
        return M;
    }

    Vector vector(Index size) {
        Vector v(size);
        for (Index i = 0; i < size; ++i) v[i] = f64();
        return v;
    }

    bool at_eof() {
        in_.peek();
        return in_.eof();
    }

private:
    std::istream& in_;
};

Index fixed_dim(FixedFunction f, Index n) {
    switch (f) {
        case FixedFunction::raw_input: return n;
    }
    throw CheckpointError("checkpoint: unknown fixed function");
}

}  // namespace

void save_checkpoint(const ModelState& model, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("checkpoint: cannot open for writing: " + tmp);
        out.write(kMagic, 4);
        Writer w(out);
        w.u32(kVersion);
        w.u32(uint32_t(model.n()));
        w.u32(uint32_t(model.d()));
        w.u32(uint32_t(model.m()));
        w.u32(uint32_t(model.fixed.size()));
        w.u32(uint32_t(model.act.id));
        w.u32(uint32_t(model.layers.size()));
        w.matrix(model.U);
        w.matrix(model.head.D);
        w.vector(model.head.c);
        for (const Layer& layer : model.layers) {
            w.u8(uint8_t(layer.kind));
            if (layer.kind == LayerKind::plain) {
                w.matrix(layer.v0);
            } else {
                w.u32(uint32_t(layer.v0_kernel.grid_rows));
                w.u32(uint32_t(layer.v0_kernel.grid_cols));
                w.u32(uint32_t(layer.v0_kernel.window));
                w.vector(layer.v0_kernel.coeffs);
            }
            for (const Matrix& vk : layer.vk) w.matrix(vk);
            w.vector(layer.e);
            w.f64(layer.mu);
        }
        if (!out) throw DataError("checkpoint: write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open: " + path);

    char magic[4];
    if (!in.read(magic, 4)) throw CheckpointError("checkpoint: truncated file");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("checkpoint: bad magic");

    Reader r(in);
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));

    const Index n = Index(r.u32());
    const Index d = Index(r.u32());
    const Index m = Index(r.u32());
    const Index rr = Index(r.u32());
    const uint32_t act_id = r.u32();
    if (act_id > uint32_t(ActivationId::identity))
        throw CheckpointError("checkpoint: unknown activation id");
    const Index layer_count = Index(r.u32());

    ModelState model;
    model.act = Activation::from_id(ActivationId(act_id));
    model.fixed.assign(size_t(rr), FixedFunction::raw_input);
    model.U = r.matrix(d, n);
    model.head.D = r.matrix(m, d);
    model.head.c = r.vector(m);

    for (Index l = 0; l < layer_count; ++l) {
        Layer layer;
        const uint8_t kind = r.u8();
        if (kind > uint8_t(LayerKind::conv))
            throw CheckpointError("checkpoint: unknown layer kind");
        layer.kind = LayerKind(kind);
        if (layer.kind == LayerKind::plain) {
            layer.v0 = r.matrix(d, d);
        } else {
            layer.v0_kernel.grid_rows = Index(r.u32());
            layer.v0_kernel.grid_cols = Index(r.u32());
            layer.v0_kernel.window = Index(r.u32());
            if (layer.v0_kernel.grid_rows * layer.v0_kernel.grid_cols != d)
                throw CheckpointError("checkpoint: conv grid does not match d");
            layer.v0_kernel.coeffs =
                r.vector(layer.v0_kernel.window * layer.v0_kernel.window);
        }
        for (const FixedFunction f : model.fixed)
            layer.vk.push_back(r.matrix(d, fixed_dim(f, n)));
        layer.e = r.vector(d);
        layer.mu = r.f64();
        model.layers.push_back(std::move(layer));
    }

    if (!r.at_eof())
        throw CheckpointError("checkpoint: trailing bytes");
    return model;
}

}  // namespace greg
