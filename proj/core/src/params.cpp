#include "glie/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "glie/error.hpp"

namespace glie {

namespace {

Tensor gaussian_tensor(std::vector<int> shape, double stddev, Rng rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = stddev * rng.gaussian();
    }
    return t;
}

void check_even_hidden(int hidden) {
    if (hidden <= 0 || hidden % 2 != 0) {
        fail(ErrorCode::odd_hidden_size,
             "hidden size must be positive and even, got " + std::to_string(hidden));
    }
}

} // namespace

ModelParams ModelParams::zeros(int hidden, int mlp_hidden) {
    check_even_hidden(hidden);
    const int hd = hidden / 2;
    ModelParams p;
    p.hidden = hidden;
    p.mlp_hidden = mlp_hidden;
    p.bilstm.hidden = hidden;
    for (BiLstmDirParams* dir : {&p.bilstm.fw, &p.bilstm.bw}) {
        dir->w_ih = Tensor({hidden, 4 * hd});
        dir->w_hh = Tensor({hd, 4 * hd});
        dir->bias = Tensor({4 * hd});
    }
    p.head.w_t = Tensor({hidden, 2 * hidden});
    p.head.b_t = Tensor({2 * hidden});
    p.head.w_l = Tensor({hidden, 2 * hidden});
    p.head.b_l = Tensor({2 * hidden});
    p.head.w1 = Tensor({3 * hidden, mlp_hidden});
    p.head.b1 = Tensor({mlp_hidden});
    p.head.w2 = Tensor({mlp_hidden, 3});
    p.head.b2 = Tensor({3});
    return p;
}

ModelParams ModelParams::init(int hidden, int mlp_hidden, const Rng& rng) {
    ModelParams p = zeros(hidden, mlp_hidden);
    const int hd = hidden / 2;
    const double s_ih = 1.0 / std::sqrt(static_cast<double>(hidden));
    const double s_hh = 1.0 / std::sqrt(static_cast<double>(hd));
    int salt = 0;
    for (BiLstmDirParams* dir : {&p.bilstm.fw, &p.bilstm.bw}) {
        dir->w_ih = gaussian_tensor(dir->w_ih.shape(), s_ih, rng.split(salt++));
        dir->w_hh = gaussian_tensor(dir->w_hh.shape(), s_hh, rng.split(salt++));
        // Biases stay zero; the forget gate needs no warm start at this scale.
        ++salt;
    }
    p.head.w_t = gaussian_tensor(p.head.w_t.shape(), s_ih, rng.split(salt++));
    p.head.w_l = gaussian_tensor(p.head.w_l.shape(), s_ih, rng.split(salt++));
    p.head.w1 = gaussian_tensor(p.head.w1.shape(),
                                1.0 / std::sqrt(3.0 * hidden), rng.split(salt++));
    p.head.w2 = gaussian_tensor(p.head.w2.shape(),
                                1.0 / std::sqrt(static_cast<double>(mlp_hidden)),
                                rng.split(salt++));
    return p;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_tensors() {
    return {
        {"bilstm.fw.w_ih", &bilstm.fw.w_ih}, {"bilstm.fw.w_hh", &bilstm.fw.w_hh},
        {"bilstm.fw.bias", &bilstm.fw.bias}, {"bilstm.bw.w_ih", &bilstm.bw.w_ih},
        {"bilstm.bw.w_hh", &bilstm.bw.w_hh}, {"bilstm.bw.bias", &bilstm.bw.bias},
        {"head.token_proj.w", &head.w_t},    {"head.token_proj.b", &head.b_t},
        {"head.label_proj.w", &head.w_l},    {"head.label_proj.b", &head.b_l},
        {"head.mlp.w1", &head.w1},           {"head.mlp.b1", &head.b1},
        {"head.mlp.w2", &head.w2},           {"head.mlp.b2", &head.b2},
    };
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named_tensors() const {
    auto mutable_view = const_cast<ModelParams*>(this)->named_tensors();
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(mutable_view.size());
    for (auto& [name, t] : mutable_view) {
        out.emplace_back(name, t);
    }
    return out;
}

bool same_shapes(const ModelParams& a, const ModelParams& b) {
    auto va = a.named_tensors();
    auto vb = b.named_tensors();
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].first != vb[i].first) return false;
        if (!va[i].second->same_shape(*vb[i].second)) return false;
    }
    return true;
}

// ============================================================================
// Binary file format
// ============================================================================

namespace {

constexpr char kMagic[4] = {'G', 'L', 'N', 'R'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f32_data(std::ofstream& out, const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        float f = static_cast<float>(t[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(out, bits);
    }
}

} // namespace

void save_params_file(const std::string& path, std::uint64_t seed, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::io_error, "cannot write parameter file '" + path + "'");
    }
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(params.hidden));
    write_u64(out, seed);
    for (const auto& [name, tensor] : params.named_tensors()) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(tensor->size()));
        write_f32_data(out, *tensor);
    }
    if (!out) {
        fail(ErrorCode::io_error, "write failed for '" + path + "'");
    }
}

LoadedParams load_params_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::io_error, "cannot open parameter file '" + path + "'");
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        fail(ErrorCode::parse_error, "'" + path + "' is not a GLNR parameter file");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        fail(ErrorCode::parse_error,
             "unsupported parameter file version " + std::to_string(version));
    }
    const int hidden = static_cast<int>(read_u32(in));
    const std::uint64_t seed = read_u64(in);
    if (!in || hidden <= 0 || hidden % 2 != 0) {
        fail(ErrorCode::parse_error, "corrupt header in '" + path + "'");
    }

    // Read every block into a flat map first, then match against the layout.
    std::vector<std::pair<std::string, std::vector<double>>> blocks;
    while (true) {
        std::uint32_t name_len = read_u32(in);
        if (in.eof()) break;
        if (!in || name_len == 0 || name_len > 256) {
            fail(ErrorCode::parse_error, "corrupt block header in '" + path + "'");
        }
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        std::uint32_t count = read_u32(in);
        if (!in) {
            fail(ErrorCode::parse_error, "truncated block '" + name + "' in '" + path + "'");
        }
        std::vector<double> values(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            std::uint32_t bits = read_u32(in);
            float f;
            std::memcpy(&f, &bits, 4);
            values[i] = static_cast<double>(f);
        }
        if (!in) {
            fail(ErrorCode::parse_error, "truncated data in block '" + name + "'");
        }
        blocks.emplace_back(std::move(name), std::move(values));
    }

    // mlp_hidden falls out of the first MLP layer's element count.
    int mlp_hidden = 0;
    for (const auto& [name, values] : blocks) {
        if (name == "head.mlp.w1") {
            if (values.size() % (3 * static_cast<std::size_t>(hidden)) != 0) {
                fail(ErrorCode::parse_error, "head.mlp.w1 size inconsistent with hidden size");
            }
            mlp_hidden = static_cast<int>(values.size() / (3 * static_cast<std::size_t>(hidden)));
        }
    }
    if (mlp_hidden == 0) {
        fail(ErrorCode::parse_error, "parameter file lacks head.mlp.w1");
    }

    LoadedParams loaded;
    loaded.seed = seed;
    loaded.params = ModelParams::zeros(hidden, mlp_hidden);
    auto views = loaded.params.named_tensors();
    for (auto& [name, tensor] : views) {
        bool filled = false;
        for (const auto& [bname, values] : blocks) {
            if (bname != name) continue;
            if (values.size() != tensor->size()) {
                fail(ErrorCode::parse_error,
                     "block '" + name + "' has " + std::to_string(values.size()) +
                         " values, expected " + std::to_string(tensor->size()));
            }
            for (std::size_t i = 0; i < values.size(); ++i) {
                (*tensor)[i] = values[i];
            }
            filled = true;
            break;
        }
        if (!filled) {
            fail(ErrorCode::parse_error, "parameter file lacks block '" + name + "'");
        }
    }
    return loaded;
}

} // namespace glie
