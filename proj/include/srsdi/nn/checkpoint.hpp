// checkpoint.hpp
//
// SRSDNZ01 weight file:
//   "SRSDNZ01"
//   config block: u32 x 11 (N, A, patch_h, patch_w, embed_enc, embed_dec,
//                 depth_enc, depth_dec, heads, mlp_ratio, flags)
//                 flags: bit 0 level_embedding, bit 1 input_skip
//   metadata: u32 count, then (key, value) length-prefixed strings
//   u32 tensor count, then per tensor: name, u32 ndims, u32 dims...,
//   row-major little-endian f32 values.

#pragma once

#include "srsdi/grid_io.hpp"
#include "srsdi/nn/patch_transformer.hpp"

#include <fstream>
#include <map>

namespace srsdi::nn {

inline constexpr char kCheckpointMagic[8] = {'S', 'R', 'S', 'D', 'N', 'Z', '0', '1'};

struct Checkpoint {
    std::shared_ptr<PatchTransformer> model;
    std::map<std::string, std::string> metadata;
};

inline void write_checkpoint(std::ostream& os, const PatchTransformer& model,
                             const std::map<std::string, std::string>& metadata = {}) {
    const auto& c = model.config();
    os.write(kCheckpointMagic, 8);
    for (std::size_t v : {c.n_subcarriers, c.n_antennas, c.patch_h, c.patch_w, c.embed_enc, c.embed_dec, c.depth_enc,
                          c.depth_dec, c.heads, c.mlp_ratio, static_cast<std::size_t>(c.level_embedding) | (static_cast<std::size_t>(c.input_skip) << 1)})
        le::put_u32(os, static_cast<std::uint32_t>(v));
    le::put_u32(os, static_cast<std::uint32_t>(metadata.size()));
    for (const auto& [k, v] : metadata) {
        le::put_string(os, k);
        le::put_string(os, v);
    }
    const auto& tensors = model.params().tensors();
    le::put_u32(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        le::put_string(os, t.name);
        const bool vector = t.value.cols() == 1;
        le::put_u32(os, vector ? 1u : 2u);
        le::put_u32(os, static_cast<std::uint32_t>(t.value.rows()));
        if (!vector) le::put_u32(os, static_cast<std::uint32_t>(t.value.cols()));
        for (Eigen::Index r = 0; r < t.value.rows(); ++r)
            for (Eigen::Index col = 0; col < t.value.cols(); ++col) le::put_f32(os, static_cast<float>(t.value(r, col)));
    }
    if (!os) throw IoError("write_checkpoint: stream write failed");
}

inline Checkpoint read_checkpoint(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw IoError("read_checkpoint: bad magic");
    PatchTransformerConfig c;
    std::size_t* fields[] = {&c.n_subcarriers, &c.n_antennas, &c.patch_h,   &c.patch_w,   &c.embed_enc,
                             &c.embed_dec,     &c.depth_enc,  &c.depth_dec, &c.heads,     &c.mlp_ratio};
    for (auto* f : fields) *f = le::get_u32(is);
    const std::uint32_t flags = le::get_u32(is);
    if (flags > 3u) throw IoError("read_checkpoint: unknown config flags");
    c.level_embedding = (flags & 1u) != 0;
    c.input_skip = (flags & 2u) != 0;

    Checkpoint ck;
    const std::uint32_t n_meta = le::get_u32(is);
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = le::get_string(is);
        ck.metadata[k] = le::get_string(is);
    }
    try {
        ck.model = std::make_shared<PatchTransformer>(c);
    } catch (const ParameterError& e) {
        throw IoError(std::string("read_checkpoint: invalid config block: ") + e.what());
    }
    auto& tensors = ck.model->params().tensors();
    if (le::get_u32(is) != tensors.size()) throw IoError("read_checkpoint: tensor count does not match config");
    for (auto& t : tensors) {
        if (le::get_string(is) != t.name) throw IoError("read_checkpoint: unexpected tensor '" + t.name + "'");
        const std::uint32_t nd = le::get_u32(is);
        if (nd != 1 && nd != 2) throw IoError("read_checkpoint: unsupported tensor rank");
        const std::uint32_t rows = le::get_u32(is);
        const std::uint32_t cols = nd == 2 ? le::get_u32(is) : 1u;
        if (rows != t.value.rows() || cols != t.value.cols())
            throw IoError("read_checkpoint: shape mismatch for '" + t.name + "'");
        for (Eigen::Index r = 0; r < t.value.rows(); ++r)
            for (Eigen::Index col = 0; col < t.value.cols(); ++col) t.value(r, col) = le::get_f32(is);
    }
    if (!ck.model->params().all_finite()) throw NumericError("read_checkpoint: non-finite weights");
    return ck;
}

inline void save_checkpoint(const std::string& path, const PatchTransformer& model,
                            const std::map<std::string, std::string>& metadata = {}) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_checkpoint(os, model, metadata);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint '" + path + "'");
    return read_checkpoint(is);
}

}  // namespace srsdi::nn
