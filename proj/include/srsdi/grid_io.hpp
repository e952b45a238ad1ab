// grid_io.hpp
//
// CHGRID01 container: "CHGRID01", u32 N, u32 A, u32 count, then count*N*A
// (real, imag) little-endian f32 pairs, row-major over (k, a).

#pragma once

#include "srsdi/core.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace srsdi {

namespace le {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b.data(), 4);
}

inline void put_f32(std::ostream& os, float f) { put_u32(os, std::bit_cast<std::uint32_t>(f)); }

inline std::uint32_t get_u32(std::istream& is) {
    std::array<unsigned char, 4> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError("unexpected end of stream");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is, std::size_t limit = 1u << 20) {
    const std::uint32_t n = get_u32(is);
    if (n > limit) throw IoError("string field too long");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) throw IoError("unexpected end of stream");
    return s;
}

}  // namespace le

inline constexpr char kGridMagic[8] = {'C', 'H', 'G', 'R', 'I', 'D', '0', '1'};

inline void write_grids(std::ostream& os, const std::vector<ComplexGrid>& grids) {
    if (grids.empty()) throw ParameterError("write_grids: empty grid list");
    const Shape s = grids.front().shape();
    for (const auto& g : grids) require_same_shape(s, g.shape(), "write_grids");
    os.write(kGridMagic, 8);
    le::put_u32(os, static_cast<std::uint32_t>(s.n_subcarriers));
    le::put_u32(os, static_cast<std::uint32_t>(s.n_antennas));
    le::put_u32(os, static_cast<std::uint32_t>(grids.size()));
    for (const auto& g : grids)
        for (const auto& v : g.values()) {
            le::put_f32(os, static_cast<float>(v.real()));
            le::put_f32(os, static_cast<float>(v.imag()));
        }
    if (!os) throw IoError("write_grids: stream write failed");
}

inline std::vector<ComplexGrid> read_grids(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kGridMagic, 8) != 0) throw IoError("read_grids: bad magic");
    const std::uint32_t n = le::get_u32(is);
    const std::uint32_t a = le::get_u32(is);
    const std::uint32_t count = le::get_u32(is);
    if (n == 0 || a == 0) throw IoError("read_grids: zero dimension in header");
    std::vector<ComplexGrid> out;
    out.reserve(count);
    for (std::uint32_t c = 0; c < count; ++c) {
        std::vector<cplx> values(static_cast<std::size_t>(n) * a);
        for (auto& v : values) {
            const float re = le::get_f32(is);
            const float im = le::get_f32(is);
            v = {re, im};
        }
        out.emplace_back(n, a, std::move(values));
    }
    return out;
}

inline void save_grids(const std::string& path, const std::vector<ComplexGrid>& grids) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_grids(os, grids);
}

inline std::vector<ComplexGrid> load_grids(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_grids(is);
}

// Masks travel as grids with values in {0, 1}.
inline void save_masks(const std::string& path, const std::vector<Mask>& masks) {
    std::vector<ComplexGrid> grids;
    for (const auto& m : masks) grids.push_back(ComplexGrid::from_mask(m));
    save_grids(path, grids);
}

inline std::vector<Mask> load_masks(const std::string& path) {
    std::vector<Mask> out;
    for (const auto& g : load_grids(path)) {
        Mask m(g.n_subcarriers(), g.n_antennas());
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] != cplx{0.0, 0.0} && g[i] != cplx{1.0, 0.0}) throw IoError("load_masks: value outside {0,1}");
            m.set_flat(i, g[i].real() == 1.0);
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace srsdi
