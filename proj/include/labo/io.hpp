// Versioned binary container for networks and curvature diagonals.
//
// Layout (all integers little-endian):
//   magic   "LABO"                     4 bytes
//   kind    u8                         1 = network, 2 = curvature diagonal
//   version u32                        currently 1
//   act     u8                         0 = tanh, 1 = relu
//   nsizes  u32
//   sizes   u32 * nsizes               layer sizes, input first
//   then per layer: weight matrix row-major f64, bias vector f64
//
// Round-trips are bit-exact; curvature files refuse to load against a
// different architecture than they were written for.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "labo/nn.hpp"

namespace labo::io {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint8_t kKindNetwork = 1;
inline constexpr std::uint8_t kKindCurvature = 2;

namespace detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void put_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    put_bytes(os, b, 4);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    put_bytes(os, b, 8);
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("file truncated");
}

inline std::uint8_t get_u8(std::istream& is) {
    std::uint8_t v;
    get_bytes(is, &v, 1);
    return v;
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    get_bytes(is, b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    get_bytes(is, b, 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

inline void write_container(std::ostream& os, std::uint8_t kind, const ArchSpec& arch, const ParamTensors& t) {
    put_bytes(os, "LABO", 4);
    put_u8(os, kind);
    put_u32(os, kFormatVersion);
    put_u8(os, arch.activation == Activation::Tanh ? 0 : 1);
    put_u32(os, static_cast<std::uint32_t>(arch.layer_sizes.size()));
    for (std::size_t s : arch.layer_sizes) put_u32(os, static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < t.layer_count(); ++l) {
        for (double v : t.weights[l].data) put_f64(os, v);
        for (double v : t.biases[l]) put_f64(os, v);
    }
}

inline std::pair<ArchSpec, ParamTensors> read_container(std::istream& is, std::uint8_t expected_kind,
                                                        const std::string& what) {
    char magic[4];
    get_bytes(is, magic, 4);
    if (std::memcmp(magic, "LABO", 4) != 0) throw std::runtime_error(what + ": bad magic");
    const std::uint8_t kind = get_u8(is);
    if (kind != expected_kind) throw std::runtime_error(what + ": wrong file kind");
    const std::uint32_t version = get_u32(is);
    if (version != kFormatVersion) throw std::runtime_error(what + ": unsupported format version");
    ArchSpec arch;
    arch.activation = get_u8(is) == 0 ? Activation::Tanh : Activation::Relu;
    const std::uint32_t nsizes = get_u32(is);
    for (std::uint32_t i = 0; i < nsizes; ++i) arch.layer_sizes.push_back(get_u32(is));
    arch.validate();
    ParamTensors t = ParamTensors::zeros(arch);
    for (std::size_t l = 0; l < t.layer_count(); ++l) {
        for (double& v : t.weights[l].data) v = get_f64(is);
        for (double& v : t.biases[l]) v = get_f64(is);
    }
    return {std::move(arch), std::move(t)};
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    return is;
}

}  // namespace detail

inline void save_network(const std::string& path, const Network& net) {
    auto os = detail::open_out(path);
    detail::write_container(os, kKindNetwork, net.arch, net.params);
}

inline Network load_network(const std::string& path) {
    auto is = detail::open_in(path);
    auto [arch, params] = detail::read_container(is, kKindNetwork, path);
    return Network{std::move(arch), std::move(params)};
}

inline void save_curvature(const std::string& path, const ArchSpec& arch, const ParamTensors& diag) {
    auto os = detail::open_out(path);
    detail::write_container(os, kKindCurvature, arch, diag);
}

/// Loads a curvature diagonal, rejecting files written for another architecture.
inline ParamTensors load_curvature(const std::string& path, const ArchSpec& expected_arch) {
    auto is = detail::open_in(path);
    auto [arch, diag] = detail::read_container(is, kKindCurvature, path);
    if (!(arch == expected_arch)) throw std::runtime_error(path + ": curvature was computed for a different architecture");
    return std::move(diag);
}

}  // namespace labo::io
