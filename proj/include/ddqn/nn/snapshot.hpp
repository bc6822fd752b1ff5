#pragma once

// Network snapshot file format (little-endian, version 1):
//
//   offset  size  field
//   0       8     magic "DDQNNET1"
//   8       4     u32 format version (= 1)
//   12      4     u32 layer count L
//   16      12*L  per layer: u32 input_dim, u32 output_dim,
//                 u32 activation (0 identity, 1 relu, 2 tanh)
//   ...           per layer, in order: weights as f64 in row-major order
//                 (output_dim * input_dim values), then bias as f64
//                 (output_dim values)
//
// See docs/FORMATS.md.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "ddqn/errors.hpp"
#include "ddqn/nn/mlp.hpp"

namespace ddqn::nn {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

inline constexpr std::array<char, 8> kSnapshotMagic = {'D', 'D', 'Q', 'N', 'N', 'E', 'T', '1'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw IoError("snapshot: unexpected end of data");
    return value;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const MlpParams& params) {
    os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
    detail::write_pod<std::uint32_t>(os, kSnapshotVersion);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& l : params.layers) {
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.spec.input_dim));
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.spec.output_dim));
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.spec.activation));
    }
    for (const auto& l : params.layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) detail::write_pod<double>(os, l.weight(r, c));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) detail::write_pod<double>(os, l.bias[r]);
    }
    if (!os) throw IoError("snapshot: write failed");
}

inline MlpParams read_snapshot(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kSnapshotMagic) throw IoError("snapshot: bad magic");
    if (const auto version = detail::read_pod<std::uint32_t>(is); version != kSnapshotVersion)
        throw IoError("snapshot: unsupported version " + std::to_string(version));
    const auto n_layers = detail::read_pod<std::uint32_t>(is);
    if (n_layers == 0 || n_layers > 1024) throw IoError("snapshot: implausible layer count");
    Architecture arch(n_layers);
    for (auto& s : arch) {
        s.input_dim = static_cast<int>(detail::read_pod<std::uint32_t>(is));
        s.output_dim = static_cast<int>(detail::read_pod<std::uint32_t>(is));
        const auto act = detail::read_pod<std::uint32_t>(is);
        if (act > 2) throw IoError("snapshot: unknown activation code " + std::to_string(act));
        s.activation = static_cast<Activation>(act);
    }
    MlpParams p;
    try {
        p = zeros(arch);
    } catch (const ConfigError& e) {
        throw IoError(std::string("snapshot: ") + e.what());
    }
    for (auto& l : p.layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = detail::read_pod<double>(is);
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = detail::read_pod<double>(is);
    }
    return p;
}

inline void save_snapshot(const std::filesystem::path& path, const MlpParams& params) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_snapshot(os, params);
}

inline MlpParams load_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_snapshot(is);
}

}  // namespace ddqn::nn
