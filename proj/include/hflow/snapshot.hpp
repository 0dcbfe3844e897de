#pragma once

// Field snapshot files. Layout (all little-endian):
//   magic "HFLD" | version u32 | n u32 | N u32 | kind u32 | float64 payload
// kind 0: scalar field, one double per grid point, row-major over the axes
//         (x_1, y_1, ..., x_n, y_n), axis 0 slowest.
// kind 1: Hermitian field, per point n^2 entries in row-major (j,k) order,
//         each entry as (re, im) doubles.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "geometry.hpp"

namespace hflow {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::uint32_t kSnapshotScalar = 0;
inline constexpr std::uint32_t kSnapshotHermitian = 1;

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw SnapshotError("snapshot: truncated header");
    return v;
}

inline void write_header(std::ostream& os, const TorusGeometry& geom, std::uint32_t kind) {
    os.write("HFLD", 4);
    write_u32(os, kSnapshotVersion);
    write_u32(os, static_cast<std::uint32_t>(geom.n));
    write_u32(os, static_cast<std::uint32_t>(geom.N));
    write_u32(os, kind);
}

inline std::uint32_t read_header(std::istream& is, const TorusGeometry& geom) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HFLD", 4) != 0) throw SnapshotError("snapshot: bad magic");
    const auto version = read_u32(is);
    if (version != kSnapshotVersion) throw SnapshotError("snapshot: unsupported version");
    const auto n = read_u32(is);
    const auto N = read_u32(is);
    if (static_cast<int>(n) != geom.n || static_cast<int>(N) != geom.N)
        throw SnapshotError("snapshot: geometry mismatch (file has n=" + std::to_string(n) +
                            ", N=" + std::to_string(N) + ")");
    return read_u32(is);
}

}  // namespace detail

inline void write_snapshot(const std::filesystem::path& path, const TorusGeometry& geom,
                           const ScalarField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SnapshotError("snapshot: cannot open " + path.string() + " for writing");
    detail::write_header(os, geom, kSnapshotScalar);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw SnapshotError("snapshot: write failed for " + path.string());
}

inline void write_snapshot(const std::filesystem::path& path, const TorusGeometry& geom,
                           const HermitianField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SnapshotError("snapshot: cannot open " + path.string() + " for writing");
    detail::write_header(os, geom, kSnapshotHermitian);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(Cplx)));
    if (!os) throw SnapshotError("snapshot: write failed for " + path.string());
}

inline ScalarField read_scalar_snapshot(const std::filesystem::path& path, const TorusGeometry& geom) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SnapshotError("snapshot: cannot open " + path.string());
    if (detail::read_header(is, geom) != kSnapshotScalar)
        throw SnapshotError("snapshot: expected a scalar field in " + path.string());
    ScalarField f{std::vector<double>(geom.points), false};
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw SnapshotError("snapshot: truncated payload in " + path.string());
    return f;
}

inline HermitianField read_hermitian_snapshot(const std::filesystem::path& path, const TorusGeometry& geom) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SnapshotError("snapshot: cannot open " + path.string());
    if (detail::read_header(is, geom) != kSnapshotHermitian)
        throw SnapshotError("snapshot: expected a Hermitian field in " + path.string());
    HermitianField f;
    f.n = geom.n;
    f.values.resize(geom.points * static_cast<std::size_t>(geom.n) * static_cast<std::size_t>(geom.n));
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(Cplx)));
    if (!is) throw SnapshotError("snapshot: truncated payload in " + path.string());
    return f;
}

}  // namespace hflow
