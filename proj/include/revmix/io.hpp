#pragma once

// Flat-file outputs: CSV tables with unit-bearing headers and the binary
// grid format (magic "RMXH", two little-endian uint32 bin counts, then
// row-major little-endian float64 values).

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "chain_recurrence.hpp"
#include "errors.hpp"
#include "manifold.hpp"
#include "orbit_finder.hpp"

namespace revmix::io {

static_assert(std::endian::native == std::endian::little, "grid I/O assumes a little-endian host");

struct Grid {
    std::uint32_t n_xi = 0, n_eta = 0;
    std::vector<double> values;  // xi index outer
};

inline void write_grid(const std::filesystem::path& path, std::uint32_t n_xi, std::uint32_t n_eta,
                       std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(n_xi) * n_eta) throw ConfigError("write_grid: size mismatch");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("write_grid: cannot open " + path.string());
    f.write("RMXH", 4);
    char pad[4] = {0, 0, 0, 0};
    f.write(reinterpret_cast<const char*>(&n_xi), 4);
    f.write(reinterpret_cast<const char*>(&n_eta), 4);
    f.write(pad, 4);
    f.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
}

inline Grid read_grid(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("read_grid: cannot open " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "RMXH", 4) != 0) throw ConfigError("read_grid: bad magic in " + path.string());
    Grid g;
    char pad[4];
    f.read(reinterpret_cast<char*>(&g.n_xi), 4);
    f.read(reinterpret_cast<char*>(&g.n_eta), 4);
    f.read(pad, 4);
    g.values.resize(static_cast<std::size_t>(g.n_xi) * g.n_eta);
    f.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(double)));
    if (!f) throw ConfigError("read_grid: truncated file " + path.string());
    return g;
}

/// Minimal CSV writer; doubles are written with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ConfigError("cannot open " + path.string());
        out_.precision(17);
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... vals) {
        bool first = true;
        ((out_ << (first ? "" : ",") << vals, first = false), ...);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline const std::vector<std::string>& orbit_header() {
    static const std::vector<std::string> h{"epsilon",    "q",          "xi[rad]",     "eta[rad]",    "lambda1_re",
                                            "lambda1_im", "lambda2_re", "lambda2_im", "J",          "type",
                                            "r_sym",      "s_sym"};
    return h;
}

inline void orbit_row(CsvWriter& w, const OrbitRecord& r) {
    w.row(r.epsilon, r.q, r.point.xi, r.point.eta, r.lambda1.real(), r.lambda1.imag(), r.lambda2.real(),
          r.lambda2.imag(), r.jacobian, to_string(r.type), int(r.r_symmetric), int(r.s_symmetric));
}

inline const std::vector<std::string>& event_header() {
    static const std::vector<std::string> h{"kind", "epsilon", "xi[rad]", "eta[rad]", "angle[rad]", "from_id", "to_id"};
    return h;
}

inline void write_polylines(const std::filesystem::path& path, std::span<const Separatrix> branches) {
    CsvWriter w(path, {"branch_id", "owner_id", "stability", "side", "tau", "xi[rad]", "eta[rad]"});
    for (std::size_t b = 0; b < branches.size(); ++b) {
        const Separatrix& s = branches[b];
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            w.row(b, s.owner_id, to_string(s.stability), s.side, s.tau[i], s.points[i].xi, s.points[i].eta);
        }
    }
}

inline void write_cloud(const std::filesystem::path& path, std::span<const TorusPoint2> pts) {
    CsvWriter w(path, {"xi[rad]", "eta[rad]"});
    for (const auto& p : pts) w.row(p.xi, p.eta);
}

}  // namespace revmix::io
