#pragma once

// Diagnostics CSV. Column set is part of the external contract:
//   t,dt,c_t,osc_dtu,max_dtu,min_dtu,cone_margin,ellipticity_trace,I_k,h_t,residual

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "flow.hpp"

namespace hflow {

inline constexpr std::array<const char*, 11> kDiagColumns = {
    "t",           "dt",   "c_t", "osc_dtu", "max_dtu", "min_dtu",
    "cone_margin", "ellipticity_trace", "I_k", "h_t", "residual"};

inline std::string diag_header() {
    std::string h;
    for (std::size_t i = 0; i < kDiagColumns.size(); ++i) {
        if (i) h += ',';
        h += kDiagColumns[i];
    }
    return h;
}

class DiagCsvWriter {
  public:
    explicit DiagCsvWriter(const std::filesystem::path& path) : os_(path) {
        if (!os_) throw ConfigError("diagnostics: cannot open " + path.string() + " for writing");
        os_ << diag_header() << '\n';
        os_ << std::setprecision(17);
    }
    void write(const DiagRecord& d) {
        os_ << d.t << ',' << d.dt << ',' << d.c_t << ',' << d.osc_dtu << ',' << d.max_dtu << ','
            << d.min_dtu << ',' << d.cone_margin << ',' << d.ellipticity_trace << ',' << d.I_k << ','
            << d.h_t << ',' << d.residual << '\n';
    }
    void flush() { os_.flush(); }

  private:
    std::ofstream os_;
};

inline void write_diag_csv(const std::filesystem::path& path, const std::vector<DiagRecord>& history) {
    DiagCsvWriter w(path);
    for (const auto& d : history) w.write(d);
}

inline std::vector<DiagRecord> read_diag_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("diagnostics: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("diagnostics: empty file " + path.string());
    if (line != diag_header()) throw ConfigError("diagnostics: unexpected header in " + path.string());
    std::vector<DiagRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::array<double, 11> v{};
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::string cell;
            if (!std::getline(ss, cell, ',')) throw ConfigError("diagnostics: short row in " + path.string());
            v[i] = std::stod(cell);
        }
        DiagRecord d;
        d.t = v[0];
        d.dt = v[1];
        d.c_t = v[2];
        d.osc_dtu = v[3];
        d.max_dtu = v[4];
        d.min_dtu = v[5];
        d.cone_margin = v[6];
        d.ellipticity_trace = v[7];
        d.I_k = v[8];
        d.h_t = v[9];
        d.residual = v[10];
        out.push_back(d);
    }
    return out;
}

}  // namespace hflow
