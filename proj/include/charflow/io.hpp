#pragma once

// File input/output. All numeric output goes through one fixed "%.17g"
// formatter and single-buffer writes, so byte-identical reruns are a property
// of the numerics, not of stream state or locale.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "charflow/constraints.hpp"
#include "charflow/errors.hpp"
#include "charflow/grid.hpp"
#include "charflow/hodograph.hpp"

namespace charflow::io {

inline std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw ConfigError("short write to '" + path + "'");
}

inline void write_characteristic_csv(const std::string& path, const CharacteristicData& cd) {
    std::string s = "side,param,alpha,beta,t,r,mu,nu,gamma,delta\n";
    const char* side = cd.side == Side::cplus ? "cplus" : "cminus";
    const bool has1 = cd.has_first_order;
    for (std::size_t k = 0; k < cd.param.size(); ++k) {
        s += side;
        s += ',';
        s += g17(cd.param[k]) + ',' + g17(cd.alpha[k]) + ',' + g17(cd.beta[k]) + ',' +
             g17(cd.t[k]) + ',' + g17(cd.r[k]) + ',';
        s += (has1 ? g17(cd.mu[k]) : "nan");
        s += ',';
        s += (has1 ? g17(cd.nu[k]) : "nan");
        s += ',';
        s += (has1 ? g17(cd.gamma[k]) : "nan");
        s += ',';
        s += (has1 ? g17(cd.delta[k]) : "nan");
        s += '\n';
    }
    write_text_file(path, s);
}

inline void write_field_csv(const std::string& path, const std::vector<double>& u,
                            const std::vector<double>& v, const Grid2D<double>& f,
                            const std::string& name) {
    std::string s = "i,j,u,v," + name + "\n";
    for (int i = 0; i < f.rows(); ++i)
        for (int j = 0; j < f.cols(); ++j)
            s += std::to_string(i) + ',' + std::to_string(j) + ',' + g17(u[std::size_t(i)]) +
                 ',' + g17(v[std::size_t(j)]) + ',' + g17(f(i, j)) + '\n';
    write_text_file(path, s);
}

inline void write_physical_csv(const std::string& path, const PhysicalField& f) {
    std::string s = "t,r,rho,w,p,valid\n";
    for (int i = 0; i <= f.n_u; ++i)
        for (int j = 0; j <= f.n_v; ++j)
            s += g17(f.t(i, j)) + ',' + g17(f.r(i, j)) + ',' + g17(f.rho(i, j)) + ',' +
                 g17(f.w(i, j)) + ',' + g17(f.p(i, j)) + ',' + (f.valid(i, j) ? "1" : "0") + '\n';
    write_text_file(path, s);
}

inline void write_raster_csv(const std::string& path, const RasterField& f) {
    std::string s = "it,ir,t,r,rho,w,p,covered\n";
    for (int a = 0; a < f.nt; ++a)
        for (int b = 0; b < f.nr; ++b)
            s += std::to_string(a) + ',' + std::to_string(b) + ',' + g17(f.t_axis[std::size_t(a)]) +
                 ',' + g17(f.r_axis[std::size_t(b)]) + ',' + g17(f.rho(a, b)) + ',' +
                 g17(f.w(a, b)) + ',' + g17(f.p(a, b)) + ',' + (f.covered(a, b) ? "1" : "0") + '\n';
    write_text_file(path, s);
}

// Numeric CSV reader: returns column vectors. Blank lines and '#' comments are
// skipped; a single leading non-numeric row is treated as a header. Both
// commas and whitespace separate fields.
inline std::vector<std::vector<double>> read_csv_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    std::vector<std::vector<double>> cols;
    std::string line;
    bool first_content = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == ',' || c == '\t' || c == '\r') c = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        bool bad = false;
        while (ss >> tok) {
            if (!tok.empty() && tok[0] == '#') break;
            char* end = nullptr;
            const double val = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') {
                bad = true;
                break;
            }
            row.push_back(val);
        }
        if (row.empty() && !bad) continue;  // blank / comment line
        if (bad) {
            if (first_content) {  // header row
                first_content = false;
                continue;
            }
            throw ConfigError("non-numeric field in '" + path + "' line " + std::to_string(lineno));
        }
        first_content = false;
        if (cols.empty()) cols.resize(row.size());
        if (row.size() != cols.size())
            throw ConfigError("ragged row in '" + path + "' line " + std::to_string(lineno));
        for (std::size_t c = 0; c < row.size(); ++c) cols[c].push_back(row[c]);
    }
    if (cols.empty() || cols[0].empty()) throw ConfigError("no numeric rows in '" + path + "'");
    return cols;
}

}  // namespace charflow::io
