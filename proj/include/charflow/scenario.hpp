#pragma once

// Scenario description: everything a run needs, parsed from a small INI-style
// config. Free data on the characteristics is given as a compact spec string:
//
//   const:a          f(x) = a
//   lin:a,b          f(x) = a + b x
//   sin:a,b,c        f(x) = a + b sin(c x)
//   table: y0 y1 ..  uniform samples over the data extent (cubic interpolation)
//   csv:path         last numeric column of the file, same convention as table
//
// Config sections / keys (all optional, with defaults):
//   [eos]      kind (polytropic|tabulated), gamma, kappa, rho_ref, rho_lo,
//              rho_hi, table_path
//   [geometry] mode (spherical|plane)
//   [data]     v_star, u_star, n_samples, beta_plus, alpha_minus, r0,
//              epsilon_guard
//   [grid]     nu, nv, h        (h = 0 means the full u extent)
//   [solver]   tol, max_iter, segments (0 = auto), l
//   [output]   dir, raster_nt, raster_nr   (0 = no raster)

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/io.hpp"
#include "charflow/numerics.hpp"
#include "charflow/state.hpp"

namespace charflow {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("expected a number for " + what + ", got '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, const std::string& what) {
    const double v = parse_double(s, what);
    const int i = int(v);
    if (double(i) != v) throw ConfigError("expected an integer for " + what + ", got '" + s + "'");
    return i;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
    std::string tmp = s;
    for (char& c : tmp)
        if (c == ',') c = ' ';
    std::istringstream ss(tmp);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(tok, what));
    return out;
}

}  // namespace detail

struct FreeDataSpec {
    enum class Kind { constant, linear, sinusoid, table } kind = Kind::constant;
    double a = 0.0, b = 0.0, c = 1.0;
    std::vector<double> samples;  // for table/csv
    std::string repr = "const:0";

    static FreeDataSpec parse(const std::string& text) {
        const std::string s = detail::trim(text);
        const std::size_t colon = s.find(':');
        if (colon == std::string::npos)
            throw ConfigError("free data spec '" + s + "' has no 'kind:' prefix");
        const std::string kind = detail::trim(s.substr(0, colon));
        const std::string args = detail::trim(s.substr(colon + 1));
        FreeDataSpec spec;
        spec.repr = s;
        if (kind == "const") {
            spec.kind = Kind::constant;
            spec.a = detail::parse_double(args, "const spec");
        } else if (kind == "lin") {
            const auto v = detail::parse_number_list(args, "lin spec");
            if (v.size() != 2) throw ConfigError("lin spec needs 'a,b'");
            spec.kind = Kind::linear;
            spec.a = v[0];
            spec.b = v[1];
        } else if (kind == "sin") {
            const auto v = detail::parse_number_list(args, "sin spec");
            if (v.size() != 3) throw ConfigError("sin spec needs 'a,b,c'");
            spec.kind = Kind::sinusoid;
            spec.a = v[0];
            spec.b = v[1];
            spec.c = v[2];
        } else if (kind == "table") {
            spec.kind = Kind::table;
            spec.samples = detail::parse_number_list(args, "table spec");
            if (spec.samples.size() < 4) throw ConfigError("table spec needs >= 4 values");
        } else if (kind == "csv") {
            spec.kind = Kind::table;
            const auto cols = io::read_csv_columns(args);
            spec.samples = cols.back();
            if (spec.samples.size() < 4) throw ConfigError("csv free data needs >= 4 rows");
        } else {
            throw ConfigError("unknown free data kind '" + kind + "'");
        }
        return spec;
    }

    // Evaluate at parameter x; table specs span [0, extent] uniformly.
    double eval(double x, double extent) const {
        switch (kind) {
            case Kind::constant: return a;
            case Kind::linear: return a + b * x;
            case Kind::sinusoid: return a + b * std::sin(c * x);
            case Kind::table:
                return num::lagrange_cubic(samples, 0.0, extent / double(samples.size() - 1), x);
        }
        return a;  // unreachable
    }
};

struct EosConfig {
    std::string kind = "polytropic";
    double gamma = 2.0, kappa = 0.5, rho_ref = 0.0, rho_lo = 1e-6, rho_hi = 1e6;
    std::string table_path;
};

struct DataConfig {
    double v_star = 1.0, u_star = 0.5;
    int n_samples = 129;
    FreeDataSpec beta_plus = FreeDataSpec{FreeDataSpec::Kind::constant, 2.0, 0, 1, {}, "const:2"};
    FreeDataSpec alpha_minus = FreeDataSpec{FreeDataSpec::Kind::constant, 2.0, 0, 1, {}, "const:2"};
    double r0 = 1.0;
    double epsilon_guard = 1e-3;
};

struct GridConfig {
    int nu = 64, nv = 64;
    double h = 0.0;  // 0: use the full u extent
};

struct SolverConfig {
    double tol = 1e-10;
    int max_iter = 60;
    int segments = 0;  // 0: choose from the width estimate
    double l = 2.0;
};

struct OutputConfig {
    std::string dir = "out";
    int raster_nt = 0, raster_nr = 0;
};

struct Scenario {
    EosConfig eos;
    Geometry geometry = Geometry::spherical;
    DataConfig data;
    GridConfig grid;
    SolverConfig solver;
    OutputConfig output;

    void validate() const {
        if (!(data.v_star > 0.0)) throw ConfigError("[data] v_star must be > 0");
        if (!(data.u_star > 0.0)) throw ConfigError("[data] u_star must be > 0");
        if (data.n_samples < 5) throw ConfigError("[data] n_samples must be >= 5");
        if (!(data.r0 > 0.0)) throw ConfigError("[data] r0 must be > 0");
        if (!(data.epsilon_guard > 0.0 && data.epsilon_guard < data.r0))
            throw ConfigError("[data] epsilon_guard must satisfy 0 < eps < r0");
        if (grid.nu < 4 || grid.nv < 4) throw ConfigError("[grid] nu and nv must be >= 4");
        if (grid.h < 0.0 || grid.h > data.u_star)
            throw ConfigError("[grid] h must lie in [0, u_star]");
        if (!(solver.tol > 0.0)) throw ConfigError("[solver] tol must be > 0");
        if (solver.max_iter < 1) throw ConfigError("[solver] max_iter must be >= 1");
        if (solver.segments < 0) throw ConfigError("[solver] segments must be >= 0");
        if (!(solver.l > 1.0)) throw ConfigError("[solver] l must be > 1");
        if ((output.raster_nt > 0) != (output.raster_nr > 0))
            throw ConfigError("[output] raster_nt and raster_nr must be set together");
    }

    EosModel make_eos() const {
        if (eos.kind == "polytropic")
            return EosModel::polytropic(eos.gamma, eos.kappa, eos.rho_ref, eos.rho_lo, eos.rho_hi);
        if (eos.kind == "tabulated") {
            if (eos.table_path.empty())
                throw ConfigError("[eos] tabulated kind needs table_path");
            const auto cols = io::read_csv_columns(eos.table_path);
            if (cols.size() < 2)
                throw ConfigError("eos table '" + eos.table_path + "' needs rho,p columns");
            return EosModel::tabulated(cols[0], cols[1], eos.rho_ref);
        }
        throw ConfigError("unknown eos kind '" + eos.kind + "'");
    }

    static Scenario from_string(const std::string& text);
    static Scenario from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str());
    }
};

inline Scenario Scenario::from_string(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t cut = std::min(line.find('#'), line.find(';'));
        std::string s = detail::trim(cut == std::string::npos ? line : line.substr(0, cut));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        auto unknown = [&]() -> ConfigError {
            return ConfigError("unknown key '" + key + "' in section [" + section + "]");
        };
        if (section == "eos") {
            if (key == "kind") sc.eos.kind = val;
            else if (key == "gamma") sc.eos.gamma = detail::parse_double(val, "[eos] gamma");
            else if (key == "kappa") sc.eos.kappa = detail::parse_double(val, "[eos] kappa");
            else if (key == "rho_ref") sc.eos.rho_ref = detail::parse_double(val, "[eos] rho_ref");
            else if (key == "rho_lo") sc.eos.rho_lo = detail::parse_double(val, "[eos] rho_lo");
            else if (key == "rho_hi") sc.eos.rho_hi = detail::parse_double(val, "[eos] rho_hi");
            else if (key == "table_path") sc.eos.table_path = val;
            else throw unknown();
        } else if (section == "geometry") {
            if (key == "mode") {
                if (val == "spherical") sc.geometry = Geometry::spherical;
                else if (val == "plane") sc.geometry = Geometry::plane;
                else throw ConfigError("[geometry] mode must be spherical or plane");
            } else throw unknown();
        } else if (section == "data") {
            if (key == "v_star") sc.data.v_star = detail::parse_double(val, "[data] v_star");
            else if (key == "u_star") sc.data.u_star = detail::parse_double(val, "[data] u_star");
            else if (key == "n_samples") sc.data.n_samples = detail::parse_int(val, "[data] n_samples");
            else if (key == "beta_plus") sc.data.beta_plus = FreeDataSpec::parse(val);
            else if (key == "alpha_minus") sc.data.alpha_minus = FreeDataSpec::parse(val);
            else if (key == "r0") sc.data.r0 = detail::parse_double(val, "[data] r0");
            else if (key == "epsilon_guard")
                sc.data.epsilon_guard = detail::parse_double(val, "[data] epsilon_guard");
            else throw unknown();
        } else if (section == "grid") {
            if (key == "nu") sc.grid.nu = detail::parse_int(val, "[grid] nu");
            else if (key == "nv") sc.grid.nv = detail::parse_int(val, "[grid] nv");
            else if (key == "h") sc.grid.h = detail::parse_double(val, "[grid] h");
            else throw unknown();
        } else if (section == "solver") {
            if (key == "tol") sc.solver.tol = detail::parse_double(val, "[solver] tol");
            else if (key == "max_iter") sc.solver.max_iter = detail::parse_int(val, "[solver] max_iter");
            else if (key == "segments") sc.solver.segments = detail::parse_int(val, "[solver] segments");
            else if (key == "l") sc.solver.l = detail::parse_double(val, "[solver] l");
            else throw unknown();
        } else if (section == "output") {
            if (key == "dir") sc.output.dir = val;
            else if (key == "raster_nt") sc.output.raster_nt = detail::parse_int(val, "[output] raster_nt");
            else if (key == "raster_nr") sc.output.raster_nr = detail::parse_int(val, "[output] raster_nr");
            else throw unknown();
        } else {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
    sc.validate();
    return sc;
}

}  // namespace charflow
