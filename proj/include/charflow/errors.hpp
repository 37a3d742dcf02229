#pragma once

#include <stdexcept>
#include <string>

namespace charflow {

// Base class for everything thrown by this library.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input: malformed config, non-uniform sample grids, invalid sizes.
struct ConfigError : SolverError {
    explicit ConfigError(const std::string& what) : SolverError(what) {}
};

// A quantity left its admissible set (density outside the table, r <= 0 passed
// to a geometric source, non-convex pressure table, ...).
struct DomainError : SolverError {
    explicit DomainError(const std::string& what) : SolverError(what) {}
};

// An inverse map was asked for a value outside its range (chi-dagger outside
// the representable density interval: vacuum approach or over-compression).
struct RangeError : SolverError {
    explicit RangeError(const std::string& what) : SolverError(what) {}
};

// The radius field dropped to r <= 0 during an integration.
struct NonPositiveRadius : SolverError {
    double u, v;
    NonPositiveRadius(double u_, double v_, const std::string& where)
        : SolverError("non-positive radius at (u=" + std::to_string(u_) +
                      ", v=" + std::to_string(v_) + ") in " + where),
          u(u_), v(v_) {}
};

// Fixed-point iteration exhausted max_iter without meeting the tolerance.
struct NoConvergence : SolverError {
    int iterations;
    double last_norm;
    NoConvergence(int iters, double norm)
        : SolverError("no convergence after " + std::to_string(iters) +
                      " iterations (last update norm " + std::to_string(norm) + ")"),
          iterations(iters), last_norm(norm) {}
};

// Width-estimate inflation factor must satisfy l > 1.
struct InvalidL : SolverError {
    explicit InvalidL(double l)
        : SolverError("inflation factor l must be > 1, got " + std::to_string(l)) {}
};

// Contraction analysis needs at least three recorded iterations.
struct InsufficientIterations : SolverError {
    explicit InsufficientIterations(int n)
        : SolverError("contraction report needs >= 3 iterations, have " + std::to_string(n)) {}
};

// A solve was asked on an empty or single-point domain (e.g. after guard truncation).
struct EmptyDomain : SolverError {
    explicit EmptyDomain(const std::string& what) : SolverError(what) {}
};

}  // namespace charflow
