#pragma once

// Dense 2D node-centered grid storage for the characteristic rectangle
// [0,h] x [0,v*]. Index convention: (i,j) with i along u (rows) and j along v
// (columns); row j=0 carries the C- data line, column i=0 the C+ data line.

#include <cstdint>
#include <vector>

namespace charflow {

template <class T>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(int nrows, int ncols, T fill = T{})
        : rows_(nrows), cols_(ncols), a_(std::size_t(nrows) * std::size_t(ncols), fill) {}

    T& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<T>& data() const { return a_; }
    std::vector<T>& data() { return a_; }

private:
    int rows_ = 0, cols_ = 0;
    std::size_t cols_sz() const { return std::size_t(cols_); }
    std::vector<T> a_;
};

// Solution of the characteristic rectangle problem: Riemann invariants, the
// hodograph map (t,r), and the first derivatives mu = dt/du, nu = dt/dv.
struct GoursatGrid {
    int n_u = 0, n_v = 0;   // cell counts; arrays are (n_u+1) x (n_v+1)
    double du = 0.0, dv = 0.0;
    std::vector<double> u, v;  // axis nodes, u[0] = v[0] = 0
    Grid2D<double> alpha, beta, t, r, mu, nu;
    Grid2D<std::uint8_t> valid;  // 1 where mu > 0 and nu > 0

    GoursatGrid() = default;
    GoursatGrid(std::vector<double> uaxis, std::vector<double> vaxis)
        : n_u(int(uaxis.size()) - 1),
          n_v(int(vaxis.size()) - 1),
          du(n_u > 0 ? (uaxis.back() - uaxis.front()) / n_u : 0.0),
          dv(n_v > 0 ? (vaxis.back() - vaxis.front()) / n_v : 0.0),
          u(std::move(uaxis)),
          v(std::move(vaxis)),
          alpha(n_u + 1, n_v + 1),
          beta(n_u + 1, n_v + 1),
          t(n_u + 1, n_v + 1),
          r(n_u + 1, n_v + 1),
          mu(n_u + 1, n_v + 1),
          nu(n_u + 1, n_v + 1),
          valid(n_u + 1, n_v + 1, 1) {}
};

}  // namespace charflow
