#pragma once

// Barotropic equation of state p = f(rho) and the derived sound-speed /
// Riemann-invariant machinery:
//
//   eta(rho)        = sqrt(f'(rho))                  (sound speed)
//   chi_dagger(rho) = 2 * int_{rho_ref}^{rho} eta(s)/s ds
//
// chi_dagger is the density part of the invariant pair (alpha + beta); it is
// strictly increasing in rho, so it has a well-defined inverse on the density
// domain. Two backends: closed-form polytropic f = kappa * rho^gamma, and a
// sampled table interpolated by a monotone (Fritsch-Carlson) cubic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "charflow/errors.hpp"

namespace charflow {

class EosModel {
public:
    enum class Kind { polytropic, tabulated };

    struct EtaSlope {
        double eta;        // eta(chi_dagger)
        double deta_dchi;  // d eta / d chi_dagger = rho f''(rho) / (4 eta^2)
    };

    static EosModel polytropic(double gamma, double kappa, double rho_ref = 0.0,
                               double rho_lo = 1e-6, double rho_hi = 1e6) {
        if (!(gamma > 1.0)) throw DomainError("polytropic index must satisfy gamma > 1");
        if (!(kappa > 0.0)) throw DomainError("polytropic constant must satisfy kappa > 0");
        if (!(rho_lo > 0.0 && rho_hi > rho_lo)) throw DomainError("need 0 < rho_lo < rho_hi");
        if (!(rho_ref >= 0.0 && rho_ref <= rho_hi))
            throw DomainError("need 0 <= rho_ref <= rho_hi");
        EosModel m;
        m.kind_ = Kind::polytropic;
        m.gamma_ = gamma;
        m.kappa_ = kappa;
        m.rho_ref_ = rho_ref;
        m.rho_lo_ = rho_lo;
        m.rho_hi_ = rho_hi;
        m.eta_ref_ = m.poly_eta(rho_ref);
        m.chi_lo_ = m.poly_chi(rho_lo);
        m.chi_hi_ = m.poly_chi(rho_hi);
        return m;
    }

    // Table of (rho, p) samples, strictly increasing in rho with dp/drho > 0
    // and convex p(rho). rho_ref must lie inside the table.
    static EosModel tabulated(std::vector<double> rho, std::vector<double> p, double rho_ref) {
        if (rho.size() != p.size() || rho.size() < 4)
            throw DomainError("eos table needs >= 4 (rho, p) samples");
        if (!(rho.front() > 0.0)) throw DomainError("eos table densities must be positive");
        const std::size_t n = rho.size();
        for (std::size_t k = 0; k + 1 < n; ++k)
            if (!(rho[k + 1] > rho[k])) throw DomainError("eos table rho must be strictly increasing");
        std::vector<double> slope(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            slope[k] = (p[k + 1] - p[k]) / (rho[k + 1] - rho[k]);
            if (!(slope[k] > 0.0)) throw DomainError("eos table needs dp/drho > 0");
        }
        for (std::size_t k = 0; k + 2 < n; ++k)
            if (!(slope[k + 1] > slope[k])) throw DomainError("eos table must be convex (f'' > 0)");
        if (!(rho_ref >= rho.front() && rho_ref <= rho.back()))
            throw DomainError("tabulated eos needs rho_ref inside the table");

        EosModel m;
        m.kind_ = Kind::tabulated;
        m.rho_ref_ = rho_ref;
        m.rho_lo_ = rho.front();
        m.rho_hi_ = rho.back();
        m.x_ = std::move(rho);
        m.f_ = std::move(p);
        m.build_pchip(slope);
        m.build_chi_table();
        m.chi_offset_ = m.tab_chi_from_lo(rho_ref);
        m.chi_lo_ = -m.chi_offset_;
        m.chi_hi_ = m.chi_knots_.back() - m.chi_offset_;
        m.eta_ref_ = m.tab_eta(rho_ref);
        return m;
    }

    Kind kind() const { return kind_; }
    double rho_ref() const { return rho_ref_; }
    std::pair<double, double> rho_domain() const { return {rho_lo_, rho_hi_}; }
    std::pair<double, double> chi_domain() const { return {chi_lo_, chi_hi_}; }

    double pressure(double rho) const {
        check_rho(rho);
        rho = clamp_rho(rho);
        return kind_ == Kind::polytropic ? kappa_ * std::pow(rho, gamma_) : tab_f(rho);
    }

    double sound_speed(double rho) const {
        check_rho(rho);
        rho = clamp_rho(rho);
        return kind_ == Kind::polytropic ? poly_eta(rho) : tab_eta(rho);
    }

    double chi_dagger(double rho) const {
        check_rho(rho);
        rho = clamp_rho(rho);
        if (kind_ == Kind::polytropic) return poly_chi(rho);
        return tab_chi_from_lo(rho) - chi_offset_;
    }

    double rho_of_chi_dagger(double chi) const {
        check_chi(chi);
        chi = std::clamp(chi, chi_lo_, chi_hi_);
        if (kind_ == Kind::polytropic) {
            const double eta = eta_ref_ + 0.25 * (gamma_ - 1.0) * chi;
            return std::pow(eta * eta / (kappa_ * gamma_), 1.0 / (gamma_ - 1.0));
        }
        return tab_rho_of_chi(chi);
    }

    EtaSlope eta_and_slope(double chi) const {
        check_chi(chi);
        chi = std::clamp(chi, chi_lo_, chi_hi_);
        if (kind_ == Kind::polytropic)
            return {eta_ref_ + 0.25 * (gamma_ - 1.0) * chi, 0.25 * (gamma_ - 1.0)};
        const double rho = tab_rho_of_chi(chi);
        const double eta = tab_eta(rho);
        return {eta, rho * tab_f2(rho) / (4.0 * eta * eta)};
    }

    // d(log rho)/d(chi_dagger) = 1/(2 eta). Follows from chi_dagger' = 2 eta / rho.
    double dlogrho_dchi(double chi) const { return 1.0 / (2.0 * eta_and_slope(chi).eta); }

private:
    EosModel() = default;

    // ---- shared domain checks -------------------------------------------
    void check_rho(double rho) const {
        const double tol = 1e-12 * rho_hi_;
        if (!(rho >= rho_lo_ - tol && rho <= rho_hi_ + tol))
            throw DomainError("density " + std::to_string(rho) + " outside domain [" +
                              std::to_string(rho_lo_) + ", " + std::to_string(rho_hi_) + "]");
    }
    double clamp_rho(double rho) const { return std::clamp(rho, rho_lo_, rho_hi_); }
    void check_chi(double chi) const {
        const double tol = 1e-12 * (1.0 + std::max(std::abs(chi_lo_), std::abs(chi_hi_)));
        if (!(chi >= chi_lo_ - tol && chi <= chi_hi_ + tol))
            throw RangeError("chi_dagger " + std::to_string(chi) + " outside range [" +
                             std::to_string(chi_lo_) + ", " + std::to_string(chi_hi_) +
                             "] (vacuum approach or over-compression)");
    }

    // ---- polytropic backend ---------------------------------------------
    double poly_eta(double rho) const {
        return std::sqrt(kappa_ * gamma_) * std::pow(rho, 0.5 * (gamma_ - 1.0));
    }
    // 2 * int eta/s ds = 4 eta / (gamma - 1) + const, converging at rho = 0 for gamma > 1.
    double poly_chi(double rho) const {
        return 4.0 / (gamma_ - 1.0) * (poly_eta(rho) - eta_ref_);
    }

    // ---- tabulated backend (monotone cubic Hermite) ----------------------
    void build_pchip(const std::vector<double>& m) {
        const std::size_t n = x_.size();
        d_.assign(n, 0.0);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double h0 = x_[k] - x_[k - 1], h1 = x_[k + 1] - x_[k];
            const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
            d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
        }
        auto end_slope = [](double h0, double h1, double m0, double m1) {
            double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
            if (d <= 0.0) d = m0;            // keep f' > 0 for a valid sound speed
            else if (d > 3.0 * m0) d = 3.0 * m0;
            return d;
        };
        d_.front() = end_slope(x_[1] - x_[0], x_[2] - x_[1], m[0], m[1]);
        d_.back() = end_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3], m[n - 2], m[n - 3]);
        for (double dk : d_)
            if (!(dk > 0.0)) throw DomainError("eos table produced a non-positive f'");
    }

    std::size_t locate(double rho) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), rho);
        std::size_t k = std::size_t(it - x_.begin());
        if (k == 0) return 0;
        if (k >= x_.size()) return x_.size() - 2;
        return k - 1;
    }

    double tab_f(double rho) const {
        const std::size_t k = locate(rho);
        const double h = x_[k + 1] - x_[k], s = (rho - x_[k]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return f_[k] * (2 * s3 - 3 * s2 + 1) + h * d_[k] * (s3 - 2 * s2 + s) +
               f_[k + 1] * (-2 * s3 + 3 * s2) + h * d_[k + 1] * (s3 - s2);
    }
    double tab_f1(double rho) const {
        const std::size_t k = locate(rho);
        const double h = x_[k + 1] - x_[k], s = (rho - x_[k]) / h;
        return (f_[k] * (6 * s * s - 6 * s) + h * d_[k] * (3 * s * s - 4 * s + 1) +
                f_[k + 1] * (6 * s - 6 * s * s) + h * d_[k + 1] * (3 * s * s - 2 * s)) / h;
    }
    double tab_f2(double rho) const {
        const std::size_t k = locate(rho);
        const double h = x_[k + 1] - x_[k], s = (rho - x_[k]) / h;
        return (f_[k] * (12 * s - 6) + h * d_[k] * (6 * s - 4) +
                f_[k + 1] * (6 - 12 * s) + h * d_[k + 1] * (6 * s - 2)) / (h * h);
    }
    double tab_eta(double rho) const {
        const double f1 = tab_f1(rho);
        if (!(f1 > 0.0)) throw DomainError("tabulated eos: f' <= 0 inside the table");
        return std::sqrt(f1);
    }

    template <class F>
    static double adaptive_simpson(F&& g, double a, double b, double tol) {
        auto simp = [&](double lo, double hi) {
            return (hi - lo) / 6.0 * (g(lo) + 4.0 * g(0.5 * (lo + hi)) + g(hi));
        };
        struct Frame { double a, b, whole; int depth; };
        std::vector<Frame> stack{{a, b, simp(a, b), 0}};
        double total = 0.0;
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            const double m = 0.5 * (f.a + f.b);
            const double left = simp(f.a, m), right = simp(m, f.b);
            if (f.depth >= 40 || std::abs(left + right - f.whole) < 15.0 * tol)
                total += left + right + (left + right - f.whole) / 15.0;
            else {
                stack.push_back({f.a, m, left, f.depth + 1});
                stack.push_back({m, f.b, right, f.depth + 1});
            }
        }
        return total;
    }

    void build_chi_table() {
        const std::size_t n = x_.size();
        chi_knots_.assign(n, 0.0);
        auto g = [this](double s) { return 2.0 * tab_eta(s) / s; };
        for (std::size_t k = 0; k + 1 < n; ++k)
            chi_knots_[k + 1] = chi_knots_[k] +
                adaptive_simpson(g, x_[k], x_[k + 1], 1e-14 * (1.0 + chi_knots_[k]));
    }

    // chi_dagger measured from the low table edge.
    double tab_chi_from_lo(double rho) const {
        const std::size_t k = locate(rho);
        auto g = [this](double s) { return 2.0 * tab_eta(s) / s; };
        return chi_knots_[k] + adaptive_simpson(g, x_[k], rho, 1e-14);
    }

    double tab_rho_of_chi(double chi) const {
        const double target = chi + chi_offset_;  // measured from the low edge
        auto it = std::upper_bound(chi_knots_.begin(), chi_knots_.end(), target);
        std::size_t k = it == chi_knots_.begin() ? 0 : std::size_t(it - chi_knots_.begin()) - 1;
        if (k >= x_.size() - 1) k = x_.size() - 2;
        double lo = x_[k], hi = x_[k + 1];
        double x = 0.5 * (lo + hi);
        const double tol = 1e-13 * (1.0 + std::abs(target));
        for (int iter = 0; iter < 100; ++iter) {
            const double res = tab_chi_from_lo(x) - target;
            if (std::abs(res) < tol) return x;
            if (res > 0.0) hi = x; else lo = x;
            const double step = res * x / (2.0 * tab_eta(x));  // Newton: dchi/drho = 2 eta / rho
            double next = x - step;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (next == x) return x;
            x = next;
        }
        return x;
    }

    Kind kind_ = Kind::polytropic;
    double gamma_ = 0.0, kappa_ = 0.0;
    double rho_ref_ = 0.0, rho_lo_ = 0.0, rho_hi_ = 0.0;
    double eta_ref_ = 0.0, chi_lo_ = 0.0, chi_hi_ = 0.0;
    std::vector<double> x_, f_, d_, chi_knots_;  // tabulated backend
    double chi_offset_ = 0.0;
};

}  // namespace charflow
