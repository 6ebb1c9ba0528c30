// Copyright 2026 The zfcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace zfcert {

using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct PoleOnAxis : std::runtime_error {
    explicit PoleOnAxis(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateInput : std::runtime_error {
    explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyGrid : std::runtime_error {
    explicit EmptyGrid(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Real polynomial in descending powers of s. Leading zeros are stripped on
 * construction; the zero polynomial is stored as {0}.
 */
class Polynomial {
   public:
    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs) : Polynomial(std::vector<double>(coeffs)) {}
    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) {
            throw std::invalid_argument("Polynomial: empty coefficient list");
        }
        std::size_t lead = 0;
        while (lead + 1 < coeffs_.size() && coeffs_[lead] == 0.0) ++lead;
        coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
    }

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    double leading() const { return coeffs_.front(); }
    const std::vector<double>& coeffs() const { return coeffs_; }

    // Horner evaluation.
    Complex operator()(Complex s) const {
        Complex acc = coeffs_.front();
        for (std::size_t i = 1; i < coeffs_.size(); ++i) acc = acc * s + coeffs_[i];
        return acc;
    }
    double operator()(double x) const {
        double acc = coeffs_.front();
        for (std::size_t i = 1; i < coeffs_.size(); ++i) acc = acc * x + coeffs_[i];
        return acc;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

   private:
    std::vector<double> coeffs_;
};

inline Polynomial operator*(const Polynomial& p, double k) {
    std::vector<double> c = p.coeffs();
    for (double& v : c) v *= k;
    return Polynomial(c);
}
inline Polynomial operator*(double k, const Polynomial& p) { return p * k; }

inline Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    const auto& a = p.coeffs();
    const auto& b = q.coeffs();
    std::vector<double> c(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) c[c.size() - a.size() + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) c[c.size() - b.size() + i] += b[i];
    return Polynomial(c);
}
inline Polynomial operator-(const Polynomial& p, const Polynomial& q) { return p + q * -1.0; }
inline Polynomial operator-(const Polynomial& p) { return p * -1.0; }

inline Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.is_zero() || q.is_zero()) return Polynomial{0.0};
    const auto& a = p.coeffs();
    const auto& b = q.coeffs();
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return Polynomial(c);
}

namespace detail {

// Radix-2 diagonal balancing (Parlett-Reinsch) before the eigenvalue sweep;
// companion matrices of wide-ranged coefficients are poorly scaled otherwise.
inline void balance_in_place(Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    bool converged = false;
    while (!converged) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                row += std::abs(m(i, j));
                col += std::abs(m(j, i));
            }
            if (row == 0.0 || col == 0.0) continue;
            double f = 1.0;
            const double s = row + col;
            while (col < row / 2.0) {
                f *= 2.0;
                col *= 4.0;
                row /= 4.0;
            }
            while (col >= row * 2.0) {
                f /= 2.0;
                col /= 4.0;
                row *= 4.0;
            }
            if ((row + col) < 0.95 * s && f != 1.0) {
                converged = false;
                m.row(i) /= f;
                m.col(i) *= f;
            }
        }
    }
}

}  // namespace detail

/// Roots via the companion matrix of the monic-normalized polynomial.
inline std::vector<Complex> polynomial_roots(const Polynomial& p) {
    if (p.is_zero()) throw DegenerateInput("polynomial_roots: zero polynomial");
    const int n = p.degree();
    if (n == 0) return {};
    const auto& c = p.coeffs();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) companion(0, j) = -c[static_cast<std::size_t>(j) + 1] / c[0];
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    detail::balance_in_place(companion);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("polynomial_roots: eigenvalue iteration failed");
    }
    std::vector<Complex> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    return roots;
}

/// True iff every root satisfies Re < -tol.
inline bool is_hurwitz(const Polynomial& p, double tol = 1e-9) {
    if (p.is_zero()) throw DegenerateInput("is_hurwitz: zero polynomial");
    for (const Complex& r : polynomial_roots(p)) {
        if (r.real() >= -tol) return false;
    }
    return true;
}

/**
 * Real-rational transfer function num/den. The denominator is normalized to
 * unit leading coefficient on construction (the numerator is rescaled to keep
 * the quotient unchanged).
 */
class RationalTF {
   public:
    RationalTF() : num_{0.0}, den_{1.0} {}
    RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw std::invalid_argument("RationalTF: denominator is zero");
        const double lead = den_.leading();
        num_ = num_ * (1.0 / lead);
        den_ = den_ * (1.0 / lead);
    }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }

    bool proper() const { return num_.degree() <= den_.degree(); }
    bool strictly_proper() const { return num_.is_zero() || num_.degree() < den_.degree(); }

    /// Value at s = j*omega. Throws PoleOnAxis when the denominator vanishes.
    Complex at(double omega) const {
        const Complex s(0.0, omega);
        const Complex d = den_(s);
        if (std::abs(d) < 1e-12 * den_.max_abs_coeff()) {
            throw PoleOnAxis("evaluate: denominator vanishes at omega=" + std::to_string(omega));
        }
        return num_(s) / d;
    }

    /// Feedthrough limit as omega -> infinity; requires a proper quotient.
    double at_infinity() const {
        if (!proper()) {
            throw std::invalid_argument("at_infinity: improper transfer function has no finite limit");
        }
        if (strictly_proper()) return 0.0;
        return num_.leading() / den_.leading();
    }

   private:
    Polynomial num_;
    Polynomial den_;
};

inline RationalTF operator-(const RationalTF& g) { return RationalTF(-g.num(), g.den()); }
inline RationalTF operator*(const RationalTF& g, double k) { return RationalTF(g.num() * k, g.den()); }

inline Complex evaluate(const RationalTF& tf, double omega) { return tf.at(omega); }

inline bool in_rh_inf(const RationalTF& tf) { return tf.proper() && is_hurwitz(tf.den()); }

inline constexpr std::size_t kDefaultGridPoints = 2000;

/**
 * Sorted nonnegative frequency samples in rad/s. Infinity is carried as a
 * flag, never as a floating-point entry; callers evaluate the feedthrough
 * limit analytically.
 */
struct FrequencyGrid {
    std::vector<double> omegas;
    bool include_infinity = true;

    FrequencyGrid() = default;
    FrequencyGrid(std::vector<double> w, bool with_inf) : omegas(std::move(w)), include_infinity(with_inf) {
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            if (!std::isfinite(omegas[i]) || omegas[i] < 0.0) {
                throw std::invalid_argument("FrequencyGrid: entries must be finite and nonnegative");
            }
            if (i > 0 && omegas[i] <= omegas[i - 1]) {
                throw std::invalid_argument("FrequencyGrid: entries must be strictly increasing");
            }
        }
    }

    std::size_t size() const { return omegas.size(); }

    /// omega = 0, then log_points log-spaced frequencies on [lo, hi].
    static FrequencyGrid standard(std::size_t log_points = kDefaultGridPoints, double lo = 1e-3,
                                  double hi = 1e3, bool with_inf = true) {
        if (log_points < 2 || lo <= 0.0 || hi <= lo) {
            throw std::invalid_argument("FrequencyGrid::standard: bad parameters");
        }
        std::vector<double> w;
        w.reserve(log_points + 1);
        w.push_back(0.0);
        const double llo = std::log10(lo), lhi = std::log10(hi);
        for (std::size_t i = 0; i < log_points; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(log_points - 1);
            w.push_back(std::pow(10.0, llo + t * (lhi - llo)));
        }
        return FrequencyGrid(std::move(w), with_inf);
    }

    /**
     * Superset grid: every positive interval is subdivided into `factor`
     * geometric steps. The interval touching omega = 0 is left intact, so the
     * original samples are all retained.
     */
    FrequencyGrid refined(int factor) const {
        if (factor < 1) throw std::invalid_argument("FrequencyGrid::refined: factor must be >= 1");
        std::vector<double> w;
        w.reserve(omegas.size() * static_cast<std::size_t>(factor));
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            w.push_back(omegas[i]);
            if (i + 1 == omegas.size() || omegas[i] <= 0.0) continue;
            const double ratio = omegas[i + 1] / omegas[i];
            for (int k = 1; k < factor; ++k) {
                w.push_back(omegas[i] * std::pow(ratio, static_cast<double>(k) / factor));
            }
        }
        std::sort(w.begin(), w.end());
        w.erase(std::unique(w.begin(), w.end()), w.end());
        return FrequencyGrid(std::move(w), include_infinity);
    }
};

/**
 * Frequency-response samples in grid order; when the grid carries the
 * infinity flag, the feedthrough value is appended last.
 */
inline std::vector<Complex> nyquist_samples(const RationalTF& tf, const FrequencyGrid& grid) {
    std::vector<Complex> out;
    out.reserve(grid.omegas.size() + 1);
    for (double w : grid.omegas) out.push_back(tf.at(w));
    if (grid.include_infinity) out.emplace_back(tf.at_infinity(), 0.0);
    return out;
}

/**
 * Minimum Euclidean distance from the sampled Nyquist curve to the real
 * segment [lo, hi] (hi may be +infinity). Positive values certify clearance
 * at grid resolution only.
 */
inline double interval_clearance(const RationalTF& tf, const FrequencyGrid& grid, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("interval_clearance: requires lo <= hi");
    if (grid.omegas.empty() && !grid.include_infinity) {
        throw EmptyGrid("interval_clearance: empty frequency grid");
    }
    double best = kInf;
    for (const Complex& p : nyquist_samples(tf, grid)) {
        const double x = std::clamp(p.real(), lo, hi);
        best = std::min(best, std::hypot(p.real() - x, p.imag()));
    }
    return best;
}

namespace detail {

// Golden-section maximization of |tf(jw)| on [lo, hi].
inline double refine_peak(const RationalTF& tf, double lo, double hi) {
    constexpr double kGolden = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = std::abs(tf.at(x1));
    double f2 = std::abs(tf.at(x2));
    for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + b); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = std::abs(tf.at(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = std::abs(tf.at(x1));
        }
    }
    return std::max(f1, f2);
}

}  // namespace detail

/**
 * Peak gain estimate: grid sweep of |tf(jw)| plus the feedthrough value,
 * then a golden-section pass around the arg-max sample. A lower bound on
 * the true H-infinity norm, tight at grid resolution.
 */
inline double hinf_norm_estimate(const RationalTF& tf, const FrequencyGrid& grid) {
    if (!in_rh_inf(tf)) throw std::invalid_argument("hinf_norm_estimate: plant must be in RH-infinity");
    if (grid.omegas.empty()) throw EmptyGrid("hinf_norm_estimate: empty frequency grid");
    double best = grid.include_infinity ? std::abs(tf.at_infinity()) : 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < grid.omegas.size(); ++i) {
        const double v = std::abs(tf.at(grid.omegas[i]));
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    const std::size_t left = arg > 0 ? arg - 1 : arg;
    const std::size_t right = arg + 1 < grid.omegas.size() ? arg + 1 : arg;
    if (left < right) {
        best = std::max(best, detail::refine_peak(tf, grid.omegas[left], grid.omegas[right]));
    }
    return best;
}

}  // namespace zfcert
