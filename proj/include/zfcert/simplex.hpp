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

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace zfcert {

struct SimplexOptions {
    double tol = 1e-9;
    // Consecutive degenerate pivots tolerated under the Dantzig rule before
    // switching to Bland's rule, which precludes cycling.
    int bland_after = 50;
    // 0 selects an automatic cap proportional to the problem size.
    long max_iterations = 0;
};

struct SimplexResult {
    enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
    Status status = Status::IterationLimit;
    std::vector<double> x;
    double objective = 0.0;
    long iterations = 0;
};

/**
 * Dense two-phase tableau simplex for
 *     maximize c'x  subject to  A x <= b,  x >= 0,
 * where b may carry negative entries (phase 1 introduces artificials for
 * those rows only). Pivoting is deterministic: Dantzig's rule with
 * lowest-index tie-breaks, falling back to Bland's rule after a run of
 * degenerate pivots.
 */
class DenseSimplex {
   public:
    DenseSimplex(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                 const std::vector<double>& c, SimplexOptions opts = {})
        : opts_(opts), m_(b.size()), n_(c.size()) {
        if (a.size() != m_) throw std::invalid_argument("DenseSimplex: row count mismatch");
        for (const auto& row : a) {
            if (row.size() != n_) throw std::invalid_argument("DenseSimplex: column count mismatch");
        }
        num_artificial_ = 0;
        for (double bi : b) {
            if (bi < 0.0) ++num_artificial_;
        }
        cols_ = n_ + m_ + num_artificial_;
        tableau_.assign(m_ + 1, std::vector<double>(cols_ + 1, 0.0));
        basis_.assign(m_, 0);
        active_.assign(m_, true);

        std::size_t art = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double sign = b[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) tableau_[i][j] = sign * a[i][j];
            tableau_[i][n_ + i] = sign;  // slack
            tableau_[i][cols_] = sign * b[i];
            if (b[i] < 0.0) {
                const std::size_t col = n_ + m_ + art;
                tableau_[i][col] = 1.0;
                basis_[i] = col;
                ++art;
            } else {
                basis_[i] = n_ + i;
            }
        }
        objective_ = c;
    }

    SimplexResult solve() {
        SimplexResult result;
        const long cap = opts_.max_iterations > 0
                             ? opts_.max_iterations
                             : 200 + 50 * static_cast<long>(m_ + n_ + num_artificial_);

        if (num_artificial_ > 0) {
            // Phase 1: maximize -(sum of artificials).
            auto& z = tableau_[m_];
            std::fill(z.begin(), z.end(), 0.0);
            for (std::size_t j = n_ + m_; j < cols_; ++j) z[j] = 1.0;
            canonicalize();
            const auto st = iterate(cap, result.iterations, /*phase1=*/true);
            if (st != SimplexResult::Status::Optimal) {
                result.status = st;
                return result;
            }
            if (tableau_[m_][cols_] < -10.0 * opts_.tol * (1.0 + static_cast<double>(num_artificial_))) {
                result.status = SimplexResult::Status::Infeasible;
                return result;
            }
            purge_artificials();
        }

        // Phase 2 with the real objective.
        auto& z = tableau_[m_];
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) z[j] = -objective_[j];
        canonicalize();
        const auto st = iterate(cap, result.iterations, /*phase1=*/false);
        result.status = st;
        if (st == SimplexResult::Status::Optimal) {
            result.x.assign(n_, 0.0);
            for (std::size_t i = 0; i < m_; ++i) {
                if (active_[i] && basis_[i] < n_) result.x[basis_[i]] = tableau_[i][cols_];
            }
            result.objective = tableau_[m_][cols_];
        }
        return result;
    }

   private:
    void canonicalize() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i]) continue;
            const double w = tableau_[m_][basis_[i]];
            if (w != 0.0) axpy_row(m_, i, -w);
        }
    }

    void axpy_row(std::size_t dst, std::size_t src, double factor) {
        auto& d = tableau_[dst];
        const auto& s = tableau_[src];
        for (std::size_t j = 0; j <= cols_; ++j) d[j] += factor * s[j];
    }

    void pivot(std::size_t row, std::size_t col) {
        auto& pr = tableau_[row];
        const double inv = 1.0 / pr[col];
        for (double& v : pr) v *= inv;
        pr[col] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double f = tableau_[i][col];
            if (f != 0.0) {
                axpy_row(i, row, -f);
                tableau_[i][col] = 0.0;
            }
        }
        basis_[row] = col;
    }

    bool column_allowed(std::size_t j, bool phase1) const {
        if (j >= n_ + m_) return false;  // artificials never re-enter
        (void)phase1;
        return true;
    }

    SimplexResult::Status iterate(long cap, long& iterations, bool phase1) {
        int degenerate_run = 0;
        while (true) {
            if (iterations >= cap) return SimplexResult::Status::IterationLimit;
            const bool bland = degenerate_run > opts_.bland_after;
            const auto& z = tableau_[m_];

            std::size_t enter = cols_;
            if (bland) {
                for (std::size_t j = 0; j < cols_; ++j) {
                    if (column_allowed(j, phase1) && z[j] < -opts_.tol) {
                        enter = j;
                        break;
                    }
                }
            } else {
                double best = -opts_.tol;
                for (std::size_t j = 0; j < cols_; ++j) {
                    if (column_allowed(j, phase1) && z[j] < best) {
                        best = z[j];
                        enter = j;
                    }
                }
            }
            if (enter == cols_) return SimplexResult::Status::Optimal;

            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (!active_[i]) continue;
                const double aie = tableau_[i][enter];
                if (aie <= opts_.tol) continue;
                const double ratio = tableau_[i][cols_] / aie;
                if (leave == m_ || ratio < best_ratio - 1e-15 ||
                    (std::abs(ratio - best_ratio) <= 1e-15 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return SimplexResult::Status::Unbounded;

            degenerate_run = best_ratio <= opts_.tol ? degenerate_run + 1 : 0;
            pivot(leave, enter);
            ++iterations;
        }
    }

    // After phase 1, pivot leftover artificials out of the basis; rows whose
    // structural part vanished are redundant and get deactivated.
    void purge_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_[i] || basis_[i] < n_ + m_) continue;
            std::size_t col = cols_;
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (std::abs(tableau_[i][j]) > opts_.tol) {
                    col = j;
                    break;
                }
            }
            if (col == cols_) {
                active_[i] = false;
            } else {
                pivot(i, col);
            }
        }
    }

    SimplexOptions opts_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::size_t cols_ = 0;
    std::size_t num_artificial_ = 0;
    std::vector<std::vector<double>> tableau_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
    std::vector<double> objective_;
};

inline SimplexResult simplex_maximize(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                                      const std::vector<double>& c, SimplexOptions opts = {}) {
    return DenseSimplex(a, b, c, opts).solve();
}

}  // namespace zfcert
