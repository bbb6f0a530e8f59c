// Copyright 2026 The graspkit Authors
//
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

#include "graspkit/lp.hpp"

#include <cmath>
#include <limits>

#include "graspkit/common.hpp"

namespace graspkit {
namespace {

class Tableau {
 public:
  // Layout: rows 0..m-1 are constraints, row m the objective (reduced costs).
  // Last column holds the right-hand side.
  Tableau(int m, int n) : t_(Eigen::MatrixXd::Zero(m + 1, n + 1)), basis_(m), m_(m), n_(n) {}

  Eigen::MatrixXd& t() { return t_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int r = 0; r <= m_; ++r) {
      if (r == row) continue;
      const double f = t_(r, col);
      if (f != 0.0) t_.row(r) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  // Runs simplex iterations over columns [0, active_cols). Returns false when
  // the objective is unbounded below.
  bool optimize(int active_cols, double tol) {
    for (int iter = 0; iter < 50000; ++iter) {
      int enter = -1;
      for (int j = 0; j < active_cols; ++j) {
        if (t_(m_, j) < -tol) {
          enter = j;  // Bland: lowest index with negative reduced cost
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m_; ++r) {
        const double a = t_(r, enter);
        if (a <= tol) continue;
        const double ratio = t_(r, n_) / a;
        if (ratio < best - tol || (std::abs(ratio - best) <= tol && leave >= 0 && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error("simplex iteration limit reached");
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  int m_;
  int n_;
};

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  double tol) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n) throw Error("LP dimension mismatch");

  // Phase 1: artificial variables n..n+m-1.
  Tableau tab(m, n + m);
  Eigen::MatrixXd& t = tab.t();
  for (int r = 0; r < m; ++r) {
    const double sign = b[r] < 0.0 ? -1.0 : 1.0;
    t.block(r, 0, 1, n) = sign * a.row(r);
    t(r, n + r) = 1.0;
    t(r, n + m) = sign * b[r];
    tab.basis()[r] = n + r;
  }
  for (int r = 0; r < m; ++r) t.row(m) -= t.row(r);
  for (int r = 0; r < m; ++r) t(m, n + r) = 0.0;
  tab.optimize(n + m, tol);

  LpResult result;
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-t(m, n + m) > 1e-9 * scale) {
    result.status = LpStatus::Infeasible;
    return result;
  }
  // Drive remaining artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(t(r, j)) > 1e-9) {
        tab.pivot(r, j);
        break;
      }
    }
  }

  // Phase 2 objective in terms of the current basis. Artificial columns stay
  // out of the pricing range; redundant rows keep their artificial at zero.
  t.row(m).setZero();
  t.block(m, 0, 1, n) = c.transpose();
  for (int r = 0; r < m; ++r) {
    const int bcol = tab.basis()[r];
    if (bcol < n && c[bcol] != 0.0) t.row(m) -= c[bcol] * t.row(r);
  }
  if (!tab.optimize(n, tol)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) result.x[tab.basis()[r]] = t(r, n + m);
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace graspkit
