#include "edm/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace edm {

double refine_objective(const Points& p, const PartialEdm& g) {
  double f = 0.0;
  for (std::size_t k = 0; k < g.d.size(); ++k) {
    const auto [i, j] = g.d.edges[k];
    const double r = (p.row(i) - p.row(j)).squaredNorm() - g.d.values[k];
    f += r * r;
  }
  return f;
}

Points refine_gradient(const Points& p, const PartialEdm& g) {
  Points grad = Points::Zero(p.rows(), p.cols());
  for (std::size_t k = 0; k < g.d.size(); ++k) {
    const auto [i, j] = g.d.edges[k];
    const Eigen::RowVectorXd diff = p.row(i) - p.row(j);
    const double r = diff.squaredNorm() - g.d.values[k];
    grad.row(i) += 4.0 * r * diff;
    grad.row(j) -= 4.0 * r * diff;
  }
  return grad;
}

RefineResult steepest_descent(const Points& p0, const PartialEdm& g, const RefineOptions& opts) {
  if (p0.rows() != g.n) throw Error(ErrorCode::DimensionMismatch, "realization has wrong row count");
  const auto t0 = std::chrono::steady_clock::now();
  RefineResult out;
  Points p = p0;
  double f = refine_objective(p, g);
  out.objective.push_back(f);
  Points grad = refine_gradient(p, g);
  const double tol = opts.grad_tol * std::max(g.norm_d(), 1e-300);

  double step = 0.0;
  int stall = 0;
  Points prev_p, prev_grad;
  for (int it = 0; it < opts.max_iters; ++it) {
    const double gnorm = grad.norm();
    if (gnorm <= tol) {
      out.converged = true;
      break;
    }
    const double cap = opts.step_cap * std::max(p.norm(), 1.0) / gnorm;
    if (it == 0) {
      step = 1e-2 * std::max(p.norm(), 1.0) / gnorm;
    } else {
      const Points s = p - prev_p;
      const Points y = grad - prev_grad;
      const double sy = (s.array() * y.array()).sum();
      if (sy > 0.0) step = s.squaredNorm() / sy;
    }
    step = std::min(step, cap);

    const double g2 = gnorm * gnorm;
    Points trial;
    double ft = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = p - step * grad;
      ft = refine_objective(trial, g);
      if (ft <= f - opts.sufficient_decrease * step * g2) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) break;
    stall = (f - ft <= opts.stall_tol * f) ? stall + 1 : 0;
    prev_p = std::move(p);
    prev_grad = std::move(grad);
    p = std::move(trial);
    f = ft;
    grad = refine_gradient(p, g);
    out.objective.push_back(f);
    ++out.iterations;
    if (stall >= opts.stall_window) {
      out.stalled = true;
      break;
    }
  }
  if (!out.converged && grad.norm() <= tol) out.converged = true;
  out.points = center_rows(p);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace edm
