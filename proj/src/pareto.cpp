#include "edm/pareto.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace edm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double log_base(double x, double base) { return std::log(x) / std::log(base); }

}  // namespace

FwDirection fw_direction(const SparseSymmetric& grad, double tau, const LanczosOptions& lanczos) {
  FwDirection out;
  out.tau = tau;
  if (grad.n < 2) {
    out.v = Vector::Zero(grad.n);
    return out;
  }
  EigPair ep;
  try {
    ep = extreme_eigpair_on_complement(grad, Extreme::Min, lanczos);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
    ep = dense_extreme_on_complement(grad.to_dense(), Extreme::Min);
    out.dense_fallback = true;
  }
  out.v = ep.vector;
  out.lambda = ep.value;
  out.value = tau * ep.value;
  out.matvecs = ep.matvecs;
  return out;
}

double exact_linesearch(std::span<const double> a_x, std::span<const double> a_s,
                        std::span<const double> d) {
  if (a_x.size() != a_s.size() || a_x.size() != d.size())
    throw Error(ErrorCode::DimensionMismatch, "line search vectors differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double step = a_s[k] - a_x[k];
    num += (d[k] - a_x[k]) * step;
    den += step * step;
  }
  if (den <= 0.0) return 0.0;
  return std::clamp(num / den, 0.0, 1.0);
}

double exact_linesearch(const SymmetricMatrix& x, const SymmetricMatrix& s, const PartialEdm& g) {
  const auto ax = k_map_on_edges(x, g.d.edges);
  const auto as = k_map_on_edges(s, g.d.edges);
  return exact_linesearch(ax, as, g.d.values);
}

FrankWolfeOracle::FrankWolfeOracle(const PartialEdm& g, double sigma, FrankWolfeOptions opts)
    : g_(g), sigma_(sigma), opts_(opts) {
  if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be nonnegative");
  if (!(opts.alpha > 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must exceed 1");
  if (!(opts.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
}

double FrankWolfeOracle::objective(const SymmetricMatrix& x) const {
  const auto a = k_map_on_edges(x, g_.d.edges);
  double f = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double r = a[k] - g_.d.values[k];
    f += r * r;
  }
  return 0.5 * f;
}

SparseSymmetric FrankWolfeOracle::gradient(std::span<const double> residual) const {
  // K* P* r: P* puts r_e on both triangles, K* doubles it.
  std::vector<double> half(residual.begin(), residual.end());
  for (double& h : half) h *= 0.5;
  return k_adjoint_sparse(g_.n, g_.d.edges, half);
}

OracleTriple FrankWolfeOracle::query(double tau, const SymmetricMatrix* warm_start) {
  if (tau < 0.0) throw Error(ErrorCode::InvalidArgument, "tau must be nonnegative");
  const int n = g_.n;
  const auto& edges = g_.d.edges;
  const std::vector<double>& d = g_.d.values;
  const std::size_t ne = edges.size();

  OracleTriple out;
  out.tau = tau;

  Matrix x;
  if (warm_start != nullptr) {
    if (warm_start->order() != n) throw Error(ErrorCode::DimensionMismatch, "warm start has wrong order");
    x = warm_start->dense();
  } else if (n > 1) {
    // tau J / (n - 1): trace tau, centered, every edge distance 2 tau / (n - 1).
    x = Matrix::Constant(n, n, -tau / (n * (n - 1.0)));
    x.diagonal().setConstant(tau / n);
  } else {
    x = Matrix::Zero(n, n);
  }

  std::vector<double> a(ne), b(ne), res(ne);
  auto edge_values = [&](const Matrix& m) {
    for (std::size_t k = 0; k < ne; ++k) {
      const auto [i, j] = edges[k];
      a[k] = m(i, i) + m(j, j) - 2.0 * m(i, j);
    }
  };
  edge_values(x);

  double best_l = -std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  double u = 0.0;
  int it = 0;
  for (;; ++it) {
    double f = 0.0;
    for (std::size_t k = 0; k < ne; ++k) {
      res[k] = a[k] - d[k];
      f += res[k] * res[k];
    }
    const double ynorm = std::sqrt(f);
    f *= 0.5;
    u = ynorm - sigma_;
    if (ynorm == 0.0) {
      best_l = u;
      best_s = 0.0;
      out.ratio_terminated = false;
      break;
    }

    LanczosOptions lopts = opts_.lanczos;
    if (eig_start_.size() == n) lopts.start = &eig_start_;
    const FwDirection dir = fw_direction(gradient(res), tau, lopts);
    if (dir.v.size() == n) eig_start_ = dir.v;

    // Weak duality with y = P K(X) - d: phi(t') >= (t' lambda_min - <y, d>) / ||y||.
    const double yd = dot(res, d);
    const double l_here = (tau * dir.lambda - yd) / ynorm - sigma_;
    if (l_here > best_l) {
      best_l = l_here;
      best_s = dir.lambda / ynorm;
    }

    if (u <= opts_.beta) break;
    if (best_l > 0.0 && u <= opts_.alpha * best_l) {
      out.ratio_terminated = true;
      break;
    }
    if (it >= opts_.max_iterations) {
      out.certified = false;
      break;
    }

    for (std::size_t k = 0; k < ne; ++k) {
      const auto [i, j] = edges[k];
      const double diff = dir.v[i] - dir.v[j];
      b[k] = tau * diff * diff;
    }
    const double gamma = exact_linesearch(a, b, d);
    if (gamma <= 0.0) {
      // No descent along the vertex direction: the current point is optimal
      // up to eigensolver accuracy, so the bounds cannot be tightened.
      out.certified = best_l > 0.0 && u <= opts_.alpha * best_l;
      break;
    }
    x *= (1.0 - gamma);
    x.noalias() += (gamma * tau) * dir.v * dir.v.transpose();
    for (std::size_t k = 0; k < ne; ++k) a[k] = (1.0 - gamma) * a[k] + gamma * b[k];
  }
  total_iterations_ += it;

  out.l = best_l;
  out.u = u;
  out.s = best_s;
  out.iterations = it;
  out.witness = SymmetricMatrix(x);
  out.witness_misfit = u + sigma_;
  return out;
}

OracleTriple fw_oracle(const PartialEdm& g, double tau, double sigma, double alpha, double beta,
                       const SymmetricMatrix* warm_start) {
  FrankWolfeOptions opts;
  opts.alpha = alpha;
  opts.beta = beta;
  FrankWolfeOracle oracle(g, sigma, opts);
  return oracle.query(tau, warm_start);
}

RootResult newton_root(const AffineMinorantOracle& oracle, double t0, double beta,
                       int max_iterations) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  RootResult out;
  double t = t0;
  MinorantBounds b = oracle(t);
  out.iterates.push_back(t);
  out.bounds.push_back(b);
  if (b.u <= 0.0) throw Error(ErrorCode::BadInitialPoint, "v(t0) <= 0 at t0=" + std::to_string(t0));
  if (b.u <= beta) {
    out.t = t;
    out.converged = true;
    return out;
  }
  while (b.u > beta) {
    if (b.s == 0.0) {
      out.diagnostic = "zero slope at t=" + std::to_string(t);
      break;
    }
    if (b.l <= 0.0) {
      out.diagnostic = "nonpositive lower bound at t=" + std::to_string(t) + " with u > beta";
      break;
    }
    if (out.iterations >= max_iterations) {
      std::ostringstream msg;
      msg << "Newton iteration exceeded " << max_iterations << " steps (t=" << t << ", u=" << b.u
          << ")";
      throw Error(ErrorCode::NonConvergence, msg.str());
    }
    t = t - b.l / b.s;
    if (t < 0.0) t = 0.0;
    b = oracle(t);
    ++out.iterations;
    out.iterates.push_back(t);
    out.bounds.push_back(b);
  }
  out.t = t;
  out.converged = b.u <= beta;
  return out;
}

double newton_iteration_bound(double alpha, double beta, double s0, double l0, double radius) {
  const double base = 2.0 / alpha;
  double k = 1.0;
  const double a = std::abs(s0) * radius / beta;
  const double c = 2.0 * l0 / beta;
  if (a > 0.0 && c > 0.0) k = std::max(k, log_base(a, base) + log_base(2.0, base) * log_base(c, base));
  return k;
}

double default_max_trace_start(const PartialEdm& g) {
  double dmax = 0.0;
  for (double v : g.d.values) dmax = std::max(dmax, v);
  return std::max(1.0, static_cast<double>(g.n)) * g.r * std::max(dmax, 1e-12);
}

ParetoResult pareto_solve(const PartialEdm& g, double sigma, const ParetoOptions& opts) {
  g.validate();
  if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be nonnegative");
  if (!(opts.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (!(opts.alpha > 1.0 && opts.alpha < 2.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (1, 2)");
  const auto t_start = Clock::now();

  FrankWolfeOptions fw = opts.fw;
  fw.alpha = opts.alpha;
  fw.beta = opts.beta;
  FrankWolfeOracle oracle(g, sigma, fw);

  ParetoResult result;
  SolveReport& rep = result.report;
  rep.algorithm = opts.mode == TraceMode::Max ? "pareto-max" : "pareto-min";
  rep.sigma = sigma;
  rep.beta = opts.beta;

  std::optional<OracleTriple> last;
  auto ask = [&](double t) {
    std::optional<SymmetricMatrix> warm;
    if (last && last->tau > 0.0 && t > 0.0) warm = (t / last->tau) * last->witness;
    OracleTriple tri = oracle.query(t, warm ? &*warm : nullptr);
    if (!tri.certified) {
      rep.certified = false;
      rep.diagnostics.push_back("IterationCapExceeded at tau=" + std::to_string(t));
    }
    OracleTriple summary = tri;
    summary.witness = SymmetricMatrix();
    result.triples.push_back(std::move(summary));
    last = std::move(tri);
    return MinorantBounds{last->l, last->u, last->s};
  };

  auto t0 = Clock::now();
  double start = 0.0;
  if (opts.mode == TraceMode::Max) {
    if (!g.connected())
      throw Error(ErrorCode::BadInitialPoint, "graph is disconnected, so the maximum trace is unbounded");
    start = opts.t0 ? *opts.t0 : default_max_trace_start(g);
    if (!opts.t0) {
      int doublings = 0;
      for (;;) {
        const MinorantBounds b = ask(start);
        if (b.l > 0.0 && b.s > 0.0) break;
        if (++doublings > opts.max_doublings)
          throw Error(ErrorCode::BadInitialPoint,
                      "no starting trace above the largest root found by doubling");
        start *= 2.0;
      }
    }
  } else {
    start = opts.t0.value_or(0.0);
  }
  rep.timings.push_back({"start", seconds_since(t0)});

  // The first Newton query reuses the oracle answer at the start point.
  bool reuse = last && last->tau == start;
  auto newton_oracle = [&](double t) {
    if (reuse) {
      reuse = false;
      return MinorantBounds{last->l, last->u, last->s};
    }
    return ask(t);
  };

  // Iteration cap from the complexity bound with a generous radius.
  const double radius_est = std::max(start, default_max_trace_start(g));
  int cap = 500;
  t0 = Clock::now();
  if (opts.mode == TraceMode::Min && !opts.t0) {
    const MinorantBounds b0 = newton_oracle(0.0);
    reuse = true;
    if (b0.u <= opts.beta) {
      result.root.t = 0.0;
      result.root.iterates = {0.0};
      result.root.bounds = {b0};
      result.root.converged = true;
    }
  }
  if (result.root.iterates.empty()) {
    const MinorantBounds b0 = newton_oracle(start);
    reuse = true;
    if (b0.l > 0.0)
      cap = std::max(50, static_cast<int>(std::ceil(
                             10.0 * newton_iteration_bound(opts.alpha, opts.beta, b0.s, b0.l,
                                                           radius_est))));
    result.root = newton_root(newton_oracle, start, opts.beta, cap);
  }
  rep.timings.push_back({"newton", seconds_since(t0)});

  const RootResult& root = result.root;
  if (!root.diagnostic.empty()) {
    rep.diagnostics.push_back(root.diagnostic);
    rep.certified = false;
  }
  rep.tau = root.t;
  rep.newton_iterations = root.iterations;
  rep.oracle_calls = static_cast<int>(result.triples.size());
  rep.fw_iterations = oracle.total_iterations();
  rep.final_slope = root.bounds.back().s;
  const MinorantBounds& first = root.bounds.front();
  rep.newton_bound = newton_iteration_bound(opts.alpha, opts.beta, first.s, std::max(first.l, 0.0),
                                            std::abs(root.iterates.front() - root.t));

  t0 = Clock::now();
  result.witness = last ? last->witness : SymmetricMatrix::zero(g.n);
  rep.trace = result.witness.trace();
  rep.witness_residual = g.residual(result.witness);
  if (rep.witness_residual > sigma + opts.beta * (1.0 + 1e-9))
    rep.diagnostics.push_back("witness misfit exceeds sigma + beta");
  result.points = center_rows(factor_gram(result.witness, g.r));
  rep.residual = g.residual(result.points);
  rep.timings.push_back({"rounding", seconds_since(t0)});
  rep.solve_seconds = seconds_since(t_start);
  return result;
}

}  // namespace edm
