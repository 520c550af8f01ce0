#include "decopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "decopt/errors.hpp"

namespace decopt {

namespace {

void ensure_finite(double v, int node, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteValueError(node, what);
}

void ensure_finite(const Eigen::VectorXd& v, int node, const char* what) {
  if (!v.allFinite()) throw NonFiniteValueError(node, what);
}

void ensure_finite(const Eigen::MatrixXd& v, int node, const char* what) {
  if (!v.allFinite()) throw NonFiniteValueError(node, what);
}

}  // namespace

int CoupledProblem::neighborhood_dim(int i) const {
  int s = 0;
  for (int j : graph.neighbors(i)) s += nodes[j].dim;
  return s;
}

Eigen::VectorXd CoupledProblem::gather(const Eigen::VectorXd& x, int i) const {
  Eigen::VectorXd v(neighborhood_dim(i));
  int at = 0;
  for (int j : graph.neighbors(i)) {
    v.segment(at, nodes[j].dim) = x.segment(x_offset[j], nodes[j].dim);
    at += nodes[j].dim;
  }
  return v;
}

int CoupledProblem::local_offset(int i, int j) const {
  int at = 0;
  for (int k : graph.neighbors(i)) {
    if (k == j) return at;
    at += nodes[k].dim;
  }
  throw IndexOutOfRangeError("node " + std::to_string(j) + " is not in the neighborhood of " +
                             std::to_string(i));
}

Eigen::VectorXd CoupledProblem::lower_stacked() const {
  Eigen::VectorXd lo(total_dim);
  for (int i = 0; i < n(); ++i) lo.segment(x_offset[i], nodes[i].dim) = nodes[i].lower;
  return lo;
}

Eigen::VectorXd CoupledProblem::upper_stacked() const {
  Eigen::VectorXd hi(total_dim);
  for (int i = 0; i < n(); ++i) hi.segment(x_offset[i], nodes[i].dim) = nodes[i].upper;
  return hi;
}

Eigen::VectorXd CoupledProblem::clamp_to_box(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower_stacked()).cwiseMin(upper_stacked());
}

Eigen::VectorXd CoupledProblem::total_inequality(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n(); ++i) {
    Eigen::VectorXd gi = nodes[i].g(gather(x, i));
    ensure_finite(gi, i, "g");
    if (gi.size() != p) throw ShapeMismatchError("g of node " + std::to_string(i) +
                                                 " returned wrong length");
    s += gi;
  }
  return s;
}

Eigen::VectorXd CoupledProblem::total_equality_residual(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n(); ++i) {
    const auto& nb = graph.neighbors(i);
    for (size_t a = 0; a < nb.size(); ++a)
      s += nodes[i].A_blocks[a] * x.segment(x_offset[nb[a]], nodes[nb[a]].dim);
    s -= nodes[i].b;
  }
  return s;
}

double CoupledProblem::total_objective(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (int i = 0; i < n(); ++i) {
    double fi = nodes[i].f(gather(x, i));
    ensure_finite(fi, i, "f");
    s += fi;
  }
  return s;
}

void finalize(CoupledProblem& prob) {
  const int n = prob.graph.n;
  if (static_cast<int>(prob.nodes.size()) != n)
    throw ShapeMismatchError("node count does not match graph size");
  if (prob.p < 0 || prob.m < 0) throw InvalidParameterError("p and m must be nonnegative");

  prob.x_offset.assign(n, 0);
  int at = 0;
  for (int i = 0; i < n; ++i) {
    auto& nd = prob.nodes[i];
    if (nd.dim <= 0) throw InvalidParameterError("node dimension must be positive");
    if (nd.lower.size() != nd.dim || nd.upper.size() != nd.dim)
      throw ShapeMismatchError("box bounds of node " + std::to_string(i) +
                               " do not match its dimension");
    for (int c = 0; c < nd.dim; ++c)
      if (!(nd.lower(c) <= nd.upper(c)))
        throw InvalidParameterError("empty box at node " + std::to_string(i));
    if (!nd.f || !nd.grad_f) throw ConfigError("node " + std::to_string(i) + " is missing f or grad_f");
    if (prob.p > 0 && (!nd.g || !nd.jac_g))
      throw ConfigError("node " + std::to_string(i) + " is missing g or jac_g");
    prob.x_offset[i] = at;
    at += nd.dim;
  }
  prob.total_dim = at;

  for (int i = 0; i < n; ++i) {
    auto& nd = prob.nodes[i];
    const auto& nb = prob.graph.neighbors(i);
    if (prob.m == 0 && nd.A_blocks.empty()) {
      for (int j : nb) nd.A_blocks.push_back(Eigen::MatrixXd::Zero(0, prob.nodes[j].dim));
    }
    if (nd.A_blocks.size() != nb.size())
      throw ShapeMismatchError("node " + std::to_string(i) +
                               " has a coupling block count different from its neighborhood size");
    for (size_t a = 0; a < nb.size(); ++a)
      if (nd.A_blocks[a].rows() != prob.m || nd.A_blocks[a].cols() != prob.nodes[nb[a]].dim)
        throw ShapeMismatchError("coupling block (" + std::to_string(i) + ", " +
                                 std::to_string(nb[a]) + ") has wrong shape");
    if (nd.b.size() != prob.m) {
      if (prob.m == 0 && nd.b.size() == 0)
        nd.b = Eigen::VectorXd::Zero(0);
      else
        throw ShapeMismatchError("b of node " + std::to_string(i) + " has wrong length");
    }
  }
  if (prob.slater_point.size() != 0 && prob.slater_point.size() != prob.total_dim)
    throw ShapeMismatchError("slater point has wrong length");
}

namespace {

Eigen::VectorXd sample_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                              std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> unit(margin, 1.0 - margin);
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index c = 0; c < lo.size(); ++c) {
    double l = std::isfinite(lo(c)) ? lo(c) : -1e3;
    double h = std::isfinite(hi(c)) ? hi(c) : 1e3;
    x(c) = l + unit(rng) * (h - l);
  }
  return x;
}

Eigen::VectorXd flatten_grad(const std::vector<Eigen::VectorXd>& blocks, int node) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Eigen::VectorXd v(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    ensure_finite(b, node, "grad_f");
    v.segment(at, b.size()) = b;
    at += b.size();
  }
  return v;
}

Eigen::MatrixXd flatten_jac(const std::vector<Eigen::MatrixXd>& blocks, int p, int node) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.cols();
  Eigen::MatrixXd J(p, total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    ensure_finite(b, node, "jac_g");
    if (b.rows() != p) throw ShapeMismatchError("jac_g block row count differs from p");
    J.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return J;
}

}  // namespace

DerivativeCheckReport check_derivatives(const CoupledProblem& prob, int points,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DerivativeCheckReport rep;
  const Eigen::VectorXd lo = prob.lower_stacked();
  const Eigen::VectorXd hi = prob.upper_stacked();

  for (int s = 0; s < points; ++s) {
    Eigen::VectorXd x = sample_in_box(lo, hi, rng, 0.05);
    for (int i = 0; i < prob.n(); ++i) {
      const auto& nd = prob.nodes[i];
      Eigen::VectorXd v = prob.gather(x, i);
      Eigen::VectorXd ga = flatten_grad(nd.grad_f(v), i);
      if (ga.size() != v.size())
        throw ShapeMismatchError("grad_f of node " + std::to_string(i) + " has wrong length");
      Eigen::MatrixXd Ja;
      if (prob.p > 0) Ja = flatten_jac(nd.jac_g(v), prob.p, i);

      for (Eigen::Index c = 0; c < v.size(); ++c) {
        const double h = 1e-6 * (1.0 + std::abs(v(c)));
        Eigen::VectorXd vp = v, vm = v;
        vp(c) += h;
        vm(c) -= h;
        double fp = nd.f(vp), fm = nd.f(vm);
        ensure_finite(fp, i, "f");
        ensure_finite(fm, i, "f");
        double fd = (fp - fm) / (2 * h);
        double err = std::abs(fd - ga(c)) / std::max({1.0, std::abs(fd), std::abs(ga(c))});
        rep.max_grad_rel_err = std::max(rep.max_grad_rel_err, err);

        if (prob.p > 0) {
          Eigen::VectorXd gp = nd.g(vp), gm = nd.g(vm);
          ensure_finite(gp, i, "g");
          ensure_finite(gm, i, "g");
          Eigen::VectorXd fdg = (gp - gm) / (2 * h);
          for (int r = 0; r < prob.p; ++r) {
            double e = std::abs(fdg(r) - Ja(r, c)) /
                       std::max({1.0, std::abs(fdg(r)), std::abs(Ja(r, c))});
            rep.max_jac_rel_err = std::max(rep.max_jac_rel_err, e);
          }
        }
      }
    }
  }
  return rep;
}

void verify_no_coupling(const CoupledProblem& prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd lo = prob.lower_stacked();
  const Eigen::VectorXd hi = prob.upper_stacked();

  for (int s = 0; s < 3; ++s) {
    Eigen::VectorXd x = sample_in_box(lo, hi, rng, 0.1);
    for (int i = 0; i < prob.n(); ++i) {
      const auto& nd = prob.nodes[i];
      Eigen::VectorXd v = prob.gather(x, i);
      double f0 = nd.f(v);
      Eigen::VectorXd g0 = prob.p > 0 ? nd.g(v) : Eigen::VectorXd();
      const auto& nb = prob.graph.neighbors(i);
      int at = 0;
      for (int j : nb) {
        if (j != i) {
          for (int c = 0; c < prob.nodes[j].dim; ++c) {
            Eigen::VectorXd w = v;
            double l = std::isfinite(lo(prob.x_offset[j] + c)) ? lo(prob.x_offset[j] + c) : -1.0;
            double h = std::isfinite(hi(prob.x_offset[j] + c)) ? hi(prob.x_offset[j] + c) : 1.0;
            w(at + c) = (w(at + c) - l < h - w(at + c)) ? h : l;
            double df = std::abs(nd.f(w) - f0);
            double dg = prob.p > 0 ? (nd.g(w) - g0).cwiseAbs().maxCoeff() : 0.0;
            if (df > 1e-12 * (1 + std::abs(f0)) || dg > 1e-12)
              throw ConfigError("no_coupling is set but node " + std::to_string(i) +
                                " depends on x of node " + std::to_string(j));
          }
        }
        at += prob.nodes[j].dim;
      }
    }
  }
}

LipschitzEstimates estimate_lipschitz(const CoupledProblem& prob, int samples,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd lo = prob.lower_stacked();
  const Eigen::VectorXd hi = prob.upper_stacked();
  constexpr double safety = 1.2;

  double lf = 0.0, lg = 0.0, beta = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = sample_in_box(lo, hi, rng, 0.0);
    Eigen::VectorXd y = sample_in_box(lo, hi, rng, 0.0);
    for (int i = 0; i < prob.n(); ++i) {
      const auto& nd = prob.nodes[i];
      Eigen::VectorXd v = prob.gather(x, i);
      Eigen::VectorXd w = prob.gather(y, i);
      double dvw = (v - w).norm();
      Eigen::VectorXd gv = flatten_grad(nd.grad_f(v), i);
      Eigen::VectorXd gw = flatten_grad(nd.grad_f(w), i);
      if (dvw > 1e-12) lf = std::max(lf, (gv - gw).norm() / dvw);
      if (prob.p > 0) {
        Eigen::MatrixXd Jv = flatten_jac(nd.jac_g(v), prob.p, i);
        Eigen::MatrixXd Jw = flatten_jac(nd.jac_g(w), prob.p, i);
        if (dvw > 1e-12) lg = std::max(lg, (Jv - Jw).norm() / dvw);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jv);
        beta = std::max(beta, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
      }
    }
  }

  LipschitzEstimates est;
  est.L_f = safety * lf;
  est.L_g = safety * lg;
  est.beta = safety * beta;
  const double nmax = prob.graph.max_neighborhood_size();
  est.L_F = est.L_f * nmax;
  est.beta_tilde = std::sqrt((1.0 + est.beta * est.beta) * nmax);
  return est;
}

}  // namespace decopt
