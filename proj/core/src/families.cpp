#include "decopt/families.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "decopt/errors.hpp"

namespace decopt {

namespace {

constexpr int kMaxAttempts = 100;

double feasibility_margin(double budget) { return 0.05 * std::max(1.0, std::abs(budget)); }

}  // namespace

LinearLogData gen_linear_log(const LinearLogOptions& opts) {
  if (opts.n <= 0) throw InvalidParameterError("n must be positive");
  std::mt19937_64 rng(opts.seed);
  const std::uint64_t graph_seed = rng();

  LinearLogData data;
  data.seed = opts.seed;
  data.graph = opts.graph.n > 0
                   ? opts.graph
                   : random_geometric_graph(opts.n, opts.target_avg_degree, graph_seed);
  if (data.graph.n != opts.n) throw ShapeMismatchError("explicit graph has wrong node count");
  data.budget = opts.budget < 0 ? 0.1 * opts.n : opts.budget;

  const bool explicit_coeffs = opts.cost.size() > 0 || opts.weight.size() > 0;
  if (explicit_coeffs &&
      (opts.cost.size() != opts.n || opts.weight.size() != opts.n))
    throw ShapeMismatchError("explicit coefficients must have length n");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double need = data.budget + feasibility_margin(data.budget);
  for (data.attempts = 1; data.attempts <= kMaxAttempts; ++data.attempts) {
    if (explicit_coeffs) {
      data.cost = opts.cost;
      data.weight = opts.weight;
    } else {
      data.cost.resize(opts.n);
      data.weight.resize(opts.n);
      for (int i = 0; i < opts.n; ++i) data.cost(i) = unit(rng);
      for (int i = 0; i < opts.n; ++i) data.weight(i) = unit(rng);
    }
    const double capacity = data.weight.sum() * std::log(2.0);
    if (capacity > need) return data;
    if (explicit_coeffs)
      throw InfeasibleError("budget " + std::to_string(data.budget) +
                            " exceeds the maximum attainable utility " +
                            std::to_string(capacity));
  }
  throw InfeasibleError("could not draw a strictly feasible instance for budget " +
                        std::to_string(data.budget));
}

std::shared_ptr<CoupledProblem> build_problem(const LinearLogData& data) {
  auto prob = std::make_shared<CoupledProblem>();
  prob->graph = data.graph;
  prob->p = 1;
  prob->m = 1;
  prob->no_coupling = true;
  const int n = data.graph.n;
  const double share = data.budget / n;

  prob->nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    NodeProblem& nd = prob->nodes[i];
    nd.dim = 1;
    nd.lower = Eigen::VectorXd::Zero(1);
    nd.upper = Eigen::VectorXd::Ones(1);

    const auto& nb = data.graph.neighbors(i);
    const int self = static_cast<int>(std::lower_bound(nb.begin(), nb.end(), i) - nb.begin());
    const int blocks = static_cast<int>(nb.size());
    const double ci = data.cost(i);
    const double wi = data.weight(i);

    nd.f = [ci, self](const Eigen::VectorXd& v) { return ci * v(self); };
    nd.grad_f = [ci, self, blocks](const Eigen::VectorXd&) {
      std::vector<Eigen::VectorXd> out(blocks, Eigen::VectorXd::Zero(1));
      out[self](0) = ci;
      return out;
    };
    nd.g = [wi, share, self](const Eigen::VectorXd& v) {
      Eigen::VectorXd r(1);
      r(0) = -wi * std::log1p(v(self)) + share;
      return r;
    };
    nd.jac_g = [wi, self, blocks](const Eigen::VectorXd& v) {
      std::vector<Eigen::MatrixXd> out(blocks, Eigen::MatrixXd::Zero(1, 1));
      out[self](0, 0) = -wi / (1.0 + v(self));
      return out;
    };
    for (int a = 0; a < blocks; ++a) nd.A_blocks.push_back(Eigen::MatrixXd::Zero(1, 1));
    nd.b = Eigen::VectorXd::Zero(1);
  }

  prob->slater_point = Eigen::VectorXd::Ones(n);
  finalize(*prob);
  return prob;
}

CoupledQuadraticData gen_coupled_quadratic(const CoupledQuadraticOptions& opts) {
  if (opts.n <= 0 || opts.d <= 0) throw InvalidParameterError("n and d must be positive");
  if (opts.p <= 0 || opts.m < 0) throw InvalidParameterError("p must be positive, m nonnegative");
  std::mt19937_64 rng(opts.seed);
  const std::uint64_t graph_seed = rng();

  CoupledQuadraticData data;
  data.seed = opts.seed;
  data.d = opts.d;
  data.m = opts.m;
  data.p = opts.p;
  data.graph = opts.graph.n > 0
                   ? opts.graph
                   : random_geometric_graph(opts.n, opts.target_avg_degree, graph_seed);
  if (data.graph.n != opts.n) throw ShapeMismatchError("explicit graph has wrong node count");

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto randn = [&](int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < c; ++b) M(a, b) = gauss(rng);
    return M;
  };

  const int n = opts.n;
  data.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    QuadNodeData& nd = data.nodes[i];
    const int dN = opts.d * static_cast<int>(data.graph.neighbors(i).size());
    Eigen::MatrixXd M = randn(dN, dN);
    nd.P = M.transpose() * M / dN;
    nd.Q.resize(dN);
    for (int c = 0; c < dN; ++c) nd.Q(c) = 2 * unit(rng) - 1;
    for (int l = 0; l < opts.p; ++l) {
      Eigen::MatrixXd Ml = randn(dN, dN);
      nd.ineq_quad.push_back(Ml.transpose() * Ml / dN);
    }
    nd.ineq_lin.resize(opts.p, dN);
    for (int l = 0; l < opts.p; ++l)
      for (int c = 0; c < dN; ++c) nd.ineq_lin(l, c) = 2 * unit(rng) - 1;
    nd.eq = opts.m > 0 ? (randn(opts.m, dN) / std::sqrt(double(dN))).eval()
                       : Eigen::MatrixXd::Zero(0, dN);
    nd.lower.resize(opts.d);
    nd.upper.resize(opts.d);
    for (int c = 0; c < opts.d; ++c) {
      nd.lower(c) = -1.0 - unit(rng);
      nd.upper(c) = 1.0 + unit(rng);
    }
  }

  data.slater.resize(static_cast<Eigen::Index>(n) * opts.d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < opts.d; ++c) {
      double lo = data.nodes[i].lower(c), hi = data.nodes[i].upper(c);
      data.slater(static_cast<Eigen::Index>(i) * opts.d + c) =
          lo + (0.3 + 0.4 * unit(rng)) * (hi - lo);
    }

  auto neighborhood_point = [&](int i) {
    const auto& nb = data.graph.neighbors(i);
    Eigen::VectorXd v(opts.d * nb.size());
    for (size_t a = 0; a < nb.size(); ++a)
      v.segment(a * opts.d, opts.d) =
          data.slater.segment(static_cast<Eigen::Index>(nb[a]) * opts.d, opts.d);
    return v;
  };

  Eigen::VectorXd total = Eigen::VectorXd::Zero(opts.p);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = neighborhood_point(i);
    for (int l = 0; l < opts.p; ++l)
      total(l) += v.dot(data.nodes[i].ineq_quad[l] * v) + data.nodes[i].ineq_lin.row(l).dot(v);
  }
  for (int i = 0; i < n; ++i) {
    data.nodes[i].ineq_shift = (total.array() / n + 1.0 / n).matrix();
    if (opts.m > 0)
      data.nodes[i].eq_rhs = data.nodes[i].eq * neighborhood_point(i);
    else
      data.nodes[i].eq_rhs = Eigen::VectorXd::Zero(0);
  }
  return data;
}

std::shared_ptr<CoupledProblem> build_problem(const CoupledQuadraticData& data) {
  auto prob = std::make_shared<CoupledProblem>();
  prob->graph = data.graph;
  prob->p = data.p;
  prob->m = data.m;
  prob->no_coupling = false;
  const int n = data.graph.n;
  const int d = data.d;
  const int p = data.p;

  prob->nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    NodeProblem& nd = prob->nodes[i];
    auto qd = std::make_shared<const QuadNodeData>(data.nodes[i]);
    const int blocks = static_cast<int>(data.graph.neighbors(i).size());
    nd.dim = d;
    nd.lower = qd->lower;
    nd.upper = qd->upper;

    nd.f = [qd](const Eigen::VectorXd& v) { return v.dot(qd->P * v) + qd->Q.dot(v); };
    nd.grad_f = [qd, blocks, d](const Eigen::VectorXd& v) {
      Eigen::VectorXd w = 2 * qd->P * v + qd->Q;
      std::vector<Eigen::VectorXd> out(blocks);
      for (int a = 0; a < blocks; ++a) out[a] = w.segment(static_cast<Eigen::Index>(a) * d, d);
      return out;
    };
    nd.g = [qd, p](const Eigen::VectorXd& v) {
      Eigen::VectorXd r(p);
      for (int l = 0; l < p; ++l)
        r(l) = v.dot(qd->ineq_quad[l] * v) + qd->ineq_lin.row(l).dot(v) - qd->ineq_shift(l);
      return r;
    };
    nd.jac_g = [qd, blocks, d, p](const Eigen::VectorXd& v) {
      Eigen::MatrixXd J(p, v.size());
      for (int l = 0; l < p; ++l)
        J.row(l) = (2 * qd->ineq_quad[l] * v + qd->ineq_lin.row(l).transpose()).transpose();
      std::vector<Eigen::MatrixXd> out(blocks);
      for (int a = 0; a < blocks; ++a)
        out[a] = J.middleCols(static_cast<Eigen::Index>(a) * d, d);
      return out;
    };
    for (int a = 0; a < blocks; ++a)
      nd.A_blocks.push_back(qd->eq.middleCols(static_cast<Eigen::Index>(a) * d, d));
    nd.b = qd->eq_rhs;
  }

  prob->slater_point = data.slater;
  finalize(*prob);
  return prob;
}

}  // namespace decopt
