#include "decopt/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "decopt/errors.hpp"
#include "decopt/mixing.hpp"

namespace decopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense stacked view of the coupled problem used only by the baseline solver.
struct StackedView {
  const CoupledProblem& prob;
  std::vector<Eigen::MatrixXd> abar;
  Eigen::MatrixXd eq_jac;  // m x total_dim, column block i is abar[i]
  long evals = 0;

  explicit StackedView(const CoupledProblem& p) : prob(p) {
    const int n = p.n();
    abar.resize(n);
    eq_jac = Eigen::MatrixXd::Zero(p.m, p.total_dim);
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p.m, p.nodes[i].dim);
      for (int j : p.graph.neighbors(i)) {
        const auto& nbj = p.graph.neighbors(j);
        auto it = std::lower_bound(nbj.begin(), nbj.end(), i);
        s += p.nodes[j].A_blocks[it - nbj.begin()];
      }
      abar[i] = s;
      eq_jac.middleCols(p.x_offset[i], p.nodes[i].dim) = s;
    }
  }

  double F(const Eigen::VectorXd& x) {
    ++evals;
    return prob.total_objective(x);
  }

  Eigen::VectorXd grad_F(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(prob.total_dim);
    for (int i = 0; i < prob.n(); ++i) {
      auto blocks = prob.nodes[i].grad_f(prob.gather(x, i));
      const auto& nb = prob.graph.neighbors(i);
      for (size_t a = 0; a < nb.size(); ++a) {
        if (!blocks[a].allFinite()) throw NonFiniteValueError(i, "grad_f");
        g.segment(prob.x_offset[nb[a]], prob.nodes[nb[a]].dim) += blocks[a];
      }
    }
    return g;
  }

  Eigen::VectorXd sum_g(const Eigen::VectorXd& x) const {
    return prob.p > 0 ? prob.total_inequality(x) : Eigen::VectorXd::Zero(0);
  }

  Eigen::MatrixXd jac_sum_g(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(prob.p, prob.total_dim);
    for (int i = 0; i < prob.n(); ++i) {
      auto blocks = prob.nodes[i].jac_g(prob.gather(x, i));
      const auto& nb = prob.graph.neighbors(i);
      for (size_t a = 0; a < nb.size(); ++a) {
        if (!blocks[a].allFinite()) throw NonFiniteValueError(i, "jac_g");
        J.middleCols(prob.x_offset[nb[a]], prob.nodes[nb[a]].dim) += blocks[a];
      }
    }
    return J;
  }

  Eigen::VectorXd eq_res(const Eigen::VectorXd& x) const {
    return prob.m > 0 ? prob.total_equality_residual(x) : Eigen::VectorXd::Zero(0);
  }
};

bool equality_part_inactive(const StackedView& sv) {
  if (sv.prob.m == 0) return true;
  if (sv.eq_jac.size() && sv.eq_jac.cwiseAbs().maxCoeff() > 0) return false;
  Eigen::VectorXd bsum = Eigen::VectorXd::Zero(sv.prob.m);
  for (const auto& nd : sv.prob.nodes) bsum += nd.b;
  return bsum.cwiseAbs().maxCoeff() <= 1e-12;
}

ReferenceSolution solve_grid(const CoupledProblem& prob, StackedView& sv,
                             const RefOptions& opts) {
  const int dim = prob.total_dim;
  const int gp = std::max(3, opts.grid_points);
  const Eigen::VectorXd lo = prob.lower_stacked();
  const Eigen::VectorXd hi = prob.upper_stacked();

  Eigen::VectorXd center = 0.5 * (lo + hi);
  Eigen::VectorXd width = hi - lo;
  Eigen::VectorXd best_x;
  double best_f = kInf;

  for (int round = 0; round < 40; ++round) {
    Eigen::VectorXd wlo = (center - 0.5 * width).cwiseMax(lo);
    Eigen::VectorXd whi = (center + 0.5 * width).cwiseMin(hi);

    std::vector<int> idx(dim, 0);
    Eigen::VectorXd x(dim);
    bool done = false;
    while (!done) {
      for (int c = 0; c < dim; ++c)
        x(c) = wlo(c) + (whi(c) - wlo(c)) * idx[c] / (gp - 1);
      bool feasible = true;
      if (prob.p > 0 && sv.sum_g(x).maxCoeff() > 0) feasible = false;
      if (feasible && prob.m > 0 && sv.eq_res(x).cwiseAbs().maxCoeff() > 1e-9)
        feasible = false;
      if (feasible) {
        double f = sv.F(x);
        if (f < best_f) {
          best_f = f;
          best_x = x;
        }
      } else {
        ++sv.evals;
      }
      int c = 0;
      while (c < dim && ++idx[c] == gp) idx[c++] = 0;
      done = (c == dim);
    }

    if (best_x.size() == 0)
      throw InfeasibleError("grid search found no feasible point");
    center = best_x;
    width *= 4.0 / (gp - 1);
    if (width.maxCoeff() < 1e-10 || sv.evals > opts.budget) break;
  }

  ReferenceSolution ref;
  ref.x_star = best_x;
  ref.f_star = best_f;
  ref.method = "grid";
  ref.evaluations = sv.evals;
  ref.budget_exhausted = sv.evals > opts.budget;
  if (prob.p > 0) ref.ineq_residual = std::max(0.0, sv.sum_g(best_x).maxCoeff());
  if (prob.m > 0) ref.eq_residual = sv.eq_res(best_x).norm();
  return ref;
}

ReferenceSolution solve_penalty(const CoupledProblem& prob, StackedView& sv,
                                const RefOptions& opts) {
  const Eigen::VectorXd lo = prob.lower_stacked();
  const Eigen::VectorXd hi = prob.upper_stacked();
  auto clamp = [&](const Eigen::VectorXd& v) { return v.cwiseMax(lo).cwiseMin(hi); };

  Eigen::VectorXd x;
  if (prob.slater_point.size()) {
    x = clamp(prob.slater_point);
  } else {
    x.resize(prob.total_dim);
    for (int c = 0; c < prob.total_dim; ++c) {
      double l = std::isfinite(lo(c)) ? lo(c) : -1.0;
      double h = std::isfinite(hi(c)) ? hi(c) : 1.0;
      x(c) = 0.5 * (l + h);
    }
  }

  double mu = 10.0;
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(prob.p);
  Eigen::VectorXd nuv = Eigen::VectorXd::Zero(prob.m);
  double inner_tol = 1e-4;
  double prev_res = kInf;
  double step = 1.0;
  bool exhausted = false;

  auto phi = [&](const Eigen::VectorXd& v) {
    double val = sv.F(v);
    if (prob.p > 0) {
      Eigen::VectorXd shifted = (lam + mu * sv.sum_g(v)).cwiseMax(0.0);
      val += (shifted.squaredNorm() - lam.squaredNorm()) / (2 * mu);
    }
    if (prob.m > 0) {
      Eigen::VectorXd er = sv.eq_res(v);
      val += nuv.dot(er) + 0.5 * mu * er.squaredNorm();
    }
    return val;
  };
  auto grad_phi = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = sv.grad_F(v);
    if (prob.p > 0) {
      Eigen::VectorXd shifted = (lam + mu * sv.sum_g(v)).cwiseMax(0.0);
      g += sv.jac_sum_g(v).transpose() * shifted;
    }
    if (prob.m > 0) g += sv.eq_jac.transpose() * (nuv + mu * sv.eq_res(v));
    return g;
  };

  for (int outer = 0; outer < 60 && !exhausted; ++outer) {
    double fx = phi(x);
    for (int it = 0; it < 4000; ++it) {
      Eigen::VectorXd g = grad_phi(x);
      Eigen::VectorXd xn;
      double fn = 0.0;
      int bt = 0;
      for (; bt < 60; ++bt) {
        xn = clamp(x - step * g);
        fn = phi(xn);
        double quad = fx + g.dot(xn - x) + (xn - x).squaredNorm() / (2 * step);
        if (fn <= quad + 1e-14 * std::abs(fx)) break;
        step *= 0.5;
      }
      double move = ((x - xn) / step).cwiseAbs().maxCoeff();
      x = xn;
      fx = fn;
      if (bt == 0) step *= 1.3;
      if (move <= inner_tol) break;
      if (sv.evals > opts.budget) {
        exhausted = true;
        break;
      }
    }

    double res = 0.0;
    if (prob.p > 0) {
      Eigen::VectorXd sg = sv.sum_g(x);
      lam = (lam + mu * sg).cwiseMax(0.0);
      res = std::max(res, sg.maxCoeff());
    }
    if (prob.m > 0) {
      Eigen::VectorXd er = sv.eq_res(x);
      nuv += mu * er;
      res = std::max(res, er.cwiseAbs().maxCoeff());
    }
    res = std::max(0.0, res);
    if (res <= opts.tol && inner_tol <= 1e-10) break;
    if (res > 0.25 * prev_res) mu = std::min(mu * 2.0, 1e12);
    prev_res = std::max(res, 1e-300);
    inner_tol = std::max(inner_tol * 0.2, 1e-12);
  }

  ReferenceSolution ref;
  ref.x_star = x;
  ref.f_star = sv.F(x);
  ref.method = "penalty-pg";
  ref.evaluations = sv.evals;
  ref.budget_exhausted = exhausted;
  if (prob.p > 0) ref.ineq_residual = std::max(0.0, sv.sum_g(x).maxCoeff());
  if (prob.m > 0) ref.eq_residual = sv.eq_res(x).norm();
  ref.penalty_multiplier_ineq = lam;
  ref.penalty_multiplier_eq = nuv;
  return ref;
}

}  // namespace

ReferenceSolution solve_reference(const CoupledProblem& prob, const RefOptions& opts) {
  StackedView sv(prob);
  bool grid_ok = prob.total_dim <= 4 && prob.p <= 1 && equality_part_inactive(sv);
  RefMethod method = opts.method;
  if (method == RefMethod::automatic)
    method = grid_ok ? RefMethod::grid : RefMethod::penalty_pg;
  if (method == RefMethod::grid && !grid_ok)
    throw ConfigError(
        "grid reference requires total dimension <= 4, at most one inequality "
        "row and an inactive equality part");
  return method == RefMethod::grid ? solve_grid(prob, sv, opts)
                                   : solve_penalty(prob, sv, opts);
}

DualEstimate estimate_dual(const CoupledProblem& prob, const ReferenceSolution& ref) {
  StackedView sv(prob);
  const Eigen::VectorXd& x = ref.x_star;
  if (x.size() != prob.total_dim) throw ShapeMismatchError("reference point has wrong length");
  const Eigen::VectorXd lo = prob.lower_stacked();
  const Eigen::VectorXd hi = prob.upper_stacked();

  std::vector<int> interior;
  for (int c = 0; c < prob.total_dim; ++c) {
    double act = 1e-6 * (1.0 + std::abs(x(c)));
    if (x(c) - lo(c) > act && hi(c) - x(c) > act) interior.push_back(c);
  }

  Eigen::VectorXd gF = sv.grad_F(x);
  Eigen::MatrixXd Jg = prob.p > 0 ? sv.jac_sum_g(x) : Eigen::MatrixXd(0, prob.total_dim);
  Eigen::VectorXd slack = sv.sum_g(x);

  std::vector<int> active;
  for (int l = 0; l < prob.p; ++l)
    if (slack(l) >= -1e-6) active.push_back(l);

  const int cols = static_cast<int>(active.size()) + prob.m;
  const int rows = static_cast<int>(interior.size());

  DualEstimate est;
  est.mu = Eigen::VectorXd::Zero(prob.p);
  est.nu = Eigen::VectorXd::Zero(prob.m);
  est.interior_coords = rows;

  if (rows == 0 || cols == 0) {
    est.rank_deficient = cols > 0;
  } else {
    Eigen::MatrixXd M(rows, cols);
    Eigen::VectorXd rhs(rows);
    for (int r = 0; r < rows; ++r) {
      int c = interior[r];
      for (size_t a = 0; a < active.size(); ++a) M(r, a) = Jg(active[a], c);
      for (int e = 0; e < prob.m; ++e) M(r, active.size() + e) = sv.eq_jac(e, c);
      rhs(r) = -gF(c);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    int rank = 0;
    for (int s = 0; s < svd.singularValues().size(); ++s)
      if (svd.singularValues()(s) > 1e-10 * std::max(1.0, smax)) ++rank;
    est.rank_deficient = rank < cols;
    Eigen::VectorXd w = svd.solve(rhs);
    for (size_t a = 0; a < active.size(); ++a) est.mu(active[a]) = std::max(0.0, w(a));
    for (int e = 0; e < prob.m; ++e) est.nu(e) = w(active.size() + e);
  }

  Eigen::VectorXd resid = gF;
  if (prob.p > 0) resid += Jg.transpose() * est.mu;
  if (prob.m > 0) resid += sv.eq_jac.transpose() * est.nu;
  double worst = 0.0;
  for (int c : interior) worst = std::max(worst, std::abs(resid(c)));
  est.stationarity_residual = worst;

  const int n = prob.n();
  est.lambda.resize(static_cast<Eigen::Index>(n) * prob.p);
  for (int i = 0; i < n; ++i)
    est.lambda.segment(static_cast<Eigen::Index>(i) * prob.p, prob.p) = est.mu;
  est.lambda_norm = est.lambda.norm();
  est.u_star.resize(prob.m + prob.p);
  est.u_star.head(prob.m) = est.nu;
  est.u_star.tail(prob.p) = est.mu;

  est.lambda_norm_slater_bound = kInf;
  if (prob.slater_point.size() && prob.p > 0) {
    Eigen::VectorXd sg = sv.sum_g(prob.slater_point);
    double min_slack = -sg.maxCoeff();
    if (min_slack > 0) {
      double fs = sv.F(prob.slater_point);
      est.lambda_norm_slater_bound =
          std::sqrt(double(n)) * std::max(0.0, fs - ref.f_star) / min_slack;
    }
  }
  return est;
}

RateConstants compute_constants(const LiftedProblem& lp, const ReferenceSolution& ref,
                                const DualEstimate& dual, const LipschitzEstimates& lips,
                                const AlgoParams& params, const Eigen::VectorXd& y0_in,
                                const Eigen::VectorXd& u0_in) {
  const auto& prob = lp.problem();
  const auto& graph = prob.graph;
  const int n = lp.n();
  const int bs = lp.dual_block();
  const double rho = params.rho;
  const double gamma = params.gamma;

  RateConstants rc;
  rc.lips = lips;
  rc.BtB_norm = lp.BtB_norm();
  rc.rho_used = rho;
  rc.gamma_used = gamma;
  rc.f_star = ref.f_star;

  rc.y_star = lp.from_parts(ref.x_star, lp.centered_slack(ref.x_star));
  rc.z_star = lp.apply_B(rc.y_star) - lp.c();
  rc.lambda_star = dual.lambda;
  rc.u_star = dual.u_star;
  rc.lambda_norm = dual.lambda_norm;
  rc.lambda_sum = dual.lambda.size() ? dual.lambda.sum() : 0.0;

  Eigen::VectorXd y0 = y0_in.size() ? lp.project_Y(y0_in)
                                    : lp.project_Y(Eigen::VectorXd::Zero(lp.dim_y()));
  Eigen::VectorXd u0 = u0_in.size() ? u0_in : Eigen::VectorXd::Zero(lp.dim_u());
  Eigen::VectorXd z0 =
      rho * apply_block_mixing(params.weights.PH, graph, u0, bs);

  Eigen::VectorXd ustack(static_cast<Eigen::Index>(n) * bs);
  for (int i = 0; i < n; ++i)
    ustack.segment(static_cast<Eigen::Index>(i) * bs, bs) = dual.u_star;
  rc.u_stack_norm_w = block_quadratic_norm(params.weights.PW, graph, ustack, bs);
  rc.u0_norm_w = block_quadratic_norm(params.weights.PW, graph, u0, bs);

  const double hp = block_pinv_quadratic_norm(params.weights.PH, z0 - rc.z_star, bs);
  Eigen::VectorXd G0 = lp.eval_G(y0);
  Eigen::VectorXd Gstar = lp.eval_G(rc.y_star);
  Eigen::VectorXd q0 = (-G0).cwiseMax(0.0);
  Eigen::VectorXd dy = y0 - rc.y_star;
  const double gamma_term =
      0.5 * (dy.squaredNorm() / gamma - lp.apply_B(dy).squaredNorm() / rho);

  const double R = hp * hp / (2 * rho) +
                   0.5 * rho * (rc.u0_norm_w + rc.u_stack_norm_w) *
                       (rc.u0_norm_w + rc.u_stack_norm_w) +
                   0.5 * G0.squaredNorm() + 0.5 * Gstar.squaredNorm() +
                   0.5 * q0.squaredNorm() + rc.lambda_norm * rc.lambda_norm;
  rc.C = R + gamma_term;
  rc.negative_C = rc.C < 0;

  const double sqrtC = std::sqrt(std::max(0.0, rc.C));
  const double drift = rc.u0_norm_w + rc.u_stack_norm_w + std::sqrt(2 * std::max(0.0, rc.C) / rho);
  rc.D0 = rho * std::sqrt(double(n)) * drift;
  rc.C0 = 2 * (rc.lambda_norm + sqrtC) * rc.lambda_sum + rho * ustack.norm() * drift;
  rc.S0 = hp * hp / (2 * rho) + 0.5 * rho * rc.u0_norm_w * rc.u0_norm_w + gamma_term +
          0.5 * q0.squaredNorm() - 0.5 * G0.squaredNorm();
  rc.bound_G_coeff = 2 * (rc.lambda_norm + sqrtC);
  rc.bound_total_ineq_coeff = 2 * n * (rc.lambda_norm + sqrtC) + rc.D0;

  const double root_np = std::sqrt(double(lp.dim_q()));
  const double base = rc.BtB_norm / rho + lips.beta_tilde * lips.beta_tilde + lips.L_F;
  const double sigma =
      2 * lips.L_g * root_np * dy.norm() +
      std::sqrt(4 * lips.L_g * lips.L_g * lp.dim_q() * dy.squaredNorm() + base +
                4 * root_np * lips.L_g * (rc.lambda_norm + std::sqrt(R)));
  rc.gamma_tilde = sigma > 0 ? 1.0 / (sigma * sigma) : kInf;

  const double need = base + 4 * root_np * lips.L_g * (rc.lambda_norm + sqrtC);
  rc.gamma_satisfies_bound = !rc.negative_C && (1.0 / gamma >= need * (1 - 1e-12));
  return rc;
}

namespace {

struct SlopeFit {
  double slope = 0.0;
  int points = 0;
  bool below_floor = false;
  bool hits_floor = false;
};

SlopeFit fit_slope(const std::vector<std::pair<int, double>>& series,
                   const BoundCheckOptions& opts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  int in_window = 0;
  SlopeFit f;
  for (auto [k, v] : series) {
    if (k < opts.slope_k_min || k > opts.slope_k_max) continue;
    ++in_window;
    if (v <= opts.slope_floor) {
      f.hits_floor = true;
      continue;
    }
    double lx = std::log(double(k)), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  f.points = cnt;
  if (cnt >= 10) {
    f.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  } else {
    f.below_floor = in_window > 0;
  }
  return f;
}

}  // namespace

BoundCheckReport check_rate_bounds(const std::vector<IterationRecord>& records,
                                   const RateConstants& c, const BoundCheckOptions& opts) {
  BoundCheckReport rep;
  rep.min_margin_G = rep.min_margin_eq = rep.min_margin_total_ineq =
      rep.min_margin_obj_upper = rep.min_margin_obj_lower = kInf;

  std::vector<std::pair<int, double>> cons_series, obj_series;

  for (const auto& r : records) {
    if (r.k <= 0) continue;
    ++rep.checked;
    const double k = r.k;
    auto slack = [&](double bound) { return std::abs(bound) * opts.rel_slack + opts.abs_slack; };
    bool bad = false;

    double mg = c.bound_G_coeff / k - r.G_avg_max;
    rep.min_margin_G = std::min(rep.min_margin_G, mg);
    if (mg < -slack(c.bound_G_coeff / k)) {
      ++rep.violations_G;
      bad = true;
    }

    double me = c.D0 / k - r.lifted_eq_norm;
    rep.min_margin_eq = std::min(rep.min_margin_eq, me);
    if (me < -slack(c.D0 / k)) {
      ++rep.violations_eq;
      bad = true;
    }

    double mt = c.bound_total_ineq_coeff / k - r.total_ineq_max_avg;
    rep.min_margin_total_ineq = std::min(rep.min_margin_total_ineq, mt);
    if (mt < -slack(c.bound_total_ineq_coeff / k)) {
      ++rep.violations_total_ineq;
      bad = true;
    }

    double mu_up = c.S0 / k - r.obj_gap_avg;
    rep.min_margin_obj_upper = std::min(rep.min_margin_obj_upper, mu_up);
    if (mu_up < -slack(c.S0 / k)) {
      ++rep.violations_obj_upper;
      bad = true;
    }

    double mu_lo = r.obj_gap_avg + c.C0 / k;
    rep.min_margin_obj_lower = std::min(rep.min_margin_obj_lower, mu_lo);
    if (mu_lo < -slack(c.C0 / k)) {
      ++rep.violations_obj_lower;
      bad = true;
    }

    if (bad && rep.first_violation_k < 0) rep.first_violation_k = r.k;

    cons_series.push_back({r.k, std::max(0.0, r.total_ineq_max_avg)});
    obj_series.push_back({r.k, std::abs(r.obj_gap_avg)});
  }

  SlopeFit fc = fit_slope(cons_series, opts);
  SlopeFit fo = fit_slope(obj_series, opts);
  rep.slope_constraint = fc.slope;
  rep.slope_points_constraint = fc.points;
  rep.constraint_below_floor = fc.below_floor;
  rep.constraint_hits_floor = fc.hits_floor;
  rep.slope_obj = fo.slope;
  rep.slope_points_obj = fo.points;
  rep.obj_below_floor = fo.below_floor;
  rep.obj_hits_floor = fo.hits_floor;
  return rep;
}

}  // namespace decopt
