#include "decopt/lifted.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "decopt/errors.hpp"

namespace decopt {

LiftedProblem::LiftedProblem(std::shared_ptr<const CoupledProblem> prob)
    : prob_(std::move(prob)) {
  if (!prob_) throw InvalidParameterError("null problem");
  if (prob_->x_offset.empty() && prob_->n() > 0)
    throw ConfigError("problem was not finalized");

  const int n = prob_->n();
  const int p = prob_->p;
  const int m = prob_->m;

  y_off_.assign(n, 0);
  int at = 0;
  for (int i = 0; i < n; ++i) {
    y_off_[i] = at;
    at += prob_->nodes[i].dim + p;
  }
  dim_y_ = at;

  Abar_.resize(n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, prob_->nodes[i].dim);
    for (int j : prob_->graph.neighbors(i)) {
      const auto& nbj = prob_->graph.neighbors(j);
      auto it = std::lower_bound(nbj.begin(), nbj.end(), i);
      s += prob_->nodes[j].A_blocks[it - nbj.begin()];
    }
    Abar_[i] = s;
  }

  c_.resize(static_cast<Eigen::Index>(n) * dual_block());
  for (int i = 0; i < n; ++i) {
    c_.segment(static_cast<Eigen::Index>(i) * dual_block(), m) = prob_->nodes[i].b;
    c_.segment(static_cast<Eigen::Index>(i) * dual_block() + m, p).setZero();
  }

  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double a2 = 0.0;
    if (m > 0 && Abar_[i].size() > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Abar_[i]);
      a2 = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
      a2 *= a2;
    }
    worst = std::max(worst, p > 0 ? std::max(a2, 1.0) : a2);
  }
  btb_norm_ = worst;
}

Eigen::VectorXd LiftedProblem::c_block(int i) const {
  return c_.segment(static_cast<Eigen::Index>(i) * dual_block(), dual_block());
}

Eigen::VectorXd LiftedProblem::x_part(const Eigen::VectorXd& y) const {
  Eigen::VectorXd x(prob_->total_dim);
  for (int i = 0; i < n(); ++i)
    x.segment(prob_->x_offset[i], node_dim(i)) = y.segment(y_off_[i], node_dim(i));
  return x;
}

Eigen::VectorXd LiftedProblem::t_part(const Eigen::VectorXd& y) const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(n()) * p());
  for (int i = 0; i < n(); ++i)
    t.segment(static_cast<Eigen::Index>(i) * p(), p()) = y.segment(t_offset_in_y(i), p());
  return t;
}

Eigen::VectorXd LiftedProblem::from_parts(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& t) const {
  if (x.size() != prob_->total_dim || t.size() != static_cast<Eigen::Index>(n()) * p())
    throw ShapeMismatchError("x or t part has wrong length");
  Eigen::VectorXd y(dim_y_);
  for (int i = 0; i < n(); ++i) {
    y.segment(y_off_[i], node_dim(i)) = x.segment(prob_->x_offset[i], node_dim(i));
    y.segment(t_offset_in_y(i), p()) = t.segment(static_cast<Eigen::Index>(i) * p(), p());
  }
  return y;
}

Eigen::VectorXd LiftedProblem::centered_slack(const Eigen::VectorXd& x) const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(n()) * p());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p());
  for (int i = 0; i < n(); ++i) {
    Eigen::VectorXd gi = prob_->nodes[i].g(prob_->gather(x, i));
    if (!gi.allFinite()) throw NonFiniteValueError(i, "g");
    t.segment(static_cast<Eigen::Index>(i) * p(), p()) = gi;
    mean += gi;
  }
  mean /= n();
  for (int i = 0; i < n(); ++i) t.segment(static_cast<Eigen::Index>(i) * p(), p()) -= mean;
  return t;
}

Eigen::VectorXd LiftedProblem::gather_x(const Eigen::VectorXd& y, int i) const {
  Eigen::VectorXd v(prob_->neighborhood_dim(i));
  int at = 0;
  for (int j : prob_->graph.neighbors(i)) {
    v.segment(at, node_dim(j)) = y.segment(y_off_[j], node_dim(j));
    at += node_dim(j);
  }
  return v;
}

double LiftedProblem::eval_f(const Eigen::VectorXd& y) const {
  double s = 0.0;
  for (int i = 0; i < n(); ++i) {
    double fi = prob_->nodes[i].f(gather_x(y, i));
    if (!std::isfinite(fi)) throw NonFiniteValueError(i, "f");
    s += fi;
  }
  return s;
}

Eigen::VectorXd LiftedProblem::eval_grad_f(const Eigen::VectorXd& y) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim_y_);
  for (int i = 0; i < n(); ++i) {
    auto blocks = prob_->nodes[i].grad_f(gather_x(y, i));
    const auto& nb = prob_->graph.neighbors(i);
    if (blocks.size() != nb.size())
      throw ShapeMismatchError("grad_f of node " + std::to_string(i) +
                               " returned wrong block count");
    for (size_t a = 0; a < nb.size(); ++a) {
      if (!blocks[a].allFinite()) throw NonFiniteValueError(i, "grad_f");
      if (blocks[a].size() != node_dim(nb[a]))
        throw ShapeMismatchError("grad_f block of node " + std::to_string(i) +
                                 " has wrong length");
      grad.segment(y_off_[nb[a]], node_dim(nb[a])) += blocks[a];
    }
  }
  return grad;
}

Eigen::VectorXd LiftedProblem::eval_G(const Eigen::VectorXd& y) const {
  Eigen::VectorXd G(static_cast<Eigen::Index>(n()) * p());
  for (int i = 0; i < n(); ++i) {
    Eigen::VectorXd gi = prob_->nodes[i].g(gather_x(y, i));
    if (!gi.allFinite()) throw NonFiniteValueError(i, "g");
    if (gi.size() != p())
      throw ShapeMismatchError("g of node " + std::to_string(i) + " returned wrong length");
    G.segment(static_cast<Eigen::Index>(i) * p(), p()) = gi - y.segment(t_offset_in_y(i), p());
  }
  return G;
}

Eigen::VectorXd LiftedProblem::apply_jacG_T(const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& w) const {
  if (w.size() != static_cast<Eigen::Index>(n()) * p())
    throw ShapeMismatchError("multiplier vector has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_y_);
  for (int i = 0; i < n(); ++i) {
    auto blocks = prob_->nodes[i].jac_g(gather_x(y, i));
    const auto& nb = prob_->graph.neighbors(i);
    if (blocks.size() != nb.size())
      throw ShapeMismatchError("jac_g of node " + std::to_string(i) +
                               " returned wrong block count");
    Eigen::VectorXd wi = w.segment(static_cast<Eigen::Index>(i) * p(), p());
    for (size_t a = 0; a < nb.size(); ++a) {
      if (!blocks[a].allFinite()) throw NonFiniteValueError(i, "jac_g");
      if (blocks[a].rows() != p() || blocks[a].cols() != node_dim(nb[a]))
        throw ShapeMismatchError("jac_g block of node " + std::to_string(i) +
                                 " has wrong shape");
      out.segment(y_off_[nb[a]], node_dim(nb[a])) += blocks[a].transpose() * wi;
    }
    out.segment(t_offset_in_y(i), p()) -= wi;
  }
  return out;
}

Eigen::VectorXd LiftedProblem::project_Y(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out = y;
  for (int i = 0; i < n(); ++i) {
    const auto& nd = prob_->nodes[i];
    out.segment(y_off_[i], nd.dim) =
        out.segment(y_off_[i], nd.dim).cwiseMax(nd.lower).cwiseMin(nd.upper);
  }
  return out;
}

Eigen::VectorXd LiftedProblem::apply_B(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(n()) * dual_block());
  for (int i = 0; i < n(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * dual_block(), m()) =
        Abar_[i] * y.segment(y_off_[i], node_dim(i));
    out.segment(static_cast<Eigen::Index>(i) * dual_block() + m(), p()) =
        y.segment(t_offset_in_y(i), p());
  }
  return out;
}

Eigen::VectorXd LiftedProblem::apply_BT(const Eigen::VectorXd& v) const {
  if (v.size() != static_cast<Eigen::Index>(n()) * dual_block())
    throw ShapeMismatchError("dual vector has wrong length");
  Eigen::VectorXd out(dim_y_);
  for (int i = 0; i < n(); ++i) {
    out.segment(y_off_[i], node_dim(i)) =
        Abar_[i].transpose() * v.segment(static_cast<Eigen::Index>(i) * dual_block(), m());
    out.segment(t_offset_in_y(i), p()) =
        v.segment(static_cast<Eigen::Index>(i) * dual_block() + m(), p());
  }
  return out;
}

Eigen::VectorXd LiftedProblem::block_residual_sum(const Eigen::VectorXd& y) const {
  Eigen::VectorXd By = apply_B(y);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dual_block());
  for (int i = 0; i < n(); ++i)
    s += By.segment(static_cast<Eigen::Index>(i) * dual_block(), dual_block()) - c_block(i);
  return s;
}

std::shared_ptr<LiftedProblem> lift(std::shared_ptr<const CoupledProblem> prob) {
  return std::make_shared<LiftedProblem>(std::move(prob));
}

}  // namespace decopt
