#include "decopt/mixing.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "decopt/errors.hpp"

namespace decopt {

WeightPair build_weight_matrices(const Graph& g, double shrink) {
  if (!(shrink > 0.0 && shrink <= 1.0))
    throw InvalidParameterError("shrink must lie in (0, 1]");

  const int n = g.n;
  Eigen::MatrixXd metro = Eigen::MatrixXd::Zero(n, n);
  for (auto [a, b] : g.edges) {
    double w = 1.0 / (1.0 + std::max(g.degree(a), g.degree(b)));
    metro(a, b) = w;
    metro(b, a) = w;
  }
  for (int i = 0; i < n; ++i) metro(i, i) = 1.0 - metro.row(i).sum();

  WeightPair wp;
  wp.PW = 0.5 * (Eigen::MatrixXd::Identity(n, n) + metro);
  wp.PH = 0.5 * shrink * (Eigen::MatrixXd::Identity(n, n) - metro);
  return wp;
}

namespace {

bool follows_sparsity(const Eigen::MatrixXd& M, const Graph& g) {
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (M(i, j) != 0.0 && !g.adjacent(i, j)) return false;
  return true;
}

}  // namespace

WeightValidationReport validate_weights(const WeightPair& wp, const Graph& g) {
  constexpr double tol = 1e-10;
  const int n = g.n;
  if (wp.PW.rows() != n || wp.PW.cols() != n || wp.PH.rows() != n || wp.PH.cols() != n)
    throw ShapeMismatchError("weight matrices must be n x n");

  WeightValidationReport r;
  r.sparsity_ok = follows_sparsity(wp.PW, g) && follows_sparsity(wp.PH, g);
  r.symmetry_ok = (wp.PW - wp.PW.transpose()).cwiseAbs().maxCoeff() <= tol &&
                  (wp.PH - wp.PH.transpose()).cwiseAbs().maxCoeff() <= tol;
  r.row_stochastic_ok =
      (wp.PW * Eigen::VectorXd::Ones(n) - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= tol;
  r.ph_zero_row_sum_ok = (wp.PH * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= tol;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(wp.PW);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(wp.PH);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wp.PW + wp.PH);
  r.pw_min_eig = ew.eigenvalues().minCoeff();
  r.ph_min_eig = eh.eigenvalues().minCoeff();
  r.ph_second_smallest_eig = n > 1 ? eh.eigenvalues()(1) : 0.0;
  r.sum_max_eig = es.eigenvalues().maxCoeff();

  r.psd_ok = r.pw_min_eig >= -tol && r.ph_min_eig >= -tol;
  r.ph_null_space_is_consensus = n == 1 || r.ph_second_smallest_eig > tol;
  r.sum_spectrum_ok = r.sum_max_eig <= 1.0 + tol;

  int top_dim = 0;
  double top = es.eigenvalues()(n - 1);
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()(i) >= top - 1e-8) ++top_dim;
  if (top_dim == 1) {
    Eigen::VectorXd v = es.eigenvectors().col(n - 1);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
    r.sum_top_eigenspace_is_consensus = std::abs(std::abs(v.dot(ones)) - 1.0) <= 1e-8;
  }
  return r;
}

std::string WeightValidationReport::summary() const {
  std::ostringstream os;
  auto yn = [](bool b) { return b ? "ok" : "FAIL"; };
  os << "sparsity=" << yn(sparsity_ok) << " symmetry=" << yn(symmetry_ok)
     << " psd=" << yn(psd_ok) << " (min eig PW " << pw_min_eig << ", PH " << ph_min_eig
     << ") PW*1=1: " << yn(row_stochastic_ok) << " PH*1=0: " << yn(ph_zero_row_sum_ok)
     << " null(PH)=span(1): " << (ph_null_space_is_consensus ? "yes" : "no")
     << " lambda_max(PW+PH)=" << sum_max_eig << " (<=1: " << yn(sum_spectrum_ok)
     << ", top eigenspace consensus-only: " << (sum_top_eigenspace_is_consensus ? "yes" : "no")
     << ")";
  return os.str();
}

Eigen::VectorXd apply_block_mixing(const Eigen::MatrixXd& M, const Graph& g,
                                   const Eigen::VectorXd& v, int bs) {
  if (v.size() != static_cast<Eigen::Index>(g.n) * bs)
    throw ShapeMismatchError("block vector size does not match n*bs");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int i = 0; i < g.n; ++i)
    for (int j : g.neighbors(i))
      out.segment(static_cast<Eigen::Index>(i) * bs, bs) +=
          M(i, j) * v.segment(static_cast<Eigen::Index>(j) * bs, bs);
  return out;
}

double block_quadratic_norm(const Eigen::MatrixXd& M, const Graph& g,
                            const Eigen::VectorXd& v, int bs) {
  double q = v.dot(apply_block_mixing(M, g, v, bs));
  return std::sqrt(std::max(0.0, q));
}

double block_pinv_quadratic_norm(const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                                 int bs, double eig_floor) {
  const int n = static_cast<int>(M.rows());
  if (v.size() != static_cast<Eigen::Index>(n) * bs)
    throw ShapeMismatchError("block vector size does not match n*bs");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  double q = 0.0;
  for (int l = 0; l < n; ++l) {
    double lam = es.eigenvalues()(l);
    if (lam < eig_floor) continue;
    Eigen::VectorXd comp = Eigen::VectorXd::Zero(bs);
    for (int i = 0; i < n; ++i)
      comp += es.eigenvectors()(i, l) * v.segment(static_cast<Eigen::Index>(i) * bs, bs);
    q += comp.squaredNorm() / lam;
  }
  return std::sqrt(q);
}

}  // namespace decopt
