#pragma once

#include <Eigen/Dense>
#include <string>

#include "decopt/graph.hpp"

namespace decopt {

// Gossip matrix pair used by the dual updates. Both matrices follow the graph
// sparsity pattern ([M]_ij != 0 only for j in the closed neighborhood of i),
// are symmetric PSD, PW is row stochastic with PW*1 = 1, and PH*1 = 0 with
// null space exactly span(1) on a connected graph.
struct WeightPair {
  Eigen::MatrixXd PW;
  Eigen::MatrixXd PH;
};

// Metropolis construction: off-diagonal weights 1/(1+max(deg_i,deg_j)) on
// edges, diagonal set to the row remainder, then PW = (I+P')/2 and
// PH = shrink*(I-P')/2 with shrink in (0,1].
WeightPair build_weight_matrices(const Graph& g, double shrink = 1.0);

struct WeightValidationReport {
  bool sparsity_ok = false;
  bool symmetry_ok = false;
  bool psd_ok = false;
  bool row_stochastic_ok = false;
  bool ph_zero_row_sum_ok = false;
  bool ph_null_space_is_consensus = false;
  bool sum_spectrum_ok = false;

  double pw_min_eig = 0.0;
  double ph_min_eig = 0.0;
  double ph_second_smallest_eig = 0.0;
  double sum_max_eig = 0.0;

  // lambda_max(PW+PH) = 1 is unavoidable because PW*1 = 1 and PH*1 = 0, so the
  // spectrum check accepts eigenvalue 1 and additionally reports whether the
  // top eigenspace of PW+PH is exactly the consensus direction.
  bool sum_top_eigenspace_is_consensus = false;

  bool pass() const {
    return sparsity_ok && symmetry_ok && psd_ok && row_stochastic_ok &&
           ph_zero_row_sum_ok && sum_spectrum_ok;
  }
  std::string summary() const;
};

WeightValidationReport validate_weights(const WeightPair& wp, const Graph& g);

// out_i = sum_{j in N_i} M(i,j) v_j for block vectors with blocks of size bs,
// accumulated in ascending neighbor order.
Eigen::VectorXd apply_block_mixing(const Eigen::MatrixXd& M, const Graph& g,
                                   const Eigen::VectorXd& v, int bs);

// sqrt(v^T (M (x) I_bs) v), clamped at zero before the square root.
double block_quadratic_norm(const Eigen::MatrixXd& M, const Graph& g,
                            const Eigen::VectorXd& v, int bs);

// Pseudo-inverse quadratic norm sqrt(v^T (M^+ (x) I_bs) v): eigenvalues of M
// below eig_floor are treated as exact zeros and their components dropped.
double block_pinv_quadratic_norm(const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                                 int bs, double eig_floor = 1e-10);

}  // namespace decopt
