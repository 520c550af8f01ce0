#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "decopt/algorithm.hpp"
#include "decopt/lifted.hpp"

namespace decopt {

enum class MsgPhase { setup, cross_term, post_primal_x, post_dual_u };

const char* msg_phase_name(MsgPhase p);

// One directed payload between graph neighbors. Setup messages carry the
// initial x and u of the sender plus the sender's coupling block acting on
// the receiver; later phases carry a single vector.
struct Message {
  int from = 0;
  int to = 0;
  int round = 0;
  MsgPhase phase = MsgPhase::setup;
  Eigen::VectorXd vec;
  Eigen::VectorXd vec2;
  Eigen::MatrixXd mat;

  long scalar_count() const {
    return static_cast<long>(vec.size() + vec2.size() + mat.size());
  }
};

struct CommAudit {
  struct Row {
    int round = 0;
    MsgPhase phase = MsgPhase::setup;
    long messages = 0;
    long scalars = 0;
  };
  std::vector<Row> rows;
  long locality_violations = 0;

  long total_messages() const;
  long total_scalars() const;
  // Columns: round,phase,messages,scalars
  void write_csv(std::ostream& out) const;
};

// Variables held by one node: its primal block, slack, queue and dual pair.
struct NodeState {
  Eigen::VectorXd x;
  Eigen::VectorXd t;
  Eigen::VectorXd q;
  Eigen::VectorXd u;
  Eigen::VectorXd z;
};

// Everything a node has received, keyed by neighbor id.
struct NeighborInbox {
  std::map<int, Eigen::VectorXd> x;
  std::map<int, Eigen::VectorXd> u;
  std::map<int, Eigen::VectorXd> cross;
};

// Step direction of one node, assembled from its own state, its inbox, its
// aggregated coupling column Abar_i and its weight rows only. Layout: first
// the x block, then the slack block. Throws MissingNeighborMessageError when
// a required neighbor value is absent; when the problem is flagged as
// uncoupled, neighbor primal values are not required.
Eigen::VectorXd compute_d_local(const CoupledProblem& prob, const WeightPair& wp, int i,
                                const NodeState& st, const NeighborInbox& inbox,
                                const Eigen::MatrixXd& abar, double rho, int round);

// Synchronous message-passing execution of the same iteration as the stacked
// engine. Each round runs phases in order: cross-term exchange, projected
// primal step, primal broadcast, queue and u updates, u broadcast, z update.
// Nodes only ever touch their own state and their inbox; all exchanges go
// through counted messages. Problems flagged as uncoupled skip the primal
// exchanges entirely.
class NetworkSim {
 public:
  NetworkSim(std::shared_ptr<const LiftedProblem> lp, const AlgoParams& params,
             bool audit_enabled = true);

  // Slices y0/u0 across nodes (defaults: projected origin, zero) and runs the
  // setup exchange that distributes initial values and coupling blocks.
  void initialize(const Eigen::VectorXd& y0 = {}, const Eigen::VectorXd& u0 = {});

  void iteration_round();
  void run(int rounds, const RunHooks& hooks = {});

  int round() const { return k_; }
  bool initialized() const { return initialized_; }

  // Assembled global view, shaped exactly like the stacked engine state.
  AlgoState snapshot() const;

  const CommAudit& audit() const { return audit_; }

  // Reads the primal block of `target` on behalf of `requester`; requests
  // outside the requester's neighborhood are recorded and rejected.
  const Eigen::VectorXd& peek_x(int requester, int target);

 private:
  struct Actor {
    NodeState st;
    NeighborInbox inbox;
    Eigen::MatrixXd abar;
  };

  void deliver(Message msg);
  void flush_phase(MsgPhase phase, int round);
  Eigen::VectorXd gather_for(int i) const;

  std::shared_ptr<const LiftedProblem> lp_;
  AlgoParams params_;
  std::vector<Actor> actors_;
  int k_ = 0;
  bool initialized_ = false;
  bool fast_path_ = false;
  CommAudit audit_;
  bool audit_enabled_ = true;
  long pending_messages_ = 0;
  long pending_scalars_ = 0;
  Eigen::VectorXd u0_;
  Eigen::VectorXd ybar_sum_;
};

}  // namespace decopt
