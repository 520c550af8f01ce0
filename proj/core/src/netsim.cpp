#include "decopt/netsim.hpp"

#include <algorithm>
#include <ostream>

#include "decopt/errors.hpp"

namespace decopt {

const char* msg_phase_name(MsgPhase p) {
  switch (p) {
    case MsgPhase::setup: return "setup";
    case MsgPhase::cross_term: return "cross-term";
    case MsgPhase::post_primal_x: return "post-primal-x";
    case MsgPhase::post_dual_u: return "post-dual-u";
  }
  return "?";
}

long CommAudit::total_messages() const {
  long s = 0;
  for (const auto& r : rows) s += r.messages;
  return s;
}

long CommAudit::total_scalars() const {
  long s = 0;
  for (const auto& r : rows) s += r.scalars;
  return s;
}

void CommAudit::write_csv(std::ostream& out) const {
  out << "round,phase,messages,scalars\n";
  for (const auto& r : rows)
    out << r.round << "," << msg_phase_name(r.phase) << "," << r.messages << ","
        << r.scalars << "\n";
}

namespace {

int self_index(const Graph& g, int i) {
  const auto& nb = g.neighbors(i);
  return static_cast<int>(std::lower_bound(nb.begin(), nb.end(), i) - nb.begin());
}

Eigen::VectorXd gather_neighborhood(const CoupledProblem& prob, int i,
                                    const Eigen::VectorXd& own_x,
                                    const NeighborInbox& inbox, bool allow_missing,
                                    int round) {
  Eigen::VectorXd v(prob.neighborhood_dim(i));
  int at = 0;
  for (int j : prob.graph.neighbors(i)) {
    const int dj = prob.nodes[j].dim;
    if (j == i) {
      v.segment(at, dj) = own_x;
    } else {
      auto it = inbox.x.find(j);
      if (it != inbox.x.end()) {
        v.segment(at, dj) = it->second;
      } else if (allow_missing) {
        v.segment(at, dj).setZero();
      } else {
        throw MissingNeighborMessageError(i, j, round, "x");
      }
    }
    at += dj;
  }
  return v;
}

}  // namespace

Eigen::VectorXd compute_d_local(const CoupledProblem& prob, const WeightPair& wp, int i,
                                const NodeState& st, const NeighborInbox& inbox,
                                const Eigen::MatrixXd& abar, double rho, int round) {
  const auto& nd = prob.nodes[i];
  const auto& nb = prob.graph.neighbors(i);
  const int p = prob.p;
  const int m = prob.m;
  const int self = self_index(prob.graph, i);

  Eigen::VectorXd v = gather_neighborhood(prob, i, st.x, inbox, prob.no_coupling, round);

  Eigen::VectorXd wi;
  auto grad_blocks = nd.grad_f(v);
  if (!grad_blocks[self].allFinite()) throw NonFiniteValueError(i, "grad_f");
  Eigen::VectorXd dx = grad_blocks[self];
  if (p > 0) {
    Eigen::VectorXd gi = nd.g(v);
    if (!gi.allFinite()) throw NonFiniteValueError(i, "g");
    wi = st.q + gi - st.t;
    auto jac_blocks = nd.jac_g(v);
    if (!jac_blocks[self].allFinite()) throw NonFiniteValueError(i, "jac_g");
    dx += jac_blocks[self].transpose() * wi;
  }

  if (!prob.no_coupling) {
    for (int j : nb) {
      if (j == i) continue;
      auto it = inbox.cross.find(j);
      if (it == inbox.cross.end())
        throw MissingNeighborMessageError(i, j, round, "cross term");
      dx += it->second;
    }
  }

  // Dual mixing row: sum_j [PW]_ij u_j over the neighborhood.
  Eigen::VectorXd umix = wp.PW(i, i) * st.u;
  for (int j : nb) {
    if (j == i) continue;
    auto it = inbox.u.find(j);
    if (it == inbox.u.end()) throw MissingNeighborMessageError(i, j, round, "u");
    umix += wp.PW(i, j) * it->second;
  }
  Eigen::VectorXd vi = umix - st.z / rho;

  dx += abar.transpose() * (vi.head(m) + (abar * st.x - nd.b) / rho);

  Eigen::VectorXd d(st.x.size() + p);
  d.head(st.x.size()) = dx;
  if (p > 0) d.tail(p) = vi.tail(p) + st.t / rho - wi;
  return d;
}

NetworkSim::NetworkSim(std::shared_ptr<const LiftedProblem> lp, const AlgoParams& params,
                       bool audit_enabled)
    : lp_(std::move(lp)), params_(params), audit_enabled_(audit_enabled) {
  if (!lp_) throw InvalidParameterError("null lifted problem");
  if (!(params_.gamma > 0)) throw InvalidParameterError("gamma must be positive");
  if (!(params_.rho > 0)) throw InvalidParameterError("rho must be positive");
  if (params_.weights.PW.rows() != lp_->n() || params_.weights.PH.rows() != lp_->n())
    throw ShapeMismatchError("weight matrices do not match the graph size");
}

void NetworkSim::deliver(Message msg) {
  pending_messages_ += 1;
  pending_scalars_ += msg.scalar_count();
  Actor& a = actors_[msg.to];
  switch (msg.phase) {
    case MsgPhase::setup:
      if (msg.vec.size()) a.inbox.x[msg.from] = std::move(msg.vec);
      a.inbox.u[msg.from] = std::move(msg.vec2);
      if (msg.mat.size()) a.abar += msg.mat;
      break;
    case MsgPhase::cross_term:
      a.inbox.cross[msg.from] = std::move(msg.vec);
      break;
    case MsgPhase::post_primal_x:
      a.inbox.x[msg.from] = std::move(msg.vec);
      break;
    case MsgPhase::post_dual_u:
      a.inbox.u[msg.from] = std::move(msg.vec);
      break;
  }
}

void NetworkSim::flush_phase(MsgPhase phase, int round) {
  if (audit_enabled_)
    audit_.rows.push_back({round, phase, pending_messages_, pending_scalars_});
  pending_messages_ = 0;
  pending_scalars_ = 0;
}

Eigen::VectorXd NetworkSim::gather_for(int i) const {
  return gather_neighborhood(lp_->problem(), i, actors_[i].st.x, actors_[i].inbox,
                             fast_path_, k_);
}

void NetworkSim::initialize(const Eigen::VectorXd& y0, const Eigen::VectorXd& u0) {
  const auto& prob = lp_->problem();
  const int n = prob.n();
  const int p = prob.p;
  const int m = prob.m;
  const int bs = lp_->dual_block();

  if (prob.no_coupling) verify_no_coupling(prob, 0x5eedULL);
  fast_path_ = prob.no_coupling;

  Eigen::VectorXd yfull = y0.size() ? y0 : Eigen::VectorXd::Zero(lp_->dim_y());
  if (yfull.size() != lp_->dim_y()) throw ShapeMismatchError("y0 has wrong length");
  yfull = lp_->project_Y(yfull);
  Eigen::VectorXd ufull = u0.size() ? u0 : Eigen::VectorXd::Zero(lp_->dim_u());
  if (ufull.size() != lp_->dim_u()) throw ShapeMismatchError("u0 has wrong length");
  u0_ = ufull;

  actors_.assign(n, {});
  for (int i = 0; i < n; ++i) {
    Actor& a = actors_[i];
    a.st.x = yfull.segment(lp_->x_offset_in_y(i), prob.nodes[i].dim);
    a.st.t = yfull.segment(lp_->t_offset_in_y(i), p);
    a.st.u = ufull.segment(static_cast<Eigen::Index>(i) * bs, bs);
    a.abar = prob.nodes[i].A_blocks[self_index(prob.graph, i)];
  }

  for (int i = 0; i < n; ++i) {
    const auto& nbi = prob.graph.neighbors(i);
    for (size_t a = 0; a < nbi.size(); ++a) {
      const int j = nbi[a];
      if (j == i) continue;
      Message msg;
      msg.from = i;
      msg.to = j;
      msg.round = 0;
      msg.phase = MsgPhase::setup;
      if (!fast_path_) msg.vec = actors_[i].st.x;
      msg.vec2 = actors_[i].st.u;
      if (m > 0) msg.mat = prob.nodes[i].A_blocks[a];
      deliver(std::move(msg));
    }
  }
  flush_phase(MsgPhase::setup, 0);

  for (int i = 0; i < n; ++i) {
    Actor& a = actors_[i];
    if (p > 0) {
      Eigen::VectorXd gi = prob.nodes[i].g(gather_for(i));
      if (!gi.allFinite()) throw NonFiniteValueError(i, "g");
      a.st.q = (a.st.t - gi).cwiseMax(0.0);
    } else {
      a.st.q = Eigen::VectorXd::Zero(0);
    }
    Eigen::VectorXd hz = params_.weights.PH(i, i) * a.st.u;
    for (int j : prob.graph.neighbors(i))
      if (j != i) hz += params_.weights.PH(i, j) * a.inbox.u.at(j);
    a.st.z = params_.rho * hz;
  }

  k_ = 0;
  ybar_sum_ = Eigen::VectorXd::Zero(lp_->dim_y());
  initialized_ = true;
}

void NetworkSim::iteration_round() {
  if (!initialized_) throw RuntimeError("iteration_round before initialize");
  const auto& prob = lp_->problem();
  const int n = prob.n();
  const int p = prob.p;
  const int round = k_ + 1;

  if (!fast_path_) {
    std::vector<Message> staged;
    for (int i = 0; i < n; ++i) {
      const auto& nd = prob.nodes[i];
      const auto& nb = prob.graph.neighbors(i);
      Eigen::VectorXd v = gather_for(i);
      auto grad_blocks = nd.grad_f(v);
      Eigen::VectorXd wi;
      std::vector<Eigen::MatrixXd> jac_blocks;
      if (p > 0) {
        Eigen::VectorXd gi = nd.g(v);
        if (!gi.allFinite()) throw NonFiniteValueError(i, "g");
        wi = actors_[i].st.q + gi - actors_[i].st.t;
        jac_blocks = nd.jac_g(v);
      }
      for (size_t a = 0; a < nb.size(); ++a) {
        if (nb[a] == i) continue;
        Message msg;
        msg.from = i;
        msg.to = nb[a];
        msg.round = round;
        msg.phase = MsgPhase::cross_term;
        if (!grad_blocks[a].allFinite()) throw NonFiniteValueError(i, "grad_f");
        msg.vec = grad_blocks[a];
        if (p > 0) {
          if (!jac_blocks[a].allFinite()) throw NonFiniteValueError(i, "jac_g");
          msg.vec += jac_blocks[a].transpose() * wi;
        }
        staged.push_back(std::move(msg));
      }
    }
    for (auto& msg : staged) deliver(std::move(msg));
    flush_phase(MsgPhase::cross_term, round);
  }

  for (int i = 0; i < n; ++i) {
    Actor& a = actors_[i];
    Eigen::VectorXd d = compute_d_local(prob, params_.weights, i, a.st, a.inbox, a.abar,
                                        params_.rho, round);
    const auto& nd = prob.nodes[i];
    a.st.x = (a.st.x - params_.gamma * d.head(nd.dim)).cwiseMax(nd.lower).cwiseMin(nd.upper);
    if (p > 0) a.st.t -= params_.gamma * d.tail(p);
  }

  if (!fast_path_) {
    for (int i = 0; i < n; ++i)
      for (int j : prob.graph.neighbors(i)) {
        if (j == i) continue;
        Message msg;
        msg.from = i;
        msg.to = j;
        msg.round = round;
        msg.phase = MsgPhase::post_primal_x;
        msg.vec = actors_[i].st.x;
        deliver(std::move(msg));
      }
    flush_phase(MsgPhase::post_primal_x, round);
  }

  for (int i = 0; i < n; ++i) {
    Actor& a = actors_[i];
    const auto& nd = prob.nodes[i];
    if (p > 0) {
      Eigen::VectorXd gi = nd.g(gather_for(i));
      if (!gi.allFinite()) throw NonFiniteValueError(i, "g");
      a.st.q = (a.st.t - gi).cwiseMax(a.st.q + gi - a.st.t);
    }
    Eigen::VectorXd umix = params_.weights.PW(i, i) * a.st.u;
    for (int j : prob.graph.neighbors(i)) {
      if (j == i) continue;
      auto it = a.inbox.u.find(j);
      if (it == a.inbox.u.end()) throw MissingNeighborMessageError(i, j, round, "u");
      umix += params_.weights.PW(i, j) * it->second;
    }
    Eigen::VectorXd bres(lp_->dual_block());
    bres.head(prob.m) = a.abar * a.st.x - nd.b;
    bres.tail(p) = a.st.t;
    a.st.u = umix + (bres - a.st.z) / params_.rho;
  }

  for (int i = 0; i < n; ++i)
    for (int j : prob.graph.neighbors(i)) {
      if (j == i) continue;
      Message msg;
      msg.from = i;
      msg.to = j;
      msg.round = round;
      msg.phase = MsgPhase::post_dual_u;
      msg.vec = actors_[i].st.u;
      deliver(std::move(msg));
    }
  flush_phase(MsgPhase::post_dual_u, round);

  for (int i = 0; i < n; ++i) {
    Actor& a = actors_[i];
    Eigen::VectorXd hz = params_.weights.PH(i, i) * a.st.u;
    for (int j : prob.graph.neighbors(i))
      if (j != i) hz += params_.weights.PH(i, j) * a.inbox.u.at(j);
    a.st.z += params_.rho * hz;
  }

  k_ = round;
  AlgoState snap = snapshot();
  ybar_sum_ += snap.y;
}

void NetworkSim::run(int rounds, const RunHooks& hooks) {
  if (!initialized_) initialize();
  for (int r = 0; r < rounds; ++r) {
    iteration_round();
    if (hooks.on_iteration) hooks.on_iteration(snapshot());
  }
}

AlgoState NetworkSim::snapshot() const {
  if (!initialized_) throw RuntimeError("snapshot before initialize");
  const auto& prob = lp_->problem();
  const int p = prob.p;
  const int bs = lp_->dual_block();

  AlgoState s;
  s.k = k_;
  s.y.resize(lp_->dim_y());
  s.q.resize(lp_->dim_q());
  s.u.resize(lp_->dim_u());
  s.z.resize(lp_->dim_u());
  for (int i = 0; i < prob.n(); ++i) {
    const Actor& a = actors_[i];
    s.y.segment(lp_->x_offset_in_y(i), prob.nodes[i].dim) = a.st.x;
    s.y.segment(lp_->t_offset_in_y(i), p) = a.st.t;
    s.q.segment(static_cast<Eigen::Index>(i) * p, p) = a.st.q;
    s.u.segment(static_cast<Eigen::Index>(i) * bs, bs) = a.st.u;
    s.z.segment(static_cast<Eigen::Index>(i) * bs, bs) = a.st.z;
  }
  s.u0 = u0_;
  s.ybar_sum = k_ > 0 ? ybar_sum_ : Eigen::VectorXd::Zero(lp_->dim_y());
  return s;
}

const Eigen::VectorXd& NetworkSim::peek_x(int requester, int target) {
  if (!initialized_) throw RuntimeError("peek before initialize");
  const auto& g = lp_->problem().graph;
  if (requester < 0 || requester >= g.n || target < 0 || target >= g.n)
    throw IndexOutOfRangeError("peek with out-of-range node id");
  if (!g.adjacent(requester, target)) {
    audit_.locality_violations += 1;
    throw LocalityViolationError(requester, target);
  }
  return actors_[target].st.x;
}

}  // namespace decopt
