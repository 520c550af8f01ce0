#include "decopt/problem_io.hpp"

#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "decopt/errors.hpp"

namespace decopt {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows, int expect_cols) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : expect_cols;
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c)
      throw ConfigError("ragged matrix in problem file");
    for (int j = 0; j < c; ++j) M(i, j) = rows[i][j].get<double>();
  }
  return M;
}

json graph_to_json(const Graph& g) {
  json e = json::array();
  for (auto [a, b] : g.edges) e.push_back(json::array({a + 1, b + 1}));
  return json{{"n", g.n}, {"edges", std::move(e)}};
}

Graph graph_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges"))
    edges.push_back({e.at(0).get<int>() - 1, e.at(1).get<int>() - 1});
  return build_graph(n, edges);
}

}  // namespace

void save_problem_json(const LinearLogData& data, std::ostream& out) {
  json j;
  j["family"] = "linear-log";
  j["graph"] = graph_to_json(data.graph);
  j["cost"] = vec_to_json(data.cost);
  j["weight"] = vec_to_json(data.weight);
  j["budget"] = data.budget;
  j["seed"] = data.seed;
  j["attempts"] = data.attempts;
  out << j.dump(2) << "\n";
}

void save_problem_json(const CoupledQuadraticData& data, std::ostream& out) {
  json j;
  j["family"] = "coupled-quadratic";
  j["graph"] = graph_to_json(data.graph);
  j["d"] = data.d;
  j["m"] = data.m;
  j["p"] = data.p;
  j["seed"] = data.seed;
  j["slater"] = vec_to_json(data.slater);
  json nodes = json::array();
  for (const auto& nd : data.nodes) {
    json q;
    q["P"] = mat_to_json(nd.P);
    q["Q"] = vec_to_json(nd.Q);
    json quads = json::array();
    for (const auto& M : nd.ineq_quad) quads.push_back(mat_to_json(M));
    q["ineq_quad"] = std::move(quads);
    q["ineq_lin"] = mat_to_json(nd.ineq_lin);
    q["ineq_shift"] = vec_to_json(nd.ineq_shift);
    q["eq"] = mat_to_json(nd.eq);
    q["eq_rhs"] = vec_to_json(nd.eq_rhs);
    q["lower"] = vec_to_json(nd.lower);
    q["upper"] = vec_to_json(nd.upper);
    nodes.push_back(std::move(q));
  }
  j["nodes"] = std::move(nodes);
  out << j.dump(2) << "\n";
}

LoadedProblem load_problem_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("could not parse problem file: ") + e.what());
  }

  LoadedProblem loaded;
  try {
    loaded.family = j.at("family").get<std::string>();
    if (loaded.family == "linear-log") {
      LinearLogData& d = loaded.linear_log;
      d.graph = graph_from_json(j.at("graph"));
      d.cost = vec_from_json(j.at("cost"));
      d.weight = vec_from_json(j.at("weight"));
      d.budget = j.at("budget").get<double>();
      d.seed = j.value("seed", std::uint64_t{0});
      d.attempts = j.value("attempts", 1);
      if (d.cost.size() != d.graph.n || d.weight.size() != d.graph.n)
        throw ConfigError("coefficient length does not match the graph");
      loaded.problem = build_problem(d);
    } else if (loaded.family == "coupled-quadratic") {
      CoupledQuadraticData& d = loaded.quadratic;
      d.graph = graph_from_json(j.at("graph"));
      d.d = j.at("d").get<int>();
      d.m = j.at("m").get<int>();
      d.p = j.at("p").get<int>();
      d.seed = j.value("seed", std::uint64_t{0});
      d.slater = vec_from_json(j.at("slater"));
      for (const auto& q : j.at("nodes")) {
        QuadNodeData nd;
        nd.P = mat_from_json(q.at("P"), 0);
        nd.Q = vec_from_json(q.at("Q"));
        for (const auto& M : q.at("ineq_quad")) nd.ineq_quad.push_back(mat_from_json(M, 0));
        nd.ineq_lin = mat_from_json(q.at("ineq_lin"), static_cast<int>(nd.Q.size()));
        nd.ineq_shift = vec_from_json(q.at("ineq_shift"));
        nd.eq = mat_from_json(q.at("eq"), static_cast<int>(nd.Q.size()));
        nd.eq_rhs = vec_from_json(q.at("eq_rhs"));
        nd.lower = vec_from_json(q.at("lower"));
        nd.upper = vec_from_json(q.at("upper"));
        d.nodes.push_back(std::move(nd));
      }
      if (static_cast<int>(d.nodes.size()) != d.graph.n)
        throw ConfigError("node payload count does not match the graph");
      loaded.problem = build_problem(d);
    } else {
      throw ConfigError("unknown problem family: " + loaded.family);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed problem file: ") + e.what());
  }
  return loaded;
}

}  // namespace decopt
