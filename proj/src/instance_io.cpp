#include "asyncdual/instance_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index t = 0; t < v.size(); ++t) a.push_back(v[t]);
  return a;
}

Json bound_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    if (std::isinf(v[t])) {
      a.push_back(nullptr);
    } else {
      a.push_back(v[t]);
    }
  }
  return a;
}

Json mat_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

void warn_unknown(const Json& obj, const std::string& path, std::initializer_list<const char*> known,
                  std::vector<std::string>& warnings) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) warnings.push_back(path + (path.empty() ? "" : ".") + it.key() + ": unknown field ignored");
  }
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

const Json& object_at(const Json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  return v;
}

int int_of(const Json& v, const std::string& path, int min_value = 0) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < min_value || x > std::numeric_limits<int>::max()) fail(path, "integer out of range");
  return static_cast<int>(x);
}

double double_of(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

Vector vec_of(const Json& v, const std::string& path, Eigen::Index size, double null_value = kInf,
              bool allow_null = false) {
  if (!v.is_array()) fail(path, "expected an array");
  if (static_cast<Eigen::Index>(v.size()) != size) {
    fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
  }
  Vector out(size);
  for (Eigen::Index t = 0; t < size; ++t) {
    const std::string p = path + "[" + std::to_string(t) + "]";
    if (allow_null && v[t].is_null()) {
      out[t] = null_value;
    } else {
      out[t] = double_of(v[t], p);
    }
  }
  return out;
}

Matrix mat_of(const Json& v, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  if (static_cast<Eigen::Index>(v.size()) != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
  }
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    out.row(r) = vec_of(v[r], path + "[" + std::to_string(r) + "]", cols).transpose();
  }
  return out;
}

bool same(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (std::memcmp(&a(r, c), &b(r, c), sizeof(double)) != 0) return false;
    }
  }
  return true;
}

bool same(const Vector& a, const Vector& b) { return same(Matrix(a), Matrix(b)); }

}  // namespace

std::string serialize_instance(const InstanceFile& inst) {
  const Problem& p = inst.problem;
  Json root;
  root["format"] = kInstanceFormat;
  root["version"] = kInstanceVersion;
  root["metadata"] = Json{{"name", inst.name}, {"description", inst.description}};
  Json edges = Json::array();
  for (const auto& [a, b] : p.graph().edges()) edges.push_back(Json::array({a, b}));
  root["graph"] = Json{{"agents", p.num_agents()}, {"edges", edges}};

  Json agents = Json::array();
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& c = p.cost(i);
    Json a;
    a["dim"] = c.dim();
    if (c.is_diagonal()) {
      a["hessian_diag"] = vec_json(c.hessian_diagonal());
    } else {
      a["hessian"] = mat_json(c.hessian());
    }
    a["linear"] = vec_json(c.linear());
    a["offset"] = c.offset();
    if (c.box()) a["box"] = Json{{"lower", bound_json(c.box()->lower)}, {"upper", bound_json(c.box()->upper)}};
    a["ineq_rows"] = p.ineq_rows(i);
    a["eq_rows"] = p.eq_rows(i);
    agents.push_back(a);
  }
  root["agents"] = agents;

  Json couplings = Json::array();
  for (int i = 0; i < p.num_agents(); ++i) {
    if (p.dual_dim(i) == 0) continue;
    const auto& nb = p.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const auto& blk = p.block_at(i, static_cast<int>(s));
      Json b;
      b["owner"] = i;
      b["source"] = nb[s];
      b["C"] = mat_json(blk.ineq_matrix());
      b["d"] = vec_json(blk.ineq_offset());
      b["A"] = mat_json(blk.eq_matrix());
      b["b"] = vec_json(blk.eq_offset());
      couplings.push_back(b);
    }
  }
  root["couplings"] = couplings;
  if (inst.slater_candidate) root["slater_candidate"] = vec_json(*inst.slater_candidate);
  return root.dump(1) + "\n";
}

InstanceFile parse_instance(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("<root>: not valid JSON (") + e.what() + ")");
  }
  object_at(root, "<root>");
  InstanceFile out;
  warn_unknown(root, "", {"format", "version", "metadata", "graph", "agents", "couplings", "slater_candidate"},
               out.warnings);

  if (auto it = root.find("format"); it != root.end() && (!it->is_string() || it->get<std::string>() != kInstanceFormat)) {
    fail("format", std::string("expected \"") + kInstanceFormat + "\"");
  }
  const int version = int_of(field(root, "version", "<root>"), "version");
  if (version != kInstanceVersion) {
    fail("version", "unsupported version " + std::to_string(version) + " (expected " +
                        std::to_string(kInstanceVersion) + ")");
  }
  if (auto it = root.find("metadata"); it != root.end()) {
    object_at(*it, "metadata");
    warn_unknown(*it, "metadata", {"name", "description"}, out.warnings);
    if (auto n = it->find("name"); n != it->end()) {
      if (!n->is_string()) fail("metadata.name", "expected a string");
      out.name = n->get<std::string>();
    }
    if (auto d = it->find("description"); d != it->end()) {
      if (!d->is_string()) fail("metadata.description", "expected a string");
      out.description = d->get<std::string>();
    }
  }

  const Json& g = object_at(field(root, "graph", "<root>"), "graph");
  warn_unknown(g, "graph", {"agents", "edges"}, out.warnings);
  const int n = int_of(field(g, "agents", "graph"), "graph.agents", 1);
  const Json& ej = field(g, "edges", "graph");
  if (!ej.is_array()) fail("graph.edges", "expected an array of pairs");
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (std::size_t e = 0; e < ej.size(); ++e) {
    const std::string path = "graph.edges[" + std::to_string(e) + "]";
    if (!ej[e].is_array() || ej[e].size() != 2) fail(path, "expected a pair of agent indices");
    const int a = int_of(ej[e][0], path + "[0]");
    const int b = int_of(ej[e][1], path + "[1]");
    if (a >= n || b >= n) fail(path, "agent index out of range");
    if (a != b) edges.emplace_back(a, b);
  }
  Graph graph = Graph::from_edges(n, edges);

  const Json& aj = field(root, "agents", "<root>");
  if (!aj.is_array() || static_cast<int>(aj.size()) != n) {
    fail("agents", "expected an array with one entry per agent (" + std::to_string(n) + ")");
  }
  std::vector<LocalCost> costs;
  std::vector<ConstraintDims> dims;
  std::vector<int> nx;
  for (int i = 0; i < n; ++i) {
    const std::string path = "agents[" + std::to_string(i) + "]";
    const Json& a = object_at(aj[i], path);
    warn_unknown(a, path,
                 {"dim", "hessian", "hessian_diag", "linear", "offset", "box", "ineq_rows", "eq_rows"}, out.warnings);
    const int dim = int_of(field(a, "dim", path), path + ".dim");
    nx.push_back(dim);
    const Vector linear = vec_of(field(a, "linear", path), path + ".linear", dim);
    double offset = 0.0;
    if (auto it = a.find("offset"); it != a.end()) offset = double_of(*it, path + ".offset");
    std::optional<Box> box;
    if (auto it = a.find("box"); it != a.end() && !it->is_null()) {
      const std::string bp = path + ".box";
      object_at(*it, bp);
      warn_unknown(*it, bp, {"lower", "upper"}, out.warnings);
      Box b{vec_of(field(*it, "lower", bp), bp + ".lower", dim, -kInf, true),
            vec_of(field(*it, "upper", bp), bp + ".upper", dim, kInf, true)};
      box = std::move(b);
    }
    const bool has_h = a.contains("hessian");
    const bool has_d = a.contains("hessian_diag");
    if (has_h == has_d) fail(path, "exactly one of hessian and hessian_diag is required");
    try {
      if (has_d) {
        costs.push_back(
            LocalCost::diagonal(vec_of(a["hessian_diag"], path + ".hessian_diag", dim), linear, box, offset));
      } else {
        if (box) fail(path + ".box", "a box needs a diagonal Hessian (hessian_diag)");
        costs.push_back(LocalCost::dense(mat_of(a["hessian"], path + ".hessian", dim, dim), linear, offset));
      }
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      fail(path, e.what());
    }
    ConstraintDims d;
    d.ineq = a.contains("ineq_rows") ? int_of(a["ineq_rows"], path + ".ineq_rows") : 0;
    d.eq = a.contains("eq_rows") ? int_of(a["eq_rows"], path + ".eq_rows") : 0;
    dims.push_back(d);
  }

  std::vector<CouplingBlock> blocks;
  std::set<std::pair<int, int>> seen;
  if (auto cit = root.find("couplings"); cit != root.end()) {
    if (!cit->is_array()) fail("couplings", "expected an array");
    for (std::size_t k = 0; k < cit->size(); ++k) {
      const std::string path = "couplings[" + std::to_string(k) + "]";
      const Json& b = object_at((*cit)[k], path);
      warn_unknown(b, path, {"owner", "source", "C", "d", "A", "b"}, out.warnings);
      const int i = int_of(field(b, "owner", path), path + ".owner");
      const int j = int_of(field(b, "source", path), path + ".source");
      if (i >= n || j >= n) fail(path, "agent index out of range");
      if (!graph.adjacent(i, j)) {
        fail(path, "block (" + std::to_string(i) + "," + std::to_string(j) + ") is not on an edge of the graph");
      }
      if (!seen.insert({i, j}).second) {
        fail(path, "duplicate block (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      const int p = dims[i].ineq;
      const int r = dims[i].eq;
      auto opt_mat = [&](const char* key, int rows) -> Matrix {
        if (!b.contains(key)) {
          if (rows == 0) return Matrix(0, nx[j]);
          fail(path + "." + key, "missing required field");
        }
        return mat_of(b[key], path + "." + key, rows, nx[j]);
      };
      auto opt_vec = [&](const char* key, int rows) -> Vector {
        if (!b.contains(key)) {
          if (rows == 0) return Vector(0);
          fail(path + "." + key, "missing required field");
        }
        return vec_of(b[key], path + "." + key, rows);
      };
      blocks.emplace_back(i, j, opt_mat("C", p), opt_vec("d", p), opt_mat("A", r), opt_vec("b", r));
    }
  }
  for (int i = 0; i < n; ++i) {
    if (dims[i].total() == 0) continue;
    for (AgentId j : graph.neighbors(i)) {
      if (!seen.count({i, j})) {
        fail("couplings", "missing block (" + std::to_string(i) + "," + std::to_string(j) + ") for a declared edge");
      }
    }
  }

  try {
    out.problem = Problem(std::move(graph), std::move(costs), std::move(dims), std::move(blocks));
  } catch (const DimensionError& e) {
    fail("couplings", e.what());
  }

  if (auto it = root.find("slater_candidate"); it != root.end() && !it->is_null()) {
    out.slater_candidate = vec_of(*it, "slater_candidate", out.problem.total_primal_dim());
  }
  return out;
}

void save_instance(const std::filesystem::path& path, const InstanceFile& instance) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << serialize_instance(instance);
  if (!f) throw IoError("failed writing " + path.string());
}

InstanceFile load_instance(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_instance(ss.str());
}

bool identical(const Problem& a, const Problem& b) {
  if (a.num_agents() != b.num_agents()) return false;
  for (int i = 0; i < a.num_agents(); ++i) {
    if (a.neighbors(i) != b.neighbors(i)) return false;
    const auto& ca = a.cost(i);
    const auto& cb = b.cost(i);
    if (ca.is_diagonal() != cb.is_diagonal() || !same(ca.hessian(), cb.hessian()) || !same(ca.linear(), cb.linear()))
      return false;
    const double oa = ca.offset();
    const double ob = cb.offset();
    if (std::memcmp(&oa, &ob, sizeof(double)) != 0) return false;
    if (ca.box().has_value() != cb.box().has_value()) return false;
    if (ca.box() && (!same(ca.box()->lower, cb.box()->lower) || !same(ca.box()->upper, cb.box()->upper))) return false;
    if (a.ineq_rows(i) != b.ineq_rows(i) || a.eq_rows(i) != b.eq_rows(i)) return false;
    for (std::size_t s = 0; s < a.neighbors(i).size(); ++s) {
      const auto& x = a.block_at(i, static_cast<int>(s));
      const auto& y = b.block_at(i, static_cast<int>(s));
      if (!same(x.ineq_matrix(), y.ineq_matrix()) || !same(x.ineq_offset(), y.ineq_offset()) ||
          !same(x.eq_matrix(), y.eq_matrix()) || !same(x.eq_offset(), y.eq_offset()))
        return false;
    }
  }
  return true;
}

}  // namespace asyncdual
