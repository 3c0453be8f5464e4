#include "chansynth/json_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace chansynth::io {

namespace {

const json& need(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  return *it;
}

double need_num(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int need_int(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> need_vec(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_array()) throw ConfigError(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string("field '") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

prob::Dist dist_from_json(const json& j, const std::string& label) {
  const int k = need_int(j, "alphabet");
  auto pmf = need_vec(j, "pmf");
  std::string lab = label;
  if (j.contains("label")) lab = j["label"].get<std::string>();
  return prob::Dist(prob::Alphabet(k, lab), std::move(pmf));
}

prob::Kernel kernel_from_json(const json& j, const std::string& label) {
  const json& rows = need(j, "rows");
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw ConfigError("kernel 'rows' must be a nonempty array of arrays");
  const std::size_t n_out = rows[0].size();
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != n_out) throw ConfigError("kernel rows must share one length");
    for (const auto& e : r) flat.push_back(e.get<double>());
  }
  // input shape: explicit list, or a single input of size = number of rows
  std::vector<prob::Alphabet> inputs;
  if (j.contains("inputs")) {
    for (const auto& e : j["inputs"]) inputs.emplace_back(e.get<int>());
  } else {
    inputs.emplace_back(static_cast<int>(rows.size()));
  }
  return prob::Kernel(std::move(inputs), prob::Alphabet(static_cast<int>(n_out), label), std::move(flat));
}

prob::JointDist joint_from_json(const json& j) {
  const json& sh = need(j, "shape");
  std::vector<prob::Alphabet> comps;
  for (const auto& e : sh) comps.emplace_back(e.get<int>());
  return prob::JointDist(std::move(comps), need_vec(j, "pmf"));
}

json dist_to_json(const prob::Dist& d) {
  return json{{"alphabet", d.size()}, {"pmf", d.pmf()}};
}

json kernel_to_json(const prob::Kernel& k) {
  json rows = json::array();
  const int ny = k.output().size;
  for (std::size_t r = 0; r < k.num_rows(); ++r) {
    json row = json::array();
    for (int y = 0; y < ny; ++y) row.push_back(k.at(r, y));
    rows.push_back(std::move(row));
  }
  json ins = json::array();
  for (const auto& a : k.inputs()) ins.push_back(a.size);
  return json{{"rows", std::move(rows)}, {"inputs", std::move(ins)}};
}

json joint_to_json(const prob::JointDist& d) {
  json sh = json::array();
  for (const auto& a : d.components()) sh.push_back(a.size);
  return json{{"shape", std::move(sh)}, {"pmf", d.pmf()}};
}

bounds::P2PTarget p2p_target_from_json(const json& j) {
  bounds::P2PTarget t;
  t.pi_X = dist_from_json(need(j, "pi_X"), "X");
  t.pi_YgX = kernel_from_json(need(j, "pi_YgX"), "Y");
  t.B_size = need_int(j, "B_size");
  t.H_W = j.contains("H_W") ? need_num(j, "H_W") : 0.0;
  t.validate();
  return t;
}

bounds::BroadcastTarget broadcast_target_from_json(const json& j) {
  bounds::BroadcastTarget t;
  t.pi_X = dist_from_json(need(j, "pi_X"), "X");
  t.Y_size = need_int(j, "Y_size");
  t.Z_size = need_int(j, "Z_size");
  t.pi_YZgX = kernel_from_json(need(j, "pi_YZgX"), "YZ");
  t.B_size = need_int(j, "B_size");
  t.H_W = j.contains("H_W") ? need_num(j, "H_W") : 0.0;
  t.H_What = j.contains("H_What") ? need_num(j, "H_What") : 0.0;
  t.validate();
  return t;
}

bounds::InteractiveTarget interactive_target_from_json(const json& j) {
  bounds::InteractiveTarget t;
  t.pi_SX = joint_from_json(need(j, "pi_SX"));
  t.Y_size = need_int(j, "Y_size");
  t.Z_size = need_int(j, "Z_size");
  {
    // channel rows are indexed by the (s, x) pair
    prob::Kernel flat = kernel_from_json(need(j, "pi_YZgSX"), "YZ");
    const int ns = t.pi_SX.components()[0].size, nx = t.pi_SX.components()[1].size;
    std::vector<double> table = flat.table();
    t.pi_YZgSX = prob::Kernel({prob::Alphabet(ns, "S"), prob::Alphabet(nx, "X")},
                              prob::Alphabet(t.Y_size * t.Z_size, "YZ"), std::move(table));
  }
  t.A_size = need_int(j, "A_size");
  t.B_size = need_int(j, "B_size");
  t.H_W = j.contains("H_W") ? need_num(j, "H_W") : 0.0;
  t.validate();
  return t;
}

bounds::AuxShape shape_from_json(const json& j) {
  bounds::AuxShape s;
  if (j.contains("U_size")) s.U_size = need_int(j, "U_size");
  if (j.contains("V_size")) s.V_size = need_int(j, "V_size");
  if (j.contains("Uhat_size")) s.Uhat_size = need_int(j, "Uhat_size");
  return s;
}

bounds::OptimizerSettings settings_from_json(const json& j) {
  bounds::OptimizerSettings s;
  if (j.contains("restarts")) s.restarts = need_int(j, "restarts");
  if (j.contains("max_iters")) s.max_iters = need_int(j, "max_iters");
  if (j.contains("penalty_schedule")) s.penalty_schedule = need_vec(j, "penalty_schedule");
  if (j.contains("tol")) s.tol = need_num(j, "tol");
  if (s.restarts < 1) throw ConfigError("settings: restarts must be >= 1");
  if (!(s.tol > 0.0)) throw ConfigError("settings: tol must be > 0");
  return s;
}

sim::P2PSchemeSpec p2p_scheme_from_json(const json& j) {
  sim::P2PSchemeSpec s;
  s.N = need_int(j, "N");
  s.K = need_int(j, "K");
  s.R = need_num(j, "R");
  if (j.contains("eps")) s.eps = need_num(j, "eps");
  s.Q_U = dist_from_json(need(j, "Q_U"), "U");
  s.pi_X = dist_from_json(need(j, "pi_X"), "X");
  s.P_W = dist_from_json(need(j, "P_W"), "W");
  {
    prob::Kernel b = kernel_from_json(need(j, "Q_BgXU"), "B");
    s.Q_BgXU = prob::Kernel({s.pi_X.alphabet(), s.Q_U.alphabet()}, b.output(), b.table());
    prob::Kernel y = kernel_from_json(need(j, "Q_YgBU"), "Y");
    s.Q_YgBU = prob::Kernel({b.output(), s.Q_U.alphabet()}, y.output(), y.table());
    prob::Kernel pi = kernel_from_json(need(j, "pi_YgX"), "Y");
    s.pi_YgX = prob::Kernel({s.pi_X.alphabet()}, pi.output(), pi.table());
  }
  if (j.contains("QhatY")) s.QhatY = dist_from_json(j["QhatY"], "Y");
  s.validate();
  return s;
}

sim::BroadcastSchemeSpec broadcast_scheme_from_json(const json& j) {
  sim::BroadcastSchemeSpec s;
  s.N = need_int(j, "N");
  s.K = need_int(j, "K");
  s.R = need_num(j, "R");
  s.Rhat = need_num(j, "Rhat");
  if (j.contains("eps")) s.eps = need_num(j, "eps");
  s.Y_size = need_int(j, "Y_size");
  s.Z_size = need_int(j, "Z_size");
  s.Q_U = dist_from_json(need(j, "Q_U"), "U");
  s.pi_X = dist_from_json(need(j, "pi_X"), "X");
  s.P_W = dist_from_json(need(j, "P_W"), "W");
  s.P_What = dist_from_json(need(j, "P_What"), "Wh");
  {
    prob::Kernel uh = kernel_from_json(need(j, "Q_UhgU"), "Uh");
    s.Q_UhgU = prob::Kernel({s.Q_U.alphabet()}, uh.output(), uh.table());
    prob::Kernel b = kernel_from_json(need(j, "Q_BgXUUh"), "B");
    s.Q_BgXUUh = prob::Kernel({s.pi_X.alphabet(), s.Q_U.alphabet(), uh.output()}, b.output(), b.table());
    prob::Kernel y = kernel_from_json(need(j, "Q_YgBUUh"), "Y");
    s.Q_YgBUUh = prob::Kernel({b.output(), s.Q_U.alphabet(), uh.output()}, y.output(), y.table());
    prob::Kernel z = kernel_from_json(need(j, "Q_ZgBU"), "Z");
    s.Q_ZgBU = prob::Kernel({b.output(), s.Q_U.alphabet()}, z.output(), z.table());
    prob::Kernel pi = kernel_from_json(need(j, "pi_YZgX"), "YZ");
    s.pi_YZgX = prob::Kernel({s.pi_X.alphabet()}, pi.output(), pi.table());
  }
  if (j.contains("QhatY")) s.QhatY = dist_from_json(j["QhatY"], "Y");
  if (j.contains("QhatZ")) s.QhatZ = dist_from_json(j["QhatZ"], "Z");
  s.validate();
  return s;
}

sim::InteractiveSchemeSpec interactive_scheme_from_json(const json& j) {
  sim::InteractiveSchemeSpec s;
  s.N = need_int(j, "N");
  s.K = need_int(j, "K");
  s.R = need_num(j, "R");
  if (j.contains("eps")) s.eps = need_num(j, "eps");
  s.Y_size = need_int(j, "Y_size");
  s.Z_size = need_int(j, "Z_size");
  s.pi_SX = joint_from_json(need(j, "pi_SX"));
  const prob::Alphabet s_alph = s.pi_SX.components()[0];
  const prob::Alphabet x_alph = s.pi_SX.components()[1];
  s.Q_U = dist_from_json(need(j, "Q_U"), "U");
  s.P_W = dist_from_json(need(j, "P_W"), "W");
  {
    prob::Kernel a = kernel_from_json(need(j, "Q_AgSU"), "A");
    s.Q_AgSU = prob::Kernel({s_alph, s.Q_U.alphabet()}, a.output(), a.table());
    prob::Kernel b = kernel_from_json(need(j, "Q_BgXU"), "B");
    s.Q_BgXU = prob::Kernel({x_alph, s.Q_U.alphabet()}, b.output(), b.table());
    prob::Kernel y = kernel_from_json(need(j, "Q_YgABU"), "Y");
    s.Q_YgABU = prob::Kernel({a.output(), b.output(), s.Q_U.alphabet()}, y.output(), y.table());
    prob::Kernel z = kernel_from_json(need(j, "Q_ZgABU"), "Z");
    s.Q_ZgABU = prob::Kernel({a.output(), b.output(), s.Q_U.alphabet()}, z.output(), z.table());
    prob::Kernel pi = kernel_from_json(need(j, "pi_YZgSX"), "YZ");
    s.pi_YZgSX = prob::Kernel({s_alph, x_alph}, pi.output(), pi.table());
  }
  s.validate();
  return s;
}

json num_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

json bound_result_to_json(const bounds::BoundResult& r) {
  json argmin = json::array();
  for (std::size_t b = 0; b < r.argmin.tables.size(); ++b) {
    argmin.push_back(json{{"name", r.argmin.names[b]},
                          {"rows", r.argmin.shapes[b].first},
                          {"cols", r.argmin.shapes[b].second},
                          {"table", r.argmin.tables[b]}});
  }
  return json{{"value", num_to_json(r.value)},
              {"constraint_slack", r.constraint_slack},
              {"certified", r.certified},
              {"assumption_ok", r.assumption_ok},
              {"restarts_used", r.restarts_used},
              {"argmin", std::move(argmin)}};
}

json sim_report_to_json(const sim::SimReport& r) {
  json blocks = json::array();
  for (const auto& b : r.blocks)
    blocks.push_back(json{{"k", b.k},
                          {"mi_term", num_to_json(b.mi_term)},
                          {"div_term", num_to_json(b.div_term)},
                          {"m_uniformity", num_to_json(b.m_uniformity)},
                          {"markov_cmi", num_to_json(b.markov_cmi)}});
  return json{{"method", r.method},
              {"N", r.N},
              {"K", r.K},
              {"R", r.R},
              {"seed", r.seed},
              {"total", num_to_json(r.total)},
              {"decomposition_sum", num_to_json(r.decomposition_sum)},
              {"first_block_div", num_to_json(r.first_block_div)},
              {"typical_fallback", r.typical_fallback},
              {"reduction_max_abs_diff", r.reduction_max_abs_diff},
              {"blocks", std::move(blocks)}};
}

json verifier_report_to_json(const oneshot::VerifierReport& r) {
  return json{{"lhs_exact", num_to_json(r.lhs_exact)},
              {"rhs_bound", num_to_json(r.rhs_bound)},
              {"slack", num_to_json(r.slack)},
              {"lhs_alt", num_to_json(r.lhs_alt)},
              {"enumeration_size", r.enumeration_size},
              {"l1", r.l1},
              {"l2", r.l2},
              {"l3", r.l3},
              {"l1_closed", r.l1_closed},
              {"l2_bound", r.l2_bound},
              {"l3_bound", r.l3_bound}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace chansynth::io
