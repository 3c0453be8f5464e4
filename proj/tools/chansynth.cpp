// chansynth: config-driven driver for the bound optimizers, the exact scheme
// simulators, and the one-shot bound verifiers. All randomness derives from
// the --seed value; identical config + seed reproduces outputs byte for byte.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chansynth/bounds/bounds.hpp"
#include "chansynth/json_io.hpp"
#include "chansynth/randgen.hpp"
#include "chansynth/rng.hpp"
#include "chansynth/sim/codesim.hpp"

namespace cs = chansynth;
using chansynth::io::fmt_double;
using chansynth::io::json;

namespace {

struct RunConfig {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::vector<std::string> overrides;
  json config;

  std::uint64_t need_seed() const {
    if (!seed) throw cs::ConfigError("this command is stochastic: --seed is required");
    return *seed;
  }
};

json parse_override_value(const std::string& text) {
  const json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!parsed.is_discarded()) return parsed;
  return json(text);  // plain string
}

void apply_overrides(json& config, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw cs::ConfigError("override must be key=value: " + ov);
    const std::string path = ov.substr(0, eq);
    json* node = &config;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw cs::ConfigError("empty override key");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = parse_override_value(ov.substr(eq + 1));
  }
}

void load_config(RunConfig& rc) {
  rc.config = cs::io::load_json_file(rc.config_path);
  apply_overrides(rc.config, rc.overrides);
  std::filesystem::create_directories(rc.out_dir);
}

// reproducibility header shared by every output file
json resolved_header(const RunConfig& rc, const std::string& command) {
  json h{{"command", command}, {"config", rc.config}};
  h["seed"] = rc.seed ? json(*rc.seed) : json(nullptr);
  return h;
}

std::string csv_header_comment(const RunConfig& rc, const std::string& command) {
  json h = resolved_header(rc, command);
  return "# " + h.dump() + "\n";
}

void write_output(const RunConfig& rc, const std::string& name, const json& body) {
  cs::io::write_text_file(rc.out_dir + "/" + name, body.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// bounds

int cmd_bounds(const RunConfig& rc) {
  const json& cfg = rc.config;
  const std::string kind = cfg.value("kind", "p2p");
  cs::bounds::OptimizerSettings st =
      cfg.contains("settings") ? cs::io::settings_from_json(cfg["settings"])
                               : cs::bounds::OptimizerSettings{};
  st.seed = rc.need_seed();
  st.jobs = rc.jobs;
  const cs::bounds::AuxShape shape =
      cfg.contains("shape") ? cs::io::shape_from_json(cfg["shape"]) : cs::bounds::AuxShape{};

  std::vector<std::string> wanted;
  if (cfg.contains("bounds"))
    for (const auto& b : cfg["bounds"]) wanted.push_back(b.get<std::string>());

  json results;
  std::ostringstream csv;
  csv << csv_header_comment(rc, "bounds")
      << "bound,value,constraint_slack,certified,assumption_ok,restarts_used\n";
  auto emit = [&](const std::string& name, const cs::bounds::BoundResult& r) {
    results[name] = cs::io::bound_result_to_json(r);
    csv << name << ',' << fmt_double(r.value) << ',' << fmt_double(r.constraint_slack) << ','
        << (r.certified ? 1 : 0) << ',' << (r.assumption_ok ? 1 : 0) << ',' << r.restarts_used
        << "\n";
  };

  if (kind == "p2p") {
    const auto target = cs::io::p2p_target_from_json(cfg.at("target"));
    if (wanted.empty()) wanted = {"delta", "delta_symbolwise"};
    for (const auto& name : wanted) {
      if (name == "delta") {
        emit(name, cs::bounds::delta_p2p(target, shape, st));
      } else if (name == "delta_symbolwise") {
        const auto sw = cs::bounds::delta_symbolwise(target, st);
        cs::bounds::BoundResult r;
        r.value = sw.value;
        r.certified = sw.value < cs::kInf;
        r.restarts_used = st.restarts;
        r.assumption_ok = cs::bounds::check_assumption1(target);
        emit(name, r);
        results[name]["P_BgX"] = cs::io::kernel_to_json(sw.P_BgX);
        results[name]["P_YgB"] = cs::io::kernel_to_json(sw.P_YgB);
      } else if (name == "lemma1_upper_bound") {
        cs::bounds::BoundResult r;
        r.value = cs::bounds::lemma1_upper_bound(target);
        r.certified = true;
        r.assumption_ok = cs::bounds::check_assumption1(target);
        emit(name, r);
      } else {
        throw cs::ConfigError("unknown p2p bound: " + name);
      }
    }
  } else if (kind == "broadcast") {
    const auto target = cs::io::broadcast_target_from_json(cfg.at("target"));
    if (wanted.empty()) wanted = {"delta_broadcast_lower", "delta_broadcast_upper"};
    const bool lower = std::count(wanted.begin(), wanted.end(), "delta_broadcast_lower") > 0;
    const bool upper = std::count(wanted.begin(), wanted.end(), "delta_broadcast_upper") > 0;
    if (lower && upper) {
      const auto pair = cs::bounds::delta_broadcast_paired(target, shape, st);
      emit("delta_broadcast_lower", pair.lower);
      emit("delta_broadcast_upper", pair.upper);
    } else if (lower) {
      emit("delta_broadcast_lower",
           cs::bounds::delta_broadcast(target, cs::bounds::BroadcastVariant::Lower, shape, st));
    } else if (upper) {
      emit("delta_broadcast_upper",
           cs::bounds::delta_broadcast(target, cs::bounds::BroadcastVariant::Upper, shape, st));
    }
  } else if (kind == "interactive") {
    const auto target = cs::io::interactive_target_from_json(cfg.at("target"));
    emit("delta_interactive", cs::bounds::delta_interactive(target, shape, st));
  } else {
    throw cs::ConfigError("unknown bounds kind: " + kind);
  }

  json out = resolved_header(rc, "bounds");
  out["results"] = std::move(results);
  write_output(rc, "bounds.json", out);
  cs::io::write_text_file(rc.out_dir + "/bounds.csv", csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// psi-curve

int cmd_psi_curve(const RunConfig& rc) {
  const json& cfg = rc.config;
  const auto target = cs::io::p2p_target_from_json(cfg.at("target"));
  cs::bounds::OptimizerSettings st =
      cfg.contains("settings") ? cs::io::settings_from_json(cfg["settings"])
                               : cs::bounds::OptimizerSettings{};
  st.seed = rc.need_seed();
  st.jobs = rc.jobs;
  const cs::bounds::AuxShape shape =
      cfg.contains("shape") ? cs::io::shape_from_json(cfg["shape"]) : cs::bounds::AuxShape{};
  std::vector<double> grid;
  for (const auto& t : cfg.at("t_grid")) grid.push_back(t.get<double>());

  const auto curve = cs::bounds::psi_curve(target, grid, shape, st);
  std::ostringstream csv;
  csv << csv_header_comment(rc, "psi-curve") << "t,psi,constraint_slack,certified\n";
  json rows = json::array();
  for (const auto& p : curve) {
    csv << fmt_double(p.t) << ',' << fmt_double(p.value) << ',' << fmt_double(p.slack) << ','
        << (p.certified ? 1 : 0) << "\n";
    rows.push_back(json{{"t", p.t},
                        {"psi", cs::io::num_to_json(p.value)},
                        {"constraint_slack", p.slack},
                        {"certified", p.certified}});
  }
  json out = resolved_header(rc, "psi-curve");
  out["curve"] = std::move(rows);
  write_output(rc, "psi_curve.json", out);
  cs::io::write_text_file(rc.out_dir + "/psi_curve.csv", csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

void write_sim_report(const RunConfig& rc, const cs::sim::SimReport& rep) {
  json out = resolved_header(rc, "simulate");
  out["report"] = cs::io::sim_report_to_json(rep);
  write_output(rc, "simreport.json", out);
  std::ostringstream csv;
  csv << csv_header_comment(rc, "simulate") << "k,mi_term,div_term,m_uniformity,markov_cmi\n";
  for (const auto& b : rep.blocks)
    csv << b.k << ',' << fmt_double(b.mi_term) << ',' << fmt_double(b.div_term) << ','
        << fmt_double(b.m_uniformity) << ',' << fmt_double(b.markov_cmi) << "\n";
  cs::io::write_text_file(rc.out_dir + "/blocks.csv", csv.str());
}

int cmd_simulate(const RunConfig& rc) {
  const json& cfg = rc.config;
  const std::string kind = cfg.value("kind", "p2p");
  const std::string mode = cfg.value("mode", "exact");
  const std::uint64_t seed = rc.need_seed();

  if (kind == "p2p") {
    auto spec = cs::io::p2p_scheme_from_json(cfg);
    spec.seed = seed;
    if (mode == "exact") {
      const auto cb = cs::sim::sample_codebooks(spec, seed);
      write_sim_report(rc, cs::sim::exact_induced_divergence(spec, cb));
    } else if (mode == "codebook-average") {
      const int n = cfg.value("n_codebooks", 50);
      const auto mc = cs::sim::expected_divergence_over_codebooks(spec, n);
      json out = resolved_header(rc, "simulate");
      out["codebook_average"] = json{{"mean", mc.mean},
                                     {"stderr", mc.stderr_mean},
                                     {"min_total", mc.min_total},
                                     {"n", mc.n},
                                     {"mean_m_uniformity", mc.mean_m_uniformity}};
      write_output(rc, "simreport.json", out);
    } else {
      throw cs::ConfigError("unknown simulate mode: " + mode);
    }
  } else if (kind == "broadcast") {
    auto spec = cs::io::broadcast_scheme_from_json(cfg);
    spec.seed = seed;
    const auto cb = cs::sim::build_broadcast_scheme(spec, seed);
    write_sim_report(rc, cs::sim::exact_broadcast_divergence(spec, cb));
  } else if (kind == "interactive") {
    auto spec = cs::io::interactive_scheme_from_json(cfg);
    spec.seed = seed;
    write_sim_report(rc, cs::sim::exact_interactive_divergence(spec));
  } else {
    throw cs::ConfigError("unknown simulate kind: " + kind);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const RunConfig& rc) {
  const json& cfg = rc.config;
  const std::string lemma = cfg.at("lemma").get<std::string>();
  const int count = cfg.value("count", 100);
  const std::uint64_t seed = rc.need_seed();

  std::ostringstream csv;
  csv << csv_header_comment(rc, "verify") << "index,lemma,s,lhs,rhs,slack,enumeration_size\n";
  json rows = json::array();
  int violations = 0;
  for (int i = 0; i < count; ++i) {
    cs::Rng rng(cs::Rng::derive(seed, static_cast<std::uint64_t>(i)));
    cs::oneshot::VerifierReport rep;
    double s_used = 0.0;
    if (lemma == "pa") {
      auto inst = cs::gen::random_pa_instance(rng);
      if (cfg.contains("s")) inst.s = cfg["s"].get<double>();
      s_used = inst.s;
      rep = cs::oneshot::pa_verify(inst);
    } else if (lemma == "resolv") {
      auto inst = cs::gen::random_resolv_instance(rng);
      if (cfg.contains("s")) inst.s = cfg["s"].get<double>();
      s_used = inst.s;
      rep = cs::oneshot::resolv_verify(inst);
    } else if (lemma == "cond-resolv") {
      auto inst = cs::gen::random_cond_resolv_instance(rng);
      if (cfg.contains("s")) inst.s = cfg["s"].get<double>();
      s_used = inst.s;
      rep = cs::oneshot::cond_resolv_verify(inst);
    } else if (lemma == "superpos") {
      auto inst = cs::gen::random_superpos_instance(rng);
      if (cfg.contains("s")) inst.s = cfg["s"].get<double>();
      s_used = inst.s;
      rep = cs::oneshot::superpos_verify(inst);
    } else if (lemma == "cond-superpos") {
      auto inst = cs::gen::random_cond_superpos_instance(rng);
      if (cfg.contains("s")) inst.s = cfg["s"].get<double>();
      s_used = inst.s;
      rep = cs::oneshot::cond_superpos_verify(inst);
    } else {
      throw cs::ConfigError("unknown lemma: " + lemma);
    }
    if (!(rep.slack >= -1e-12)) ++violations;
    csv << i << ',' << lemma << ',' << fmt_double(s_used) << ',' << fmt_double(rep.lhs_exact)
        << ',' << fmt_double(rep.rhs_bound) << ',' << fmt_double(rep.slack) << ','
        << rep.enumeration_size << "\n";
    rows.push_back(cs::io::verifier_report_to_json(rep));
  }

  json out = resolved_header(rc, "verify");
  out["lemma"] = lemma;
  out["violations"] = violations;
  out["reports"] = std::move(rows);
  write_output(rc, "verify.json", out);
  cs::io::write_text_file(rc.out_dir + "/verify.csv", csv.str());
  std::cout << "violations: " << violations << "\n";
  if (violations > 0) throw std::logic_error("one-shot bound violated on a micro instance");
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const RunConfig& rc) {
  const json& cfg = rc.config;
  const std::string param = cfg.at("param").get<std::string>();
  const std::string metric = cfg.value("metric", "mean_m_uniformity");
  const int n_codebooks = cfg.value("n_codebooks", 50);
  const std::uint64_t seed = rc.need_seed();

  std::ostringstream csv;
  csv << csv_header_comment(rc, "sweep") << "param,value,metric,metric_value,n\n";
  json rows = json::array();
  for (const auto& v : cfg.at("values")) {
    json scheme_json = cfg.at("scheme");
    scheme_json[param] = v;
    auto spec = cs::io::p2p_scheme_from_json(scheme_json);
    spec.seed = seed;
    const auto mc = cs::sim::expected_divergence_over_codebooks(spec, n_codebooks);
    double metric_value = 0.0;
    if (metric == "mean_total") {
      metric_value = mc.mean;
    } else if (metric == "min_total") {
      metric_value = mc.min_total;
    } else if (metric == "mean_m_uniformity") {
      for (double m : mc.mean_m_uniformity) metric_value += m;
      if (!mc.mean_m_uniformity.empty())
        metric_value /= static_cast<double>(mc.mean_m_uniformity.size());
    } else {
      throw cs::ConfigError("unknown sweep metric: " + metric);
    }
    csv << param << ',' << v.dump() << ',' << metric << ',' << fmt_double(metric_value) << ','
        << mc.n << "\n";
    rows.push_back(json{{"param", param},
                        {"value", v},
                        {"metric", metric},
                        {"metric_value", metric_value},
                        {"n", mc.n}});
  }
  json out = resolved_header(rc, "sweep");
  out["rows"] = std::move(rows);
  write_output(rc, "sweep.json", out);
  cs::io::write_text_file(rc.out_dir + "/sweep.csv", csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-alphabet channel-synthesis bounds, exact scheme simulation, and one-shot "
               "bound verification"};
  app.require_subcommand(1);

  RunConfig rc;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", rc.config_path, "problem/config JSON file")->required();
    sub->add_option("--out", rc.out_dir, "output directory (created if absent)");
    sub->add_option("--seed", seed_value, "master seed for all randomness")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--jobs", rc.jobs, "parallel worker threads for restarts");
    sub->add_option("--override", rc.overrides, "config override key=value (dotted path)");
  };

  CLI::App* c_bounds = app.add_subcommand("bounds", "single-letter bound evaluation");
  CLI::App* c_curve = app.add_subcommand("psi-curve", "Psi(t) on a t grid");
  CLI::App* c_sim = app.add_subcommand("simulate", "exact block-scheme divergence");
  CLI::App* c_verify = app.add_subcommand("verify", "one-shot bound verification batches");
  CLI::App* c_sweep = app.add_subcommand("sweep", "parameter sweep with codebook-averaged metrics");
  for (CLI::App* sub : {c_bounds, c_curve, c_sim, c_verify, c_sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
    if (seed_set) rc.seed = seed_value;
    load_config(rc);
    if (c_bounds->parsed()) return cmd_bounds(rc);
    if (c_curve->parsed()) return cmd_psi_curve(rc);
    if (c_sim->parsed()) return cmd_simulate(rc);
    if (c_verify->parsed()) return cmd_verify(rc);
    if (c_sweep->parsed()) return cmd_sweep(rc);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const cs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cs::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
