// SPDX-License-Identifier: Apache-2.0
//
// qot: config-driven front end for the transport laboratory.
//   qot <subcommand> --config path.json [--out dir] [--jobs N] [--seed S]
// Exit codes: 0 success, 2 infeasible, 3 non-convergence, 4 config error.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "qot/serialize.hpp"

namespace fs = std::filesystem;
using namespace qot;

namespace {

struct CliState {
  std::string config_path;
  std::string out_dir = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> lambda_arg;
};

RunConfig load_config(const CliState& cli) {
  std::ifstream in(cli.config_path);
  if (!in) fail(ErrorCode::config, "cannot open config file: " + cli.config_path);
  json j = json::parse(in, nullptr, true, true);
  RunConfig cfg = run_config_from_json(j);
  if (cli.seed_override) cfg.seed = *cli.seed_override;
  if (cli.lambda_arg) {
    if (*cli.lambda_arg == "auto")
      cfg.lambda.reset();
    else
      cfg.lambda = std::stod(*cli.lambda_arg);
  }
  return cfg;
}

std::string header_comment(const RunConfig& cfg) {
  return "# config_hash=" + config_hash(run_config_to_json(cfg)) +
         " tolerances=" + tolerances_to_json(cfg.tolerances).dump();
}

void write_text(const fs::path& p, const std::string& text) {
  if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) fail(ErrorCode::config, "cannot write " + p.string());
  out << text;
}

void write_json_file(const fs::path& p, json j, const RunConfig& cfg) {
  j["config_hash"] = config_hash(run_config_to_json(cfg));
  j["tolerances"] = tolerances_to_json(cfg.tolerances);
  write_text(p, j.dump(2) + "\n");
}

BuiltExample build_from_config(const RunConfig& cfg) {
  require(cfg.example.has_value(), ErrorCode::config, "config needs an \"example\" entry");
  return build(*cfg.example, cfg.tolerances);
}

// Deterministic parallel map: results land in preallocated slots.
template <typename F>
void parallel_for(int n, int jobs, F&& f) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t)
    pool.emplace_back([&]() {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

int cmd_example(const CliState& cli, bool list_only) {
  if (list_only) {
    for (const auto& [kind, doc] : example_catalog())
      std::cout << kind << "\n    " << doc << "\n";
    return 0;
  }
  RunConfig cfg = load_config(cli);
  BuiltExample ex = build_from_config(cfg);
  Rng rng(cfg.seed);
  ex.bimodule.validate(rng, cfg.tolerances);
  ex.gradient.validate(rng, cfg.tolerances);
  json j{{"schema", 1},
         {"label", ex.label},
         {"kind", ex.kind},
         {"algebra", algebra_to_json(ex.algebra)},
         {"gradient", provenance_to_json(ex.gradient)},
         {"spectral_gap", ex.heat.spectral_gap() ? json(*ex.heat.spectral_gap()) : json(nullptr)},
         {"validated", true}};
  if (ex.expected_ricci) j["expected_ricci"] = *ex.expected_ricci;
  write_json_file(fs::path(cli.out_dir) / "example.json", j, cfg);
  std::cout << "built " << ex.label << " (dim " << ex.algebra->dim() << ")\n";
  return 0;
}

int cmd_distance(const CliState& cli, bool geodesic_only) {
  RunConfig cfg = load_config(cli);
  BuiltExample ex = build_from_config(cfg);
  require(cfg.states.size() >= 2, ErrorCode::config, "distance needs at least two states");
  RepresentingFunction f = mean_from_config(cfg);
  TransportOptions topts;
  topts.optimizer = cfg.optimizer;
  topts.seed = cfg.seed;

  std::vector<Density> states;
  std::vector<std::string> labels;
  for (size_t i = 0; i < cfg.states.size(); ++i) {
    StateSpec s = cfg.states[i];
    if (s.kind == "random" || s.kind == "random_component") s.seed ^= cfg.seed;
    states.push_back(realize_state(s, ex, cfg.tolerances));
    labels.push_back(s.label.empty() ? ("state" + std::to_string(i)) : s.label);
  }

  struct Cell {
    int i, j;
    TransportResult res;
  };
  std::vector<Cell> cells;
  if (geodesic_only) {
    cells.push_back({0, 1, {}});
  } else {
    for (size_t i = 0; i < states.size(); ++i)
      for (size_t j = i + 1; j < states.size(); ++j)
        cells.push_back({static_cast<int>(i), static_cast<int>(j), {}});
  }
  parallel_for(static_cast<int>(cells.size()), cli.jobs, [&](int c) {
    cells[c].res = transport_distance(ex.gradient, ex.heat, f, cfg.theta, states[cells[c].i],
                                      states[cells[c].j], cfg.K, topts, cfg.tolerances);
  });

  bool any_feasible = false, any_maxiter = false;
  std::string csv = header_comment(cfg) + "\nlabel0,label1,distance,gap,status,K\n";
  for (const auto& c : cells) {
    const char* status = c.res.status == TransportStatus::converged    ? "converged"
                         : c.res.status == TransportStatus::infeasible ? "infeasible"
                                                                       : "max_iter";
    any_feasible |= !c.res.infinite;
    any_maxiter |= c.res.status == TransportStatus::max_iter;
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%s,%.12g,%.3g,%s,%d\n", labels[c.i].c_str(),
                  labels[c.j].c_str(), c.res.infinite ? INFINITY : c.res.distance, c.res.gap,
                  status, c.res.per_grid.empty() ? cfg.K : c.res.per_grid.back().first);
    csv += line;
    if (!c.res.infinite)
      write_json_file(fs::path(cli.out_dir) /
                          ("geodesic_" + labels[c.i] + "_" + labels[c.j] + ".json"),
                      geodesic_to_json(c.res, f, cfg.theta), cfg);
  }
  if (!geodesic_only) write_text(fs::path(cli.out_dir) / "distances.csv", csv);
  std::cout << csv;
  if (!any_feasible) return 2;
  if (any_maxiter) return 3;
  return 0;
}

int cmd_certify(const CliState& cli) {
  RunConfig cfg = load_config(cli);
  BuiltExample ex = build_from_config(cfg);
  Rng rng(cfg.seed);
  CertifyOptions opts = cfg.certify;
  opts.transport.optimizer = cfg.optimizer;
  opts.transport.seed = cfg.seed;
  CertificationReport rep = certify_example(ex, cfg.lambda, opts, rng, cfg.tolerances);
  write_json_file(fs::path(cli.out_dir) / "certification.json", certification_to_json(rep), cfg);
  std::cout << "lambda_tested=" << rep.lambda_tested
            << " hessian_est=" << rep.hessian_lambda_est << " be=" << rep.be.pass
            << " evi=" << rep.evi.pass << " convexity=" << rep.convexity.pass
            << " consistent=" << rep.consistent << " verdict=" << (rep.verdict ? "pass" : "fail")
            << "\n";
  return rep.verdict ? 0 : 3;
}

int cmd_chain(const CliState& cli) {
  RunConfig cfg = load_config(cli);
  require(cfg.chain.has_value(), ErrorCode::config, "config needs a \"chain\" entry");
  ChainDescriptor chain = build_chain(*cfg.chain, cfg.tolerances);
  int top = chain.num_stages() - 1;
  const auto& topstage = chain.stage(top);
  RepresentingFunction f = mean_from_config(cfg);
  TransportOptions topts;
  topts.optimizer = cfg.optimizer;
  topts.seed = cfg.seed;

  Density rho0, rho1;
  if (cfg.states.size() >= 2) {
    BuiltExample top_ex;
    top_ex.algebra = topstage.algebra;
    top_ex.bimodule = topstage.bimodule;
    top_ex.gradient = topstage.gradient;
    top_ex.heat = HeatData(topstage.gradient, cfg.tolerances);
    StateSpec s0 = cfg.states[0], s1 = cfg.states[1];
    s0.seed ^= cfg.seed;
    s1.seed ^= cfg.seed;
    rho0 = realize_state(s0, top_ex, cfg.tolerances);
    rho1 = realize_state(s1, top_ex, cfg.tolerances);
  } else {
    Rng rng(cfg.seed);
    rho0 = random_density(topstage.algebra, rng, 0.7);
    rho1 = random_density(topstage.algebra, rng, 0.7);
  }
  ChainConvergenceReport rep =
      distance_convergence(chain, rho0, rho1, f, cfg.theta, cfg.K, topts, cfg.tolerances);
  std::string csv = header_comment(cfg) + "\nstage,mass0,mass1,distance,gap,status,K\n";
  for (const auto& r : rep.rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%.12g,%.12g,%.12g,%.3g,%s,%d\n", r.stage, r.mass0,
                  r.mass1, r.infeasible ? INFINITY : r.distance, r.gap,
                  r.infeasible ? "infeasible" : "ok", r.K);
    csv += line;
  }
  csv += std::string("# nondecreasing_within_gaps=") +
         (rep.nondecreasing_within_gaps ? "true" : "false") + "\n";
  write_text(fs::path(cli.out_dir) / "chain.csv", csv);
  write_json_file(fs::path(cli.out_dir) / "chain.json", chain_report_to_json(rep), cfg);
  std::cout << csv;
  bool any_feasible = false;
  for (const auto& r : rep.rows) any_feasible |= !r.infeasible;
  return any_feasible ? 0 : 2;
}

int cmd_entropy_flow(const CliState& cli) {
  RunConfig cfg = load_config(cli);
  BuiltExample ex = build_from_config(cfg);
  require_log_mean(mean_from_config(cfg), cfg.theta);
  Density rho;
  if (!cfg.states.empty()) {
    StateSpec s = cfg.states[0];
    if (s.kind == "random" || s.kind == "random_component") s.seed ^= cfg.seed;
    rho = realize_state(s, ex, cfg.tolerances);
  } else {
    Rng rng(cfg.seed);
    rho = random_density(ex.algebra, rng, 0.7);
  }
  TransportOptions topts;
  topts.optimizer = cfg.optimizer;
  topts.seed = cfg.seed;
  RepresentingFunction f = RepresentingFunction::logarithmic();

  double ent0 = entropy(rho);
  std::string csv =
      header_comment(cfg) + "\nt,entropy,entropy_drop,wasserstein,gap,bound,satisfied\n";
  bool all_ok = true, any_max = false;
  for (double t : cfg.t_grid) {
    Density rt = Density::make(ex.heat.heat_apply(t, rho.element()).symmetrized(), 1e-9);
    double ent = entropy(rt);
    double drop = ent0 - ent;
    TransportResult res =
        transport_distance(ex.gradient, ex.heat, f, 1.0, rho, rt, cfg.K, topts, cfg.tolerances);
    any_max |= res.status == TransportStatus::max_iter;
    // W^2 <= t (Ent(rho) - Ent(h_t rho)): the heat-path energy bound
    double bound = std::sqrt(std::max(t * drop, 0.0));
    bool ok = res.distance <= bound + res.gap + 1e-6;
    all_ok &= ok;
    char line[256];
    std::snprintf(line, sizeof(line), "%.6g,%.12g,%.12g,%.12g,%.3g,%.12g,%d\n", t, ent, drop,
                  res.distance, res.gap, bound, ok ? 1 : 0);
    csv += line;
  }
  write_text(fs::path(cli.out_dir) / "entropy_flow.csv", csv);
  std::cout << csv;
  if (!all_ok) return 3;
  return any_max ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum optimal transport laboratory"};
  app.require_subcommand(1);
  CliState cli;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* opt = sub->add_option("--config", cli.config_path, "run configuration (json)");
    if (needs_config) opt->required();
    sub->add_option("--out", cli.out_dir, "output directory");
    sub->add_option("--jobs", cli.jobs, "parallel workers for tables");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { cli.seed_override = s; }, "override config seed");
  };

  auto* example = app.add_subcommand("example", "build or list example generators");
  bool list_only = false;
  example->add_flag("--list", list_only, "list example kinds with parameter docs");
  example->allow_extras();
  add_common(example, false);

  auto* distance = app.add_subcommand("distance", "pairwise transport distance table");
  add_common(distance);
  auto* geodesic = app.add_subcommand("geodesic", "single-pair geodesic dump");
  add_common(geodesic);
  auto* certify = app.add_subcommand("certify", "lower Ricci bound certification suite");
  add_common(certify);
  std::string lambda_str;
  certify->add_option("--lambda", lambda_str, "bound to certify, or 'auto'");
  auto* chain = app.add_subcommand("chain", "per-stage distance convergence study");
  add_common(chain);
  auto* eflow = app.add_subcommand("entropy-flow", "entropy vs t with the transport bound");
  add_common(eflow);

  CLI11_PARSE(app, argc, argv);
  if (!lambda_str.empty()) cli.lambda_arg = lambda_str;

  try {
    if (app.got_subcommand(example)) {
      for (const auto& extra : example->remaining())
        if (extra == "list") list_only = true;
      if (!list_only && cli.config_path.empty())
        fail(ErrorCode::config, "example needs --config or --list");
      return cmd_example(cli, list_only);
    }
    if (app.got_subcommand(distance)) return cmd_distance(cli, false);
    if (app.got_subcommand(geodesic)) return cmd_distance(cli, true);
    if (app.got_subcommand(certify)) return cmd_certify(cli);
    if (app.got_subcommand(chain)) return cmd_chain(cli);
    if (app.got_subcommand(eflow)) return cmd_entropy_flow(cli);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::infeasible: return 2;
      case ErrorCode::non_convergence: return 3;
      default: return 4;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 4;
}
