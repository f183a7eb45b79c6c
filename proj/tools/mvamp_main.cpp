// mvamp command line: generate / amp / se / theory / sweep.
//
// Flags mirror the JSON config keys in kebab-case; --config loads a JSON
// file first and explicitly passed flags override it. --dry-run prints the
// resolved configuration and exits. All randomness flows from --seed.
//
// Exit codes: 0 success, 2 usage or parameter-domain error, 3 numerical
// failure, 4 infeasible parameters.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvamp/amp.hpp"
#include "mvamp/harness.hpp"
#include "mvamp/io.hpp"
#include "mvamp/metrics.hpp"
#include "mvamp/models.hpp"
#include "mvamp/state_evolution.hpp"
#include "mvamp/theory.hpp"

using json = nlohmann::json;
using namespace mvamp;

namespace {

struct Options {
  std::string subcommand;
  std::string theory_action;

  std::string model = "multilayer";
  int L = 1;
  double rho = 0.1;
  double eps_plus = 0.0;
  double eps_minus = 0.0;
  std::optional<double> eps;
  std::optional<double> delta;

  std::vector<double> lambdas;
  std::vector<double> degrees;
  std::int64_t n = 4000;
  std::int64_t dense_cap = 8000;

  int iterations = 100;
  double warm = 0.1;
  double tol = 1e-6;
  int max_iter = 10000;
  std::string quad = "auto";  // auto | mc | gh | tensor
  int nodes = 61;
  std::int64_t mc_samples = 200000;
  int record_every = 0;

  std::string out;
  std::string out_nodes;
  std::string out_edges;
  std::string out_views;
  std::string out_snapshots;
  std::string matrix_out;
  std::vector<double> scan_dir;
  std::vector<double> scan_grid;
  std::string kind = "phase-ml";
  std::vector<double> axis1;
  std::vector<double> axis2;
  int reps = 5;

  std::uint64_t seed = 0;
  bool dry_run = false;
};

PriorSpec make_prior(const Options& o) {
  if (o.model == "multilayer") return PriorSpec::multilayer(o.L, o.rho);
  if (o.model == "dynamic") return PriorSpec::dynamic(o.L, o.rho);
  if (o.model == "semi") {
    if (o.eps.has_value() || o.delta.has_value())
      return PriorSpec::semi_mean_skew(o.eps.value_or(0.0), o.delta.value_or(0.0));
    return PriorSpec::semi(o.eps_plus, o.eps_minus);
  }
  throw ParameterError("unknown model '" + o.model + "'");
}

QuadratureSpec make_quad(const Options& o, const PriorSpec& prior) {
  QuadratureSpec q;
  std::string method = o.quad;
  if (method == "auto")
    method = prior.family == Family::Semi ? "gh" : (prior.num_layers <= 4 ? "tensor" : "mc");
  if (method == "gh") {
    q = QuadratureSpec::gh(o.nodes);
  } else if (method == "tensor") {
    q = QuadratureSpec::tensor_gh(std::min(o.nodes, 41));
  } else if (method == "mc") {
    q = QuadratureSpec::mc(o.mc_samples, o.seed + 0x9e37);
  } else {
    throw ParameterError("unknown quadrature '" + o.quad + "'");
  }
  return q;
}

json resolved_config(const Options& o) {
  json j;
  j["subcommand"] = o.subcommand;
  if (!o.theory_action.empty()) j["theory-action"] = o.theory_action;
  j["model"] = {{"family", o.model}, {"L", o.L}, {"rho", o.rho},
                {"eps-plus", o.eps_plus}, {"eps-minus", o.eps_minus}};
  if (o.eps) j["model"]["eps"] = *o.eps;
  if (o.delta) j["model"]["delta"] = *o.delta;
  j["channel"] = {{"lambda", o.lambdas}, {"degree", o.degrees}, {"n", o.n},
                  {"dense-cap", o.dense_cap}};
  j["algo"] = {{"iterations", o.iterations}, {"warm", o.warm},     {"tol", o.tol},
               {"max-iter", o.max_iter},     {"quad", o.quad},     {"nodes", o.nodes},
               {"mc-samples", o.mc_samples}, {"record-every", o.record_every}};
  j["io"] = {{"out", o.out},
             {"out-nodes", o.out_nodes},
             {"out-edges", o.out_edges},
             {"out-views", o.out_views},
             {"out-snapshots", o.out_snapshots},
             {"matrix-out", o.matrix_out}};
  j["scan"] = {{"dir", o.scan_dir}, {"grid", o.scan_grid}};
  j["sweep"] = {{"kind", o.kind}, {"axis1", o.axis1}, {"axis2", o.axis2}, {"reps", o.reps}};
  j["seed"] = o.seed;
  return j;
}

void apply_config_file(Options& o, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  json j = json::parse(in);
  auto get = [&](const json& obj, const char* key, auto& target) {
    if (obj.contains(key)) target = obj[key].template get<std::decay_t<decltype(target)>>();
  };
  get(j, "subcommand", o.subcommand);
  if (j.contains("theory-action")) o.theory_action = j["theory-action"].get<std::string>();
  if (j.contains("model")) {
    const auto& m = j["model"];
    get(m, "family", o.model);
    get(m, "L", o.L);
    get(m, "rho", o.rho);
    get(m, "eps-plus", o.eps_plus);
    get(m, "eps-minus", o.eps_minus);
    if (m.contains("eps")) o.eps = m["eps"].get<double>();
    if (m.contains("delta")) o.delta = m["delta"].get<double>();
  }
  if (j.contains("channel")) {
    const auto& c = j["channel"];
    get(c, "lambda", o.lambdas);
    get(c, "degree", o.degrees);
    get(c, "n", o.n);
    get(c, "dense-cap", o.dense_cap);
  }
  if (j.contains("algo")) {
    const auto& a = j["algo"];
    get(a, "iterations", o.iterations);
    get(a, "warm", o.warm);
    get(a, "tol", o.tol);
    get(a, "max-iter", o.max_iter);
    get(a, "quad", o.quad);
    get(a, "nodes", o.nodes);
    get(a, "mc-samples", o.mc_samples);
    get(a, "record-every", o.record_every);
  }
  if (j.contains("io")) {
    const auto& io = j["io"];
    get(io, "out", o.out);
    get(io, "out-nodes", o.out_nodes);
    get(io, "out-edges", o.out_edges);
    get(io, "out-views", o.out_views);
    get(io, "out-snapshots", o.out_snapshots);
    get(io, "matrix-out", o.matrix_out);
  }
  if (j.contains("scan")) {
    const auto& sc = j["scan"];
    get(sc, "dir", o.scan_dir);
    get(sc, "grid", o.scan_grid);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    get(s, "kind", o.kind);
    get(s, "axis1", o.axis1);
    get(s, "axis2", o.axis2);
    get(s, "reps", o.reps);
  }
  get(j, "seed", o.seed);
}

std::vector<double> default_lambdas(const Options& o, int L) {
  if (!o.lambdas.empty()) {
    if (static_cast<int>(o.lambdas.size()) == 1 && L > 1)
      return std::vector<double>(L, o.lambdas[0]);
    if (static_cast<int>(o.lambdas.size()) != L)
      throw ParameterError("--lambda needs 1 or L values");
    return o.lambdas;
  }
  return std::vector<double>(L, 1.0);
}

std::string model_json(const PriorSpec& p) {
  const char* family = p.family == Family::Multilayer  ? "multilayer"
                       : p.family == Family::Dynamic   ? "dynamic"
                                                       : "semi";
  return JsonObject()
      .field("family", std::string(family))
      .field("L", p.num_layers)
      .field("rho", p.rho)
      .field("eps_plus", p.eps_plus)
      .field("eps_minus", p.eps_minus)
      .str();
}

int cmd_generate(const Options& o) {
  const PriorSpec prior = make_prior(o);
  const auto pop = sample_population(prior, o.n, o.seed);
  const auto lambdas = default_lambdas(o, prior.num_layers);

  json summary;
  summary["n"] = o.n;
  summary["L"] = prior.num_layers;
  summary["seed"] = o.seed;

  if (!o.out_nodes.empty()) {
    std::ofstream f(o.out_nodes);
    write_population_csv(f, pop, model_json(prior));
    summary["nodes_csv"] = o.out_nodes;
  }
  if (!o.degrees.empty()) {
    std::vector<LayerRates> rates;
    for (int l = 0; l < prior.num_layers; ++l)
      rates.push_back(rates_from_snr(o.degrees[l], lambdas[l], o.n, l));
    const auto g = sample_graphs(pop, rates, o.seed);
    std::int64_t edges = 0;
    for (const auto& lg : g.layers) edges += lg.edge_count;
    summary["edges"] = edges;
    if (!o.out_edges.empty()) {
      std::ofstream f(o.out_edges);
      write_edges_csv(f, g, model_json(prior));
      summary["edges_csv"] = o.out_edges;
    }
  }
  if (!o.out_views.empty()) {
    const auto views = sample_spiked(pop, lambdas, o.seed, o.dense_cap);
    write_spiked_raw(o.out_views, views, o.seed);
    summary["views_raw"] = o.out_views;
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_amp(const Options& o) {
  const PriorSpec prior = make_prior(o);
  const auto pop = sample_population(prior, o.n, o.seed);
  const auto lambdas = default_lambdas(o, prior.num_layers);
  const auto denoiser = bayes_denoiser(prior);
  const auto m0 = warm_init(pop, o.warm, o.seed);

  AmpConfig cfg;
  cfg.iterations = o.iterations;
  cfg.lambdas = lambdas;
  cfg.record_every = o.record_every;

  AmpTrajectory traj;
  if (!o.degrees.empty()) {
    std::vector<LayerRates> rates;
    for (int l = 0; l < prior.num_layers; ++l)
      rates.push_back(rates_from_snr(o.degrees[l], lambdas[l], o.n, l));
    const auto g = sample_graphs(pop, rates, o.seed);
    traj = run_amp_on_graph(g, pop, *denoiser, cfg, m0);
  } else {
    const auto views = sample_spiked(pop, lambdas, o.seed, o.dense_cap);
    const SpikedViewSet vs(views);
    traj = run_amp(vs, pop, *denoiser, cfg, m0);
  }

  if (!o.out.empty()) {
    std::ofstream f(o.out);
    write_trajectory_csv(f, traj, model_json(prior));
  }
  if (!o.out_snapshots.empty()) write_snapshots_raw(o.out_snapshots, traj);

  const LabelEstimates est = estimate_labels(traj, pop, prior);
  json res;
  res["steps"] = traj.steps_run;
  for (int l = 0; l < traj.layers; ++l) res["final_overlap"].push_back(traj.final_overlap(l));
  if (prior.family == Family::Multilayer) {
    res["global_accuracy"] = accuracy(est.global, pop.y);
  } else {
    std::vector<std::int8_t> x1(pop.n);
    for (std::int64_t i = 0; i < pop.n; ++i) x1[i] = pop.x_at(i, 0);
    res["first_layer_accuracy"] = accuracy(est.per_layer[0], x1);
  }
  if (!o.out.empty()) res["trajectory_csv"] = o.out;
  std::cout << res.dump() << "\n";
  return 0;
}

int cmd_se(const Options& o) {
  const PriorSpec prior = make_prior(o);
  const auto lambdas = default_lambdas(o, prior.num_layers);
  const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), lambdas.size());
  const QuadratureSpec quad = make_quad(o, prior);

  if (!o.scan_dir.empty()) {
    if (o.scan_grid.empty()) throw ParameterError("se: --scan-grid required with --scan-dir");
    const Eigen::VectorXd dir = Eigen::Map<const Eigen::VectorXd>(o.scan_dir.data(), o.scan_dir.size());
    const Eigen::VectorXd grid =
        Eigen::Map<const Eigen::VectorXd>(o.scan_grid.data(), o.scan_grid.size());
    const RayScan scan = ray_concavity_scan(prior, dir, grid, quad);
    json res;
    res["violations"] = scan.violations.size();
    if (!o.out.empty()) {
      std::ofstream f(o.out);
      write_ray_scan_csv(f, scan, model_json(prior));
      res["csv"] = o.out;
    }
    std::cout << res.dump() << "\n";
    return 0;
  }

  const FreeEnergyResult r = maximize_g(prior, lam, quad, o.tol, o.max_iter);
  json res;
  for (int l = 0; l < r.q_star.size(); ++l) res["q_star"].push_back(r.q_star(l));
  res["g_star"] = r.g_star;
  res["mi_limit"] = r.mi_limit;
  for (int l = 0; l < r.mmse_layers.size(); ++l) res["mmse"].push_back(r.mmse_layers(l));
  res["dmse"] = r.dmse;
  if (std::isfinite(r.mmse_implicit)) res["mmse_implicit"] = r.mmse_implicit;
  res["near_degenerate"] = r.near_degenerate;
  if (!o.out.empty()) {
    // per-iteration track from the plain-start fixed point
    const auto fp = se_fixed_point(prior, lam, Eigen::VectorXd::Constant(prior.num_layers, 0.5),
                                   o.tol, o.max_iter, quad);
    std::ofstream f(o.out);
    write_fixed_point_csv(f, fp, model_json(prior));
    res["csv"] = o.out;
  }
  std::cout << res.dump() << "\n";
  return 0;
}

int cmd_theory(const Options& o) {
  json res;
  if (o.theory_action == "threshold-ml") {
    const Eigen::VectorXd lam =
        Eigen::Map<const Eigen::VectorXd>(o.lambdas.data(), o.lambdas.size());
    const ThresholdReport rep = threshold_ml(lam, o.rho);
    res["criterion"] = rep.criterion_value;
    res["feasible"] = rep.feasible;
    res["hessian_max_eig"] = rep.hessian_max_eig;
    res["eigvec_sign_ok"] = rep.leading_eigvec_sign_ok;
  } else if (o.theory_action == "threshold-dyn") {
    const ThresholdReport rep = o.lambdas.empty()
                                    ? threshold_dyn(o.L, o.rho)
                                    : threshold_dyn(o.L, o.rho, o.lambdas[0]);
    res["theta_star"] = rep.theta_star;
    res["lambda_c"] = rep.critical_lambda;
    res["kms_max_eig"] = rep.hessian_max_eig;
    if (!o.lambdas.empty()) res["feasible"] = rep.feasible;
  } else if (o.theory_action == "feasibility") {
    const PriorSpec prior = make_prior(o);
    const Eigen::VectorXd lam =
        Eigen::Map<const Eigen::VectorXd>(o.lambdas.data(), o.lambdas.size());
    const ThresholdReport rep = hessian_zero_feasibility(prior, lam);
    res["feasible"] = rep.feasible;
    res["hessian_max_eig"] = rep.hessian_max_eig;
    res["eigvec_sign_ok"] = rep.leading_eigvec_sign_ok;
  } else if (o.theory_action == "threshold") {
    // sweep CSV: axis1 = rho grid; columns fixed by the interface contract
    if (o.out.empty()) throw ParameterError("theory threshold: --out required");
    std::ofstream f(o.out);
    JsonObject spec;
    spec.field("kind", std::string("threshold"))
        .field("family", o.model)
        .field("L", o.L)
        .field_array("rho_grid", o.axis1);
    CsvWriter csv(f, spec.str(),
                  {"sweep_value", "criterion", "lambda_c", "theta_star", "max_eig", "feasible"});
    for (double rho : o.axis1) {
      double criterion = std::numeric_limits<double>::quiet_NaN();
      double lambda_c = std::numeric_limits<double>::quiet_NaN();
      double theta = std::numeric_limits<double>::quiet_NaN();
      double max_eig = std::numeric_limits<double>::quiet_NaN();
      bool feasible = false;
      if (o.model == "multilayer") {
        const Eigen::VectorXd lam =
            Eigen::Map<const Eigen::VectorXd>(o.lambdas.data(), o.lambdas.size());
        const ThresholdReport rep = threshold_ml(lam, rho);
        criterion = rep.criterion_value;
        max_eig = rep.hessian_max_eig;
        feasible = rep.feasible;
      } else {
        const ThresholdReport rep = o.lambdas.empty()
                                        ? threshold_dyn(o.L, rho)
                                        : threshold_dyn(o.L, rho, o.lambdas[0]);
        lambda_c = rep.critical_lambda;
        theta = rep.theta_star;
        max_eig = rep.hessian_max_eig;
        feasible = rep.feasible;
      }
      csv.row({rho, criterion, lambda_c, theta, max_eig, feasible ? 1.0 : 0.0});
    }
    res["csv"] = o.out;
  } else if (o.theory_action == "mi-curve") {
    if (o.out.empty()) throw ParameterError("theory mi-curve: --out required");
    const PriorSpec prior = make_prior(o);
    const QuadratureSpec quad = make_quad(o, prior);
    std::ofstream f(o.out);
    run_mi_curve_semi(prior, o.axis1, quad, f);
    res["csv"] = o.out;
  } else {
    throw ParameterError("unknown theory action");
  }
  std::cout << res.dump() << "\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  SweepSpec spec;
  spec.model = make_prior(o);
  spec.axis1 = o.axis1;
  spec.axis2 = o.axis2;
  spec.n = o.n;
  spec.degrees = o.degrees;
  spec.repetitions = o.reps;
  spec.iterations = o.iterations;
  spec.warm_fraction = o.warm;
  spec.seed_base = o.seed;
  spec.output_path = o.out;
  spec.matrix_output_path = o.matrix_out;

  if (o.kind == "mi-semi") {
    if (o.out.empty()) throw ParameterError("sweep: --out required");
    std::ofstream f(o.out);
    run_mi_curve_semi(spec.model, o.axis1, make_quad(o, spec.model), f);
  } else {
    run_sweep_to_file(spec, o.kind, make_quad(o, spec.model));
  }
  json res;
  res["csv"] = o.out;
  std::cout << res.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  std::string config_path;

  CLI::App app{"multi-view community detection via coupled AMP"};
  app.require_subcommand(0, 1);
  app.set_help_all_flag("--help-all");

  // config file is applied before flag values override
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) apply_config_file(o, config_path);
  } catch (const json::exception& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override");
    cmd->add_option("--model", o.model, "multilayer | dynamic | semi");
    cmd->add_option("--L", o.L, "number of layers");
    cmd->add_option("--rho", o.rho, "flip rate");
    cmd->add_option("--eps-plus", o.eps_plus, "reveal rate for +1 (semi)");
    cmd->add_option("--eps-minus", o.eps_minus, "reveal rate for -1 (semi)");
    cmd->add_option("--eps", [&o](const CLI::results_t& r) { o.eps = std::stod(r[0]); return true; },
                    "mean reveal rate (semi)");
    cmd->add_option("--delta",
                    [&o](const CLI::results_t& r) { o.delta = std::stod(r[0]); return true; },
                    "reveal skew (semi)");
    cmd->add_option("--lambda", o.lambdas, "per-layer SNR (1 value broadcasts)")->delimiter(',');
    cmd->add_option("--degree", o.degrees, "per-layer average degree; empty = spiked views")
        ->delimiter(',');
    cmd->add_option("--n", o.n, "node count");
    cmd->add_option("--dense-cap", o.dense_cap, "node budget for dense spiked views");
    cmd->add_option("--iterations", o.iterations, "AMP iterations");
    cmd->add_option("--warm", o.warm, "warm init fraction");
    cmd->add_option("--tol", o.tol, "fixed point tolerance");
    cmd->add_option("--max-iter", o.max_iter, "fixed point budget");
    cmd->add_option("--quad", o.quad, "auto | mc | gh | tensor");
    cmd->add_option("--nodes", o.nodes, "quadrature nodes");
    cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples");
    cmd->add_option("--record-every", o.record_every, "trajectory snapshot period");
    cmd->add_option("--out", o.out, "output CSV path");
    cmd->add_option("--out-nodes", o.out_nodes, "population CSV path");
    cmd->add_option("--out-edges", o.out_edges, "edge list CSV path");
    cmd->add_option("--out-views", o.out_views, "raw spiked views path");
    cmd->add_option("--out-snapshots", o.out_snapshots, "raw m snapshot dump path");
    cmd->add_option("--matrix-out", o.matrix_out, "gnuplot matrix-mode accuracy grid");
    cmd->add_option("--scan-dir", o.scan_dir, "ray direction for concavity scans")->delimiter(',');
    cmd->add_option("--scan-grid", o.scan_grid, "ray scan t grid")->delimiter(',');
    cmd->add_option("--kind", o.kind, "sweep kind: phase-ml | phase-dyn | se-vs-amp | mi-semi");
    cmd->add_option("--axis1", o.axis1, "sweep axis 1 values")->delimiter(',');
    cmd->add_option("--axis2", o.axis2, "sweep axis 2 values")->delimiter(',');
    cmd->add_option("--reps", o.reps, "repetitions per cell");
    cmd->add_option("--seed", o.seed, "root seed");
    cmd->add_flag("--dry-run", o.dry_run, "print the resolved config and exit");
  };

  app.add_option("--config", config_path, "JSON config file (may carry the subcommand)");
  app.add_flag("--dry-run", o.dry_run, "print the resolved config and exit");

  CLI::App* gen = app.add_subcommand("generate", "sample populations, graphs, spiked views");
  CLI::App* amp = app.add_subcommand("amp", "run coupled AMP on sampled views");
  CLI::App* se = app.add_subcommand("se", "state evolution fixed point and limiting quantities");
  CLI::App* theory = app.add_subcommand("theory", "thresholds and limiting MI");
  CLI::App* sweep = app.add_subcommand("sweep", "experiment sweeps with CSV output");
  for (CLI::App* cmd : {gen, amp, se, theory, sweep}) add_common(cmd);
  theory->add_option("action", o.theory_action,
                     "threshold-ml | threshold-dyn | feasibility | threshold | mi-curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (app.get_subcommands().empty()) {
    if (!o.subcommand.empty()) {
      // subcommand supplied through the config file
    } else {
      std::cerr << app.help() << "\n";
      return 2;
    }
  } else {
    o.subcommand = app.get_subcommands().front()->get_name();
  }

  if (o.dry_run) {
    std::cout << resolved_config(o).dump() << "\n";
    return 0;
  }

  try {
    if (o.subcommand == "generate") return cmd_generate(o);
    if (o.subcommand == "amp") return cmd_amp(o);
    if (o.subcommand == "se") return cmd_se(o);
    if (o.subcommand == "theory") return cmd_theory(o);
    if (o.subcommand == "sweep") return cmd_sweep(o);
    std::cerr << "unknown subcommand '" << o.subcommand << "'\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}
