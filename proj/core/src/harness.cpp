#include "mvamp/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "mvamp/amp.hpp"
#include "mvamp/io.hpp"
#include "mvamp/metrics.hpp"
#include "mvamp/parallel.hpp"
#include "mvamp/state_evolution.hpp"
#include "mvamp/theory.hpp"

namespace mvamp {

void SweepSpec::validate() const {
  model.validate();
  if (axis1.empty() || axis2.empty()) throw ParameterError("sweep: grid must be nonempty");
  if (repetitions < 1) throw ParameterError("sweep: repetitions must be >= 1");
  if (iterations < 1) throw ParameterError("sweep: iterations must be >= 1");
  if (!(warm_fraction >= 0.0 && warm_fraction <= 1.0))
    throw ParameterError("sweep: warm fraction must be in [0, 1]");
  if (!degrees.empty() && static_cast<int>(degrees.size()) != model.num_layers)
    throw ParameterError("sweep: degrees must have one entry per layer");
}

std::uint64_t cell_seed(std::uint64_t seed_base, std::int64_t cell_index, int repetition) {
  return mix64(mix64(seed_base ^ mix64(stream::harness_cell)) ^
               mix64(static_cast<std::uint64_t>(cell_index) * 0x10001ULL +
                     static_cast<std::uint64_t>(repetition)));
}

std::string sweep_spec_json(const SweepSpec& spec, const std::string& kind) {
  const char* family = spec.model.family == Family::Multilayer  ? "multilayer"
                       : spec.model.family == Family::Dynamic   ? "dynamic"
                                                                : "semi";
  JsonObject j;
  j.field("kind", kind)
      .field("family", std::string(family))
      .field("L", spec.model.num_layers)
      .field("rho", spec.model.rho)
      .field("eps_plus", spec.model.eps_plus)
      .field("eps_minus", spec.model.eps_minus)
      .field_array("axis1", spec.axis1)
      .field_array("axis2", spec.axis2)
      .field("n", spec.n)
      .field_array("degrees", spec.degrees)
      .field("repetitions", spec.repetitions)
      .field("iterations", spec.iterations)
      .field("warm_fraction", spec.warm_fraction)
      .field("seed_base", spec.seed_base);
  return j.str();
}

namespace {

struct CellResult {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  int ok_reps = 0;
  bool failed = false;
};

// One sweep cell: sample, run AMP, score; repeated and averaged. The scorer
// maps (trajectory, population) to the cell's accuracy number.
template <typename Scorer>
CellResult run_cell(const SweepSpec& spec, const PriorSpec& prior, const std::vector<double>& lambdas,
                    std::int64_t cell_index, const Scorer& score) {
  CellResult res;
  std::vector<double> accs;
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    const std::uint64_t seed = cell_seed(spec.seed_base, cell_index, rep);
    try {
      const LatentPopulation pop = sample_population(prior, spec.n, seed);
      const auto denoiser = bayes_denoiser(prior);
      const std::vector<double> m0 = warm_init(pop, spec.warm_fraction, seed);
      AmpConfig cfg;
      cfg.iterations = spec.iterations;
      cfg.lambdas = lambdas;

      if (spec.degrees.empty()) {
        const SpikedViews views = sample_spiked(pop, lambdas, seed);
        const SpikedViewSet vs(views);
        accs.push_back(score(run_amp(vs, pop, *denoiser, cfg, m0), pop));
      } else {
        std::vector<LayerRates> rates;
        for (int l = 0; l < prior.num_layers; ++l)
          rates.push_back(rates_from_snr(spec.degrees[l], lambdas[l], spec.n, l));
        const MultiViewGraph g = sample_graphs(pop, rates, seed);
        accs.push_back(score(run_amp_on_graph(g, pop, *denoiser, cfg, m0), pop));
      }
    } catch (const std::exception&) {
      // recorded through the error column; the sweep continues
    }
  }
  res.ok_reps = static_cast<int>(accs.size());
  res.failed = accs.empty();
  if (!res.failed) {
    double sum = 0.0;
    for (double a : accs) sum += a;
    res.mean = sum / accs.size();
    double ss = 0.0;
    for (double a : accs) ss += (a - res.mean) * (a - res.mean);
    res.stddev = accs.size() > 1 ? std::sqrt(ss / (accs.size() - 1)) : 0.0;
  }
  return res;
}

}  // namespace

void run_phase_diagram_ml(const SweepSpec& spec, std::ostream& out, std::ostream* matrix_out) {
  spec.validate();
  if (spec.model.family != Family::Multilayer)
    throw ParameterError("run_phase_diagram_ml: model must be Multilayer");
  if (spec.model.num_layers != 2)
    throw ParameterError("run_phase_diagram_ml: the lambda1 x lambda2 grid maps to L = 2");

  const std::int64_t cells = static_cast<std::int64_t>(spec.axis1.size()) * spec.axis2.size();
  std::vector<CellResult> results(cells);
  std::vector<double> criteria(cells);

  parallel_for(cells, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t c = lo; c < hi; ++c) {
      const double l1 = spec.axis1[c / spec.axis2.size()];
      const double l2 = spec.axis2[c % spec.axis2.size()];
      results[c] = run_cell(spec, spec.model, {l1, l2}, c,
                            [&](const AmpTrajectory& traj, const LatentPopulation& pop) {
                              const LabelEstimates est = estimate_labels(traj, pop, spec.model);
                              return accuracy(est.global, pop.y);
                            });
      // theory overlay: criterion value where the formula applies
      try {
        criteria[c] = threshold_ml(Eigen::Vector2d(l1, l2), spec.model.rho).criterion_value;
      } catch (const std::exception&) {
        criteria[c] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }, /*serial_below=*/2);

  CsvWriter csv(out, sweep_spec_json(spec, "phase_ml"),
                {"lambda1", "lambda2", "mean_accuracy", "std_accuracy", "reps", "criterion", "error"});
  for (std::int64_t c = 0; c < cells; ++c) {
    csv.row({spec.axis1[c / spec.axis2.size()], spec.axis2[c % spec.axis2.size()], results[c].mean,
             results[c].stddev, static_cast<double>(results[c].ok_reps), criteria[c],
             results[c].failed ? 1.0 : 0.0});
  }
  if (matrix_out) {
    std::vector<double> means(cells);
    for (std::int64_t c = 0; c < cells; ++c) means[c] = results[c].mean;
    write_matrix_layout(*matrix_out, spec.axis1, spec.axis2, means);
  }
}

void run_phase_diagram_dyn(const SweepSpec& spec, std::ostream& out, std::ostream* matrix_out) {
  spec.validate();
  if (spec.model.family != Family::Dynamic)
    throw ParameterError("run_phase_diagram_dyn: model must be Dynamic");

  const int L = spec.model.num_layers;
  const std::int64_t cells = static_cast<std::int64_t>(spec.axis1.size()) * spec.axis2.size();
  std::vector<CellResult> results(cells);
  std::vector<double> crit_lambda(cells);

  parallel_for(cells, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t c = lo; c < hi; ++c) {
      const double rho = spec.axis1[c / spec.axis2.size()];
      const double lambda = spec.axis2[c % spec.axis2.size()];
      PriorSpec prior = PriorSpec::dynamic(L, rho);
      results[c] = run_cell(spec, prior, std::vector<double>(L, lambda), c,
                            [&](const AmpTrajectory& traj, const LatentPopulation& pop) {
                              const LabelEstimates est = estimate_labels(traj, pop, prior);
                              std::vector<std::int8_t> x1(pop.n);
                              for (std::int64_t i = 0; i < pop.n; ++i) x1[i] = pop.x_at(i, 0);
                              return accuracy(est.per_layer[0], x1);
                            });
      try {
        crit_lambda[c] = threshold_dyn(L, rho).critical_lambda;
      } catch (const std::exception&) {
        crit_lambda[c] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }, /*serial_below=*/2);

  CsvWriter csv(out, sweep_spec_json(spec, "phase_dyn"),
                {"rho", "lambda", "mean_accuracy", "std_accuracy", "reps", "critical_lambda", "error"});
  for (std::int64_t c = 0; c < cells; ++c) {
    csv.row({spec.axis1[c / spec.axis2.size()], spec.axis2[c % spec.axis2.size()], results[c].mean,
             results[c].stddev, static_cast<double>(results[c].ok_reps), crit_lambda[c],
             results[c].failed ? 1.0 : 0.0});
  }
  if (matrix_out) {
    std::vector<double> means(cells);
    for (std::int64_t c = 0; c < cells; ++c) means[c] = results[c].mean;
    write_matrix_layout(*matrix_out, spec.axis1, spec.axis2, means);
  }
}

void run_se_vs_amp(const SweepSpec& spec, const QuadratureSpec& quad, std::ostream& out) {
  spec.model.validate();
  if (spec.repetitions < 1 || spec.iterations < 1)
    throw ParameterError("run_se_vs_amp: repetitions and iterations must be >= 1");
  const int L = spec.model.num_layers;
  if (static_cast<int>(spec.axis2.size()) != L)
    throw ParameterError("run_se_vs_amp: axis2 carries the per-layer lambdas");
  const std::vector<double> lambdas = spec.axis2;
  const Eigen::VectorXd lambda_vec = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), L);

  // empirical track
  const int T = spec.iterations;
  Eigen::MatrixXd overlap_sum = Eigen::MatrixXd::Zero(T + 1, L);
  int ok = 0;
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    const std::uint64_t seed = cell_seed(spec.seed_base, 0, rep);
    const LatentPopulation pop = sample_population(spec.model, spec.n, seed);
    const auto denoiser = bayes_denoiser(spec.model);
    const std::vector<double> m0 = warm_init(pop, spec.warm_fraction, seed);
    AmpConfig cfg;
    cfg.iterations = T;
    cfg.lambdas = lambdas;
    const SpikedViews views = sample_spiked(pop, lambdas, seed);
    const SpikedViewSet vs(views);
    const AmpTrajectory traj = run_amp(vs, pop, *denoiser, cfg, m0);
    for (int t = 0; t <= T; ++t) overlap_sum.row(t) += traj.overlaps[t].transpose();
    ok += 1;
  }
  overlap_sum /= std::max(1, ok);

  // SE track, q^0 matched to the warm init overlap
  std::vector<Eigen::VectorXd> q(T + 1);
  q[0] = Eigen::VectorXd::Constant(L, spec.warm_fraction);
  for (int t = 1; t <= T; ++t)
    q[t] = se_map(spec.model, (lambda_vec.array() * q[t - 1].array()).matrix(), quad).value;

  CsvWriter csv(out, sweep_spec_json(spec, "se_vs_amp"), {"t", "layer", "overlap_mean", "se_q"});
  for (int t = 0; t <= T; ++t)
    for (int l = 0; l < L; ++l)
      csv.row({static_cast<double>(t), static_cast<double>(l), overlap_sum(t, l), q[t](l)});
}

void run_mi_curve_semi(const PriorSpec& semi_prior, const std::vector<double>& lambda_grid,
                       const QuadratureSpec& quad, std::ostream& out) {
  if (semi_prior.family != Family::Semi)
    throw ParameterError("run_mi_curve_semi: model must be Semi");
  JsonObject j;
  j.field("kind", std::string("mi_semi"))
      .field("eps_plus", semi_prior.eps_plus)
      .field("eps_minus", semi_prior.eps_minus)
      .field_array("lambdas", lambda_grid);
  CsvWriter csv(out, j.str(), {"lambda", "mi_limit", "q_star", "mmse"});
  for (double lam : lambda_grid) {
    const FreeEnergyResult r =
        maximize_g(semi_prior, Eigen::VectorXd::Constant(1, lam), quad);
    csv.row({lam, r.mi_limit, r.q_star(0), r.mmse_layers(0)});
  }
}

void run_sweep_to_file(const SweepSpec& spec, const std::string& kind, const QuadratureSpec& quad) {
  if (spec.output_path.empty()) throw ParameterError("sweep: output path required");
  const auto t0 = std::chrono::steady_clock::now();
  std::ofstream out(spec.output_path);
  if (!out) throw ParameterError("sweep: cannot open " + spec.output_path);

  std::ofstream matrix_stream;
  std::ostream* matrix_out = nullptr;
  if (!spec.matrix_output_path.empty()) {
    matrix_stream.open(spec.matrix_output_path);
    if (!matrix_stream) throw ParameterError("sweep: cannot open " + spec.matrix_output_path);
    matrix_out = &matrix_stream;
  }

  if (kind == "phase-ml")
    run_phase_diagram_ml(spec, out, matrix_out);
  else if (kind == "phase-dyn")
    run_phase_diagram_dyn(spec, out, matrix_out);
  else if (kind == "se-vs-amp")
    run_se_vs_amp(spec, quad, out);
  else
    throw ParameterError("sweep: unknown kind " + kind);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream manifest(spec.output_path + ".manifest.json");
  manifest << JsonObject()
                  .field_raw("spec", sweep_spec_json(spec, kind))
                  .field("version", std::string("mvamp 0.1.0"))
                  .field("wall_clock_seconds", secs)
                  .str()
           << "\n";
}

}  // namespace mvamp
