#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mvamp/prior.hpp"
#include "mvamp/quadrature.hpp"

namespace mvamp {

// One experiment sweep. axis1 x axis2 forms the cell grid: (lambda1, lambda2)
// for the multilayer phase diagram, (rho, lambda) for the dynamic one.
// Empty `degrees` means spiked-matrix views; otherwise per-layer average
// degrees for sparse graphs. Per-cell seeds derive from (seed_base, cell
// index, repetition index) only, so any cell can be recomputed in isolation.
struct SweepSpec {
  PriorSpec model;
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::int64_t n = 4000;
  std::vector<double> degrees;
  int repetitions = 5;
  int iterations = 100;
  double warm_fraction = 0.1;
  std::uint64_t seed_base = 0;
  std::string output_path;
  std::string matrix_output_path;  // optional gnuplot matrix-mode dump

  void validate() const;
};

std::uint64_t cell_seed(std::uint64_t seed_base, std::int64_t cell_index, int repetition);

// CSV: (lambda1, lambda2, mean_accuracy, std_accuracy, reps, criterion, error).
// Accuracy is the global-membership recovery rate; `criterion` carries the
// threshold_ml value for the cell (the theory overlay), `error` is 1 when
// every repetition of the cell failed (accuracy columns then hold nan).
void run_phase_diagram_ml(const SweepSpec& spec, std::ostream& out,
                          std::ostream* matrix_out = nullptr);

// CSV: (rho, lambda, mean_accuracy, std_accuracy, reps, critical_lambda, error)
// with first-moment accuracy.
void run_phase_diagram_dyn(const SweepSpec& spec, std::ostream& out,
                           std::ostream* matrix_out = nullptr);

// CSV: (t, layer, overlap_mean, se_q). Empirical overlaps averaged over
// `reps` spiked-view runs; the SE track starts from q^0 = warm_fraction.
void run_se_vs_amp(const SweepSpec& spec, const QuadratureSpec& quad, std::ostream& out);

// CSV: (lambda, mi_limit, q_star, mmse).
void run_mi_curve_semi(const PriorSpec& semi_prior, const std::vector<double>& lambda_grid,
                       const QuadratureSpec& quad, std::ostream& out);

// Convenience wrappers writing spec.output_path plus a run manifest at
// output_path + ".manifest.json" (spec, seeds, version, wall clock).
void run_sweep_to_file(const SweepSpec& spec, const std::string& kind, const QuadratureSpec& quad);

std::string sweep_spec_json(const SweepSpec& spec, const std::string& kind);

}  // namespace mvamp
