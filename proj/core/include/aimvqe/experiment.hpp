#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aimvqe/optimize.hpp"
#include "aimvqe/spectral.hpp"

namespace aimvqe {

// Options shared by every experiment command; mirrors the CLI flags.
struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config master seed
  int threads = 1;
};

struct ParseSummary {
  int n_terms = 0;
  int n_qubits = 0;
  bool hermitian = false;
};

// Reads an operator listing and reports its shape without running anything.
ParseSummary summarize_operator_file(const std::string& path);

struct ExactSummary {
  double energy = 0.0;
  double gap = 0.0;
  int sector = 0;
  bool degenerate = false;
  double szsz = 0.0;                // impurity-pair <Sz Sz>, sites from config
  double vector_correlation = 0.0;  // impurity-pair <S.S>
  std::string result_json;
};

struct VqeSummary {
  ConvergenceTrace trace;
  double reference_energy = 0.0;  // energy at the initial parameters
  double exact_energy = 0.0;      // ground energy of the same Hamiltonian
  Deviation deviation;            // final energy vs exact
  double szsz = 0.0;              // correlation at the final parameters
  std::string trace_csv;
  std::string result_json;
};

// One CSV row of a parameter sweep. `series` distinguishes protocols or
// categorical values inside one sweep (e.g. "depol-reoptimized",
// "targets-bath"); `value` is the numeric sweep coordinate.
struct SweepRow {
  std::string series;
  double value = 0.0;
  std::uint64_t seed = 0;
  double energy = 0.0;
  double dev_abs = 0.0;
  double dev_pct = 0.0;
  double corr = 0.0;
  double corr_dev_pct = 0.0;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  std::map<std::string, double> slopes;        // log-log fits, depol series
  std::map<std::string, double> series_means;  // mean dev_abs per series
  double reference_energy = 0.0;
  double reference_corr = 0.0;
  std::string csv_path;
  std::string result_json;
};

struct CorrelationRow {
  std::string topology;
  std::string ansatz;
  double szsz = 0.0;
  double vector_correlation = 0.0;
  double energy = 0.0;
};

struct CorrelationSummary {
  std::vector<CorrelationRow> rows;  // includes the trailing "exact" row
  double vacuum_szsz = 0.0;          // correlation of the empty register
  std::string csv_path;
  std::string result_json;
};

struct JmodelSummary {
  double coupling = 0.0;  // superexchange J at the base parameters
  double delta_from_onsite = 0.0;
  // Log-log slope of |J_exact - J_first_order| against the perturbation
  // size, one entry per noise source; ~2 when the first-order formulas are
  // accurate to quadratic order.
  std::map<std::string, double> residual_slopes;
  std::string csv_path;
  std::string result_json;
};

ExactSummary run_exact_experiment(const std::string& config_path,
                                  const RunOptions& options);
VqeSummary run_vqe_experiment(const std::string& config_path,
                              const RunOptions& options);
SweepSummary run_sweep_experiment(const std::string& config_path,
                                  const RunOptions& options);
CorrelationSummary run_correlation_experiment(const std::string& config_path,
                                              const RunOptions& options);
JmodelSummary run_jmodel_experiment(const std::string& config_path,
                                    const RunOptions& options);

// Command-line driver: aimvqe <command> [args...]. Returns the process exit
// code: 0 when the experiment ran (including reported non-convergence of a
// variational optimization), 1 for usage, config, or input-format problems,
// 2 for numerical failures.
int run_cli(int argc, const char* const* argv);

}  // namespace aimvqe
