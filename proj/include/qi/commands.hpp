#ifndef QI_COMMANDS_HPP
#define QI_COMMANDS_HPP

// Experiment runner behind the qisim tool. Each command reads a resolved
// RunConfig and writes its artifact to a stream; the return value is the
// process exit code (0 success, 1 check failure). Invalid input throws
// std::invalid_argument, which the tool maps to exit code 2.

#include "qi/measurement.hpp"
#include "qi/sensing.hpp"

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace qi {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  SystemParams base;
  std::vector<double> kappa_grid;  // fig2 sweep over kappa_S
  std::vector<double> gain_grid;   // fig3 sweep over G - 1
  std::vector<double> ns_list;  // fig3 brightness values
  AcquisitionConfig acquisition;
  int repeats = 1;
  double jitter = 0.03;
  int histogram_bins = 50;
  int truncation = 30;
  double oracle_tolerance = 1e-6;
  double drift_tolerance = 1e-8;
  bool truncation_doubling = true;
  OutputFormat format = OutputFormat::Csv;
  // Keys whose values are calibrated or assumed rather than taken from the
  // nominal operating point; cleared when the user overrides them.
  std::set<std::string> calibrated{"kappa_I", "N_el", "T"};
};

/// Nominal values for the transmissivity and gain sweeps, with the
/// calibrated idler storage transmissivity and electronics noise.
RunConfig default_config();

/// Applies one key=value setting. Unknown keys and malformed values throw
/// std::invalid_argument.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a config file: a JSON object, or plain `key = value` lines with `#` comments.
void load_config_file(RunConfig& cfg, const std::string& path);
void load_config_text(RunConfig& cfg, const std::string& text);

/// Checks derived invariants (M = T W, parameter ranges, grid monotone).
void finalize_config(RunConfig& cfg);

/// '#'-prefixed lines echoing the resolved parameters.
void write_header(std::ostream& os, const std::string& command, const RunConfig& cfg);

struct Fig2Row {
  double kappa_s;
  double snr_qi_exact;
  double snr_qi_asymptotic;
  double snr_ci;        // classical asymptote
  double snr_ci_exact;
  double advantage;
  double classicality_margin_db;
};

struct Fig3Row {
  double n_s;
  double gain_minus_1;
  double snr_qi_exact;  // NaN when flagged
  double snr_qi_asymptotic;
  double snr_ci_dashed;
  bool flagged;         // zero denominator
};

std::vector<Fig2Row> fig2_rows(const RunConfig& cfg);
std::vector<Fig3Row> fig3_rows(const RunConfig& cfg);

int cmd_fig2(const RunConfig& cfg, std::ostream& out);
int cmd_fig3(const RunConfig& cfg, std::ostream& out);

struct OracleComparison {
  std::string circuit;
  std::string quantity;
  double gaussian;
  double fock;
  double rel_error;
  double tolerance;
  bool pass() const { return rel_error <= tolerance; }
};

/// Gaussian-moment versus Fock-space comparisons: squeezed-vacuum marginals
/// and the full receiver chain at phi = 0 and pi, plus truncation-doubling drift.
std::vector<OracleComparison> oracle_comparisons(const RunConfig& cfg);
int cmd_oracle_check(const RunConfig& cfg, std::ostream& out);

/// Writes the trace CSV to `trace_out` (when non-null) and the SPA JSON to `spa_out`.
int cmd_simulate(const RunConfig& cfg, std::ostream* trace_out, std::ostream& spa_out);

int cmd_classicality(const RunConfig& cfg, std::ostream& out);

/// Log-spaced grid of `count` points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace qi

#endif  // QI_COMMANDS_HPP
