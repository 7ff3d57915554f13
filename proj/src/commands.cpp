#include "qi/commands.hpp"

#include "qi/fock.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qi {

namespace {

constexpr double kNominalBandwidth = 1.89e12;     // Hz
constexpr double kResolutionBandwidth = 0.977;    // Hz

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("config: value for '" + key + "' is not a number: '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v)) throw std::invalid_argument("config: value for '" + key + "' must be an integer");
  return static_cast<long long>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw std::invalid_argument("config: value for '" + key + "' is not a boolean: '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw std::invalid_argument("config: list for '" + key + "' is empty");
  return out;
}

void require_monotone(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + ": grid is empty");
  const bool up = std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>()) == grid.end();
  const bool down = std::adjacent_find(grid.begin(), grid.end(), std::less_equal<>()) == grid.end();
  if (!up && !down) throw std::invalid_argument(std::string(what) + ": grid must be strictly monotone");
}

double to_db(double v) { return v > 0.0 ? 10.0 * std::log10(v) : -std::numeric_limits<double>::infinity(); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

// Evaluates f over the grid concurrently and returns results in grid order.
template <typename T, typename F>
std::vector<T> evaluate_in_order(std::size_t count, F f) {
  std::vector<std::future<T>> futures;
  futures.reserve(count);
  for (std::size_t i = 0; i < count; ++i) futures.push_back(std::async(std::launch::async, f, i));
  std::vector<T> out;
  out.reserve(count);
  for (auto& fut : futures) out.push_back(fut.get());
  return out;
}

double rel_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

nlohmann::json params_json(const RunConfig& cfg) {
  const SystemParams& p = cfg.base;
  nlohmann::json j;
  j["N_S"] = p.n_s;
  j["kappa_S"] = p.kappa_s;
  j["kappa_I"] = p.kappa_i;
  j["kappa_extra"] = p.kappa_extra;
  j["eta_D"] = p.eta_d;
  j["N_B"] = p.n_b;
  j["N_el"] = p.n_el;
  j["G"] = p.gain;
  j["M"] = p.modes;
  j["W"] = p.bandwidth;
  j["T"] = p.duration;
  j["phi"] = p.phi;
  j["calibrated"] = cfg.calibrated;
  return j;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("log_grid: invalid range");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, t);
  }
  return g;
}

RunConfig default_config() {
  RunConfig cfg;
  SystemParams& p = cfg.base;
  p.n_s = 3e-4;
  p.kappa_s = 0.038;
  p.kappa_i = 1.0;      // calibrated
  p.kappa_extra = 0.8;
  p.eta_d = 0.84;
  p.n_b = 95.0;
  p.n_el = 11.4;        // calibrated
  p.gain = 1.0 + 7.4e-5;
  p.set_bandwidth_time(kNominalBandwidth, 1.0 / kResolutionBandwidth);  // T assumed
  p.phi = 0.0;
  cfg.kappa_grid = log_grid(0.01, 0.1, 13);
  cfg.gain_grid = log_grid(1e-6, 1e-1, 41);
  cfg.ns_list = {3e-4, 1.5e-4, 7.5e-5};
  return cfg;
}

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  SystemParams& p = cfg.base;
  auto num = [&] { return parse_double(key, value); };
  if (key == "N_S") p.n_s = num();
  else if (key == "kappa_S") p.kappa_s = num();
  else if (key == "kappa_I") p.kappa_i = num();
  else if (key == "kappa_extra") p.kappa_extra = num();
  else if (key == "eta_D") p.eta_d = num();
  else if (key == "N_B") p.n_b = num();
  else if (key == "N_el") p.n_el = num();
  else if (key == "G") p.gain = num();
  else if (key == "gain_minus_1") p.gain = 1.0 + num();
  else if (key == "phi") p.phi = num();
  else if (key == "M") {
    p.modes = num();
    p.bandwidth = 0.0;
    p.duration = 0.0;
    cfg.calibrated.erase("T");
  } else if (key == "W") p.bandwidth = num();
  else if (key == "T") p.duration = num();
  else if (key == "kappa_S_grid") cfg.kappa_grid = parse_list(key, value);
  else if (key == "gain_grid") cfg.gain_grid = parse_list(key, value);
  else if (key == "N_S_list") cfg.ns_list = parse_list(key, value);
  else if (key == "sample_rate") cfg.acquisition.sample_rate = num();
  else if (key == "bpsk_rate") cfg.acquisition.bpsk_rate = num();
  else if (key == "duration") cfg.acquisition.duration = num();
  else if (key == "rbw") cfg.acquisition.rbw = num();
  else if (key == "seed") cfg.acquisition.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "repeats") cfg.repeats = static_cast<int>(parse_int(key, value));
  else if (key == "jitter") cfg.jitter = num();
  else if (key == "histogram_bins") cfg.histogram_bins = static_cast<int>(parse_int(key, value));
  else if (key == "noiseless") cfg.acquisition.trace.noiseless = parse_bool(key, value);
  else if (key == "window") {
    const std::string w = trim(value);
    if (w == "rectangular") cfg.acquisition.spectral.window = Window::Rectangular;
    else if (w == "hann") cfg.acquisition.spectral.window = Window::Hann;
    else throw std::invalid_argument("config: window must be 'rectangular' or 'hann'");
  } else if (key == "scheme") {
    const std::string s = trim(value);
    if (s == "qi") cfg.acquisition.trace.scheme = Scheme::QuantumIllumination;
    else if (s == "ci") cfg.acquisition.trace.scheme = Scheme::ClassicalIllumination;
    else throw std::invalid_argument("config: scheme must be 'qi' or 'ci'");
  } else if (key == "truncation") cfg.truncation = static_cast<int>(parse_int(key, value));
  else if (key == "oracle_tolerance") cfg.oracle_tolerance = num();
  else if (key == "drift_tolerance") cfg.drift_tolerance = num();
  else if (key == "truncation_doubling") cfg.truncation_doubling = parse_bool(key, value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
  cfg.calibrated.erase(key);
}

void load_config_text(RunConfig& cfg, const std::string& text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    for (const auto& [key, v] : j.items()) {
      std::string value;
      if (v.is_array()) {
        for (const auto& e : v) value += (value.empty() ? "" : ",") + e.dump();
      } else if (v.is_string()) {
        value = v.get<std::string>();
      } else {
        value = v.dump();
      }
      apply_setting(cfg, key, value);
    }
    return;
  }
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  load_config_text(cfg, ss.str());
}

void finalize_config(RunConfig& cfg) {
  SystemParams& p = cfg.base;
  if (p.bandwidth > 0.0 && p.duration > 0.0) p.modes = p.bandwidth * p.duration;
  p.validate();
  require_monotone(cfg.kappa_grid, "config");
  require_monotone(cfg.gain_grid, "config");
  require_monotone(cfg.ns_list, "config");
  if (cfg.repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
  if (cfg.truncation < 4) throw std::invalid_argument("config: truncation must be >= 4");
}

void write_header(std::ostream& os, const std::string& command, const RunConfig& cfg) {
  const SystemParams& p = cfg.base;
  auto flag = [&](const char* key) { return cfg.calibrated.count(key) ? "  (calibrated/assumed)" : ""; };
  os << "# qisim " << command << '\n';
  os << std::setprecision(10);
  os << "# N_S = " << p.n_s << '\n';
  os << "# kappa_S = " << p.kappa_s << '\n';
  os << "# kappa_I = " << p.kappa_i << flag("kappa_I") << '\n';
  os << "# kappa_extra = " << p.kappa_extra << '\n';
  os << "# eta_D = " << p.eta_d << '\n';
  os << "# N_B = " << p.n_b << '\n';
  os << "# N_el = " << p.n_el << flag("N_el") << '\n';
  os << "# G - 1 = " << p.gain_minus_one() << '\n';
  os << "# M = " << p.modes << '\n';
  os << "# W = " << p.bandwidth << '\n';
  os << "# T = " << p.duration << flag("T") << '\n';
  os << "# phi = " << p.phi << '\n';
}

std::vector<Fig2Row> fig2_rows(const RunConfig& cfg) {
  for (double k : cfg.kappa_grid)
    if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("fig2: transmissivity grid value " + fmt(k) + " outside (0, 1]");
  require_monotone(cfg.kappa_grid, "fig2");
  return evaluate_in_order<Fig2Row>(cfg.kappa_grid.size(), [&](std::size_t i) {
    SystemParams p = cfg.base;
    p.kappa_s = cfg.kappa_grid[i];
    const SnrReport qi = qi_snr_exact(p);
    const SnrReport ci = ci_snr_exact(p);
    return Fig2Row{p.kappa_s, qi.snr_exact, qi.snr_asymptotic, ci.snr_asymptotic, ci.snr_exact, qi.ratio_to_ci,
                   qi.classic_margin_db};
  });
}

std::vector<Fig3Row> fig3_rows(const RunConfig& cfg) {
  for (double g : cfg.gain_grid)
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("fig3: gain grid values must be G - 1 >= 0");
  require_monotone(cfg.gain_grid, "fig3");
  std::vector<std::pair<double, double>> points;
  for (double ns : cfg.ns_list)
    for (double g : cfg.gain_grid) points.emplace_back(ns, g);
  return evaluate_in_order<Fig3Row>(points.size(), [&](std::size_t i) {
    SystemParams p = cfg.base;
    p.n_s = points[i].first;
    p.gain = 1.0 + points[i].second;
    Fig3Row row{p.n_s, points[i].second, 0.0, qi_snr_asymptotic(p), ci_snr_asymptotic(p), false};
    try {
      row.snr_qi_exact = qi_snr_exact(p).snr_exact;
    } catch (const ZeroDenominator&) {
      row.snr_qi_exact = std::numeric_limits<double>::quiet_NaN();
      row.flagged = true;
    }
    return row;
  });
}

int cmd_fig2(const RunConfig& cfg, std::ostream& out) {
  const auto rows = fig2_rows(cfg);
  if (cfg.format == OutputFormat::Json) {
    nlohmann::json j;
    j["command"] = "fig2";
    j["params"] = params_json(cfg);
    for (const auto& r : rows)
      j["rows"].push_back({{"kappa_S", r.kappa_s}, {"snr_qi_exact", r.snr_qi_exact}, {"snr_qi_exact_db", to_db(r.snr_qi_exact)},
                           {"snr_qi_asymptotic", r.snr_qi_asymptotic}, {"snr_ci", r.snr_ci}, {"snr_ci_db", to_db(r.snr_ci)},
                           {"snr_ci_exact", r.snr_ci_exact}, {"advantage", r.advantage},
                           {"classicality_margin_db", r.classicality_margin_db}});
    out << j.dump(2) << '\n';
    return 0;
  }
  write_header(out, "fig2", cfg);
  out << "kappa_S,snr_qi_exact,snr_qi_exact_db,snr_qi_asymptotic,snr_ci,snr_ci_db,snr_ci_exact,advantage,"
         "classicality_margin_db\n";
  for (const auto& r : rows)
    out << fmt(r.kappa_s) << ',' << fmt(r.snr_qi_exact) << ',' << fmt(to_db(r.snr_qi_exact)) << ','
        << fmt(r.snr_qi_asymptotic) << ',' << fmt(r.snr_ci) << ',' << fmt(to_db(r.snr_ci)) << ','
        << fmt(r.snr_ci_exact) << ',' << fmt(r.advantage) << ',' << fmt(r.classicality_margin_db) << '\n';
  return 0;
}

int cmd_fig3(const RunConfig& cfg, std::ostream& out) {
  const auto rows = fig3_rows(cfg);
  if (cfg.format == OutputFormat::Json) {
    nlohmann::json j;
    j["command"] = "fig3";
    j["params"] = params_json(cfg);
    for (const auto& r : rows)
      j["rows"].push_back({{"N_S", r.n_s}, {"gain_minus_1", r.gain_minus_1},
                           {"snr_qi_exact", r.flagged ? nlohmann::json(nullptr) : nlohmann::json(r.snr_qi_exact)},
                           {"snr_qi_asymptotic", r.snr_qi_asymptotic}, {"snr_ci_dashed", r.snr_ci_dashed},
                           {"flag", r.flagged ? "zero_denominator" : ""}});
    out << j.dump(2) << '\n';
    return 0;
  }
  write_header(out, "fig3", cfg);
  out << "N_S,gain_minus_1,snr_qi_exact,snr_qi_exact_db,snr_qi_asymptotic,snr_ci_dashed,snr_ci_dashed_db,flag\n";
  for (const auto& r : rows)
    out << fmt(r.n_s) << ',' << fmt(r.gain_minus_1) << ',' << fmt(r.snr_qi_exact) << ','
        << fmt(r.flagged ? std::nan("") : to_db(r.snr_qi_exact)) << ',' << fmt(r.snr_qi_asymptotic) << ','
        << fmt(r.snr_ci_dashed) << ',' << fmt(to_db(r.snr_ci_dashed)) << ',' << (r.flagged ? "zero_denominator" : "")
        << '\n';
  return 0;
}

std::vector<OracleComparison> oracle_comparisons(const RunConfig& cfg) {
  std::vector<OracleComparison> out;
  const double tol = cfg.oracle_tolerance;
  const int d = cfg.truncation;

  // Two-mode squeezed vacuum marginal.
  {
    const double n = 0.25;
    const auto g = two_mode_squeeze(vacuum<double>(2), 0, 1, n);
    const auto f = fock_photon_stats(fock_tmss(n, d), 0);
    out.push_back({"tmss(0.25)", "mean", photon_mean(g, 0), f.mean, rel_error(photon_mean(g, 0), f.mean), tol});
    out.push_back({"tmss(0.25)", "variance", photon_variance(g, 0), f.variance,
                   rel_error(photon_variance(g, 0), f.variance), tol});
  }
  // Single-mode squeezed vacua from a balanced split of the two-mode state.
  {
    const double n = 0.25;
    const auto g = beam_splitter(two_mode_squeeze(vacuum<double>(2), 0, 1, n), 0, 1, 0.5);
    const auto f = fock_photon_stats(
        apply_quadratic_unitary(fock_tmss(n, d + 10), {QuadraticKind::BeamSplitter, 0, 1, 0.5}), 0);
    out.push_back({"tmss(0.25)+bs(0.5)", "mean", photon_mean(g, 0), f.mean, rel_error(photon_mean(g, 0), f.mean), tol});
    out.push_back({"tmss(0.25)+bs(0.5)", "variance", photon_variance(g, 0), f.variance,
                   rel_error(photon_variance(g, 0), f.variance), tol});
  }
  // Receiver chain at desk-feasible photon numbers.
  OracleChainParams op;
  op.n_s = 0.1;
  op.n_b = 0.5;
  op.kappa_s = 0.5;
  op.kappa_i = 0.9;
  op.gain = 1.01;
  for (double phi : {0.0, std::numbers::pi}) {
    op.phi = phi;
    SystemParams sp;
    sp.n_s = op.n_s;
    sp.n_b = op.n_b;
    sp.kappa_s = op.kappa_s;
    sp.kappa_i = op.kappa_i;
    sp.gain = op.gain;
    sp.kappa_extra = 1.0;
    sp.eta_d = 1.0;
    sp.n_el = 0.0;
    sp.modes = 1.0;
    const ReceiverMoments g = qi_receiver_moments(sp, phi);
    OracleChainOptions opt;
    opt.truncation = d;
    const OracleChainResult f = fock_receiver_chain(op, opt);
    const std::string name = std::string("receiver chain phi=") + (phi == 0.0 ? "0" : "pi");
    out.push_back({name, "mean", g.mean, f.idler.mean, rel_error(g.mean, f.idler.mean), tol});
    out.push_back({name, "variance", g.variance, f.idler.variance, rel_error(g.variance, f.idler.variance), tol});
    if (cfg.truncation_doubling) {
      opt.truncation = 2 * d;
      const OracleChainResult f2 = fock_receiver_chain(op, opt);
      out.push_back({name, "mean drift (truncation x2)", f.idler.mean, f2.idler.mean,
                     rel_error(f.idler.mean, f2.idler.mean), cfg.drift_tolerance});
      out.push_back({name, "variance drift (truncation x2)", f.idler.variance, f2.idler.variance,
                     rel_error(f.idler.variance, f2.idler.variance), cfg.drift_tolerance});
    }
  }
  return out;
}

int cmd_oracle_check(const RunConfig& cfg, std::ostream& out) {
  const auto rows = oracle_comparisons(cfg);
  bool ok = true;
  if (cfg.format == OutputFormat::Json) {
    nlohmann::json j;
    for (const auto& r : rows) {
      ok = ok && r.pass();
      j["comparisons"].push_back({{"circuit", r.circuit}, {"quantity", r.quantity}, {"gaussian", r.gaussian},
                                  {"fock", r.fock}, {"rel_error", r.rel_error}, {"tolerance", r.tolerance},
                                  {"pass", r.pass()}});
    }
    j["pass"] = ok;
    out << j.dump(2) << '\n';
  } else {
    out << "# qisim oracle-check, truncation " << cfg.truncation << '\n';
    out << "circuit,quantity,gaussian,fock,rel_error,tolerance,status\n";
    for (const auto& r : rows) {
      ok = ok && r.pass();
      out << r.circuit << ',' << r.quantity << ',' << std::setprecision(15) << r.gaussian << ',' << r.fock << ','
          << std::setprecision(3) << r.rel_error << ',' << r.tolerance << ',' << (r.pass() ? "PASS" : "FAIL") << '\n';
    }
  }
  return ok ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg, std::ostream* trace_out, std::ostream& spa_out) {
  const AcquisitionConfig& acq = cfg.acquisition;
  SpaResult spa;
  if (cfg.repeats >= 2) {
    spa = repeat_protocol(cfg.base, acq, cfg.repeats, cfg.jitter);
  }
  const TraceRecord trace =
      simulate_trace(cfg.base, acq.sample_rate, acq.bpsk_rate, acq.duration, acq.seed, acq.trace);
  if (cfg.repeats < 2) spa = spectral_peak_snr(trace, acq.bpsk_rate, acq.rbw, acq.spectral);
  if (trace_out) {
    write_header(*trace_out, "simulate", cfg);
    *trace_out << std::setprecision(10) << "# sample_rate = " << acq.sample_rate << "\n# bpsk_rate = " << acq.bpsk_rate
               << "\n# duration = " << acq.duration << "\n# seed = " << acq.seed << "\n# scheme = "
               << (acq.trace.scheme == Scheme::QuantumIllumination ? "qi" : "ci") << '\n';
    write_trace_csv(*trace_out, trace);
  }
  nlohmann::json j = nlohmann::json::parse(to_json_string(spa));
  const ImaHistogram h = ima_histogram({trace}, cfg.histogram_bins);
  j["max_ima"] = h.max_ima;
  j["seed"] = acq.seed;
  j["params"] = params_json(cfg);
  spa_out << j.dump(2) << '\n';
  return 0;
}

int cmd_classicality(const RunConfig& cfg, std::ostream& out) {
  nlohmann::json j;
  j["margin_db"] = classicality_margin_db(cfg.base);
  j["bg_to_return_db"] = background_to_return_db(cfg.base);
  j["entanglement_broken"] = j["margin_db"].get<double>() > 0.0;
  j["params"] = params_json(cfg);
  if (cfg.format == OutputFormat::Csv) {
    write_header(out, "classicality", cfg);
    out << "margin_db,bg_to_return_db,entanglement_broken\n"
        << fmt(j["margin_db"].get<double>()) << ',' << fmt(j["bg_to_return_db"].get<double>()) << ','
        << (j["entanglement_broken"].get<bool>() ? "true" : "false") << '\n';
  } else {
    out << j.dump(2) << '\n';
  }
  return 0;
}

}  // namespace qi
