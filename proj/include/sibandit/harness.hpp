#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "baseline.hpp"
#include "bandit.hpp"
#include "env.hpp"
#include "smooth.hpp"
#include "svg.hpp"
#include "trace.hpp"

namespace sibandit {

//! configuration problems carry field-level paths and map to exit code 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvVersionLine = "# sibandit-csv v1";

namespace cfg_detail {

using nlohmann::json;

inline void require_object(const json& j, const std::string& path)
{
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed)
{
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(path + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
T get_required(const json& j, const std::string& path, const char* key)
{
  if (!j.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <class T>
T get_optional(const json& j, const std::string& path, const char* key, T fallback)
{
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

} // namespace cfg_detail

enum class Algorithm { single_index, smooth_bandit, adaptive };

inline const char* algorithm_name(Algorithm a)
{
  switch (a) {
    case Algorithm::single_index: return "single_index";
    case Algorithm::smooth_bandit: return "smooth_bandit";
    case Algorithm::adaptive: return "adaptive";
  }
  return "?";
}

struct GeneratorParams {
  std::uint64_t seed = 7;
  int d = 4;
  int arms = 3;
  double beta = 1.5;
  GenLinkFamily link_family = GenLinkFamily::mixed;
};

//! Constants block: exactly one of beta / (beta_lo, beta_hi) must be set,
//! matching the algorithm choice. C_T empty means startup calibration.
struct ConstantsBlock {
  std::optional<double> beta;
  std::optional<double> beta_lo, beta_hi;
  double c_eps = 0.5;
  std::optional<double> c_t;
  double c_h = 1.0;   //!< C_H bandwidth constant
  double c_gap = 0.5; //!< adaptive exploration budget constant
  double c_l = 1.0;   //!< beta_est penalty constant
  double b_v = 2.0;   //!< index search-space bound
  double bin_side_scale = 2.0; //!< comparator cube-side constant
  double bin_conf_scale = 2.0; //!< comparator confidence-width constant
  MrcSearchConfig mrc;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int trials = 1;
  std::int64_t horizon = 0;
  std::optional<GeneratorParams> generator;
  std::optional<EnvironmentSpec> env_spec;
  Algorithm algorithm = Algorithm::single_index;
  ConstantsBlock constants;
  std::string output = "out";
  std::int64_t checkpoint_stride = 100;

  EnvironmentSpec resolve_environment() const
  {
    if (env_spec) return *env_spec;
    const GeneratorParams& g = *generator;
    return generate_environment(g.seed, g.d, g.arms, g.beta, g.link_family);
  }
};

namespace cfg_detail {

inline GenLinkFamily parse_link_family(const std::string& s, const std::string& path)
{
  if (s == "mixed") return GenLinkFamily::mixed;
  if (s == "power_sgn") return GenLinkFamily::power_sgn;
  if (s == "power_sgn_plus_linear") return GenLinkFamily::power_sgn_plus_linear;
  throw ConfigError(path + ": unknown link_family '" + s + "'");
}

inline LinkSpec parse_link(const json& j, const std::string& path)
{
  require_object(j, path);
  reject_unknown(j, path, {"family", "beta", "scale", "linear_coef", "table_z", "table_f"});
  LinkSpec link;
  const std::string family = get_required<std::string>(j, path, "family");
  if (family == "power_sgn") link.family = LinkSpec::Family::power_sgn;
  else if (family == "power_sgn_plus_linear") link.family = LinkSpec::Family::power_sgn_plus_linear;
  else if (family == "custom_table") link.family = LinkSpec::Family::custom_table;
  else throw ConfigError(path + ".family: unknown value '" + family + "'");
  link.beta = get_optional<double>(j, path, "beta", 1.0);
  link.scale = get_optional<double>(j, path, "scale", 1.0);
  link.linear_coef = get_optional<double>(j, path, "linear_coef", 0.0);
  link.table_z = get_optional<std::vector<double>>(j, path, "table_z", {});
  link.table_f = get_optional<std::vector<double>>(j, path, "table_f", {});
  return link;
}

inline EnvironmentSpec parse_env_spec(const json& j, const std::string& path)
{
  require_object(j, path);
  reject_unknown(j, path, {"d", "K", "indices", "links", "noise", "covariates"});
  EnvironmentSpec env;
  env.d = get_required<int>(j, path, "d");
  env.K = get_required<int>(j, path, "K");
  const auto rows = get_required<std::vector<std::vector<double>>>(j, path, "indices");
  for (const auto& row : rows) {
    Vector v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) v(static_cast<Eigen::Index>(i)) = row[i];
    env.indices.push_back(std::move(v));
  }
  if (!j.contains("links")) throw ConfigError(path + ": missing key 'links'");
  int i = 0;
  for (const auto& lj : j.at("links"))
    env.links.push_back(parse_link(lj, path + ".links[" + std::to_string(i++) + "]"));

  if (j.contains("noise")) {
    const json& nj = j.at("noise");
    require_object(nj, path + ".noise");
    reject_unknown(nj, path + ".noise", {"family", "variance"});
    const std::string family = get_optional<std::string>(nj, path + ".noise", "family", "gaussian");
    if (family == "gaussian") env.noise.family = NoiseSpec::Family::gaussian;
    else if (family == "bernoulli") env.noise.family = NoiseSpec::Family::bernoulli;
    else throw ConfigError(path + ".noise.family: unknown value '" + family + "'");
    env.noise.variance = get_optional<double>(nj, path + ".noise", "variance", 0.0);
  }
  env.covariate_law.d = env.d;
  if (j.contains("covariates")) {
    const json& cj = j.at("covariates");
    require_object(cj, path + ".covariates");
    reject_unknown(cj, path + ".covariates", {"family", "box_lo", "box_hi"});
    const std::string family =
      get_optional<std::string>(cj, path + ".covariates", "family", "truncated_gaussian_unit_ball");
    if (family == "truncated_gaussian_unit_ball")
      env.covariate_law.family = CovariateSpec::Family::truncated_gaussian_unit_ball;
    else if (family == "uniform_box")
      env.covariate_law.family = CovariateSpec::Family::uniform_box;
    else throw ConfigError(path + ".covariates.family: unknown value '" + family + "'");
    env.covariate_law.box_lo = get_optional<double>(cj, path + ".covariates", "box_lo", 0.0);
    env.covariate_law.box_hi = get_optional<double>(cj, path + ".covariates", "box_hi", 1.0);
  }
  try {
    env.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return env;
}

inline MrcSearchConfig parse_mrc(const json& j, const std::string& path, double b_v)
{
  require_object(j, path);
  reject_unknown(j, path, {"population_size", "max_generations", "restarts",
                           "mutation", "crossover", "subsample_cap"});
  MrcSearchConfig mrc;
  mrc.bound = b_v;
  mrc.population_size = get_optional<int>(j, path, "population_size", 0);
  mrc.max_generations = get_optional<int>(j, path, "max_generations", 200);
  mrc.restarts = get_optional<int>(j, path, "restarts", 2);
  mrc.mutation = get_optional<double>(j, path, "mutation", 0.7);
  mrc.crossover = get_optional<double>(j, path, "crossover", 0.9);
  if (j.contains("subsample_cap")) {
    mrc.subsample_cap = get_required<int>(j, path, "subsample_cap");
    if (*mrc.subsample_cap < 2) throw ConfigError(path + ".subsample_cap: must be >= 2");
  }
  if (mrc.population_size != 0 && mrc.population_size < 4)
    throw ConfigError(path + ".population_size: must be >= 4");
  if (mrc.max_generations < 1) throw ConfigError(path + ".max_generations: must be >= 1");
  if (mrc.restarts < 1) throw ConfigError(path + ".restarts: must be >= 1");
  return mrc;
}

} // namespace cfg_detail

inline ExperimentConfig parse_config(const nlohmann::json& j)
{
  using namespace cfg_detail;
  require_object(j, "config");
  reject_unknown(j, "config",
                 {"seed", "trials", "horizon", "environment", "algorithm",
                  "constants", "output", "checkpoint_stride"});
  ExperimentConfig cfg;
  cfg.seed = get_optional<std::uint64_t>(j, "config", "seed", 1);
  cfg.trials = get_optional<int>(j, "config", "trials", 1);
  if (cfg.trials < 1) throw ConfigError("config.trials: must be >= 1");
  cfg.horizon = get_required<std::int64_t>(j, "config", "horizon");
  if (cfg.horizon < 0) throw ConfigError("config.horizon: must be >= 0");
  cfg.output = get_optional<std::string>(j, "config", "output", "out");
  cfg.checkpoint_stride = get_optional<std::int64_t>(j, "config", "checkpoint_stride", 100);
  if (cfg.checkpoint_stride < 1) throw ConfigError("config.checkpoint_stride: must be >= 1");

  const std::string algo = get_required<std::string>(j, "config", "algorithm");
  if (algo == "single_index") cfg.algorithm = Algorithm::single_index;
  else if (algo == "smooth_bandit") cfg.algorithm = Algorithm::smooth_bandit;
  else if (algo == "adaptive") cfg.algorithm = Algorithm::adaptive;
  else throw ConfigError("config.algorithm: unknown value '" + algo + "'");

  if (!j.contains("environment")) throw ConfigError("config: missing key 'environment'");
  const json& ej = j.at("environment");
  require_object(ej, "config.environment");
  reject_unknown(ej, "config.environment", {"generator", "spec"});
  if (ej.contains("generator") == ej.contains("spec"))
    throw ConfigError("config.environment: exactly one of 'generator' or 'spec' required");
  if (ej.contains("generator")) {
    const json& gj = ej.at("generator");
    require_object(gj, "config.environment.generator");
    reject_unknown(gj, "config.environment.generator", {"seed", "d", "K", "beta", "link_family"});
    GeneratorParams g;
    g.seed = get_optional<std::uint64_t>(gj, "config.environment.generator", "seed", 7);
    g.d = get_optional<int>(gj, "config.environment.generator", "d", 4);
    g.arms = get_optional<int>(gj, "config.environment.generator", "K", 3);
    g.beta = get_required<double>(gj, "config.environment.generator", "beta");
    g.link_family = parse_link_family(
      get_optional<std::string>(gj, "config.environment.generator", "link_family", "mixed"),
      "config.environment.generator.link_family");
    cfg.generator = g;
  } else {
    cfg.env_spec = parse_env_spec(ej.at("spec"), "config.environment.spec");
  }

  if (!j.contains("constants")) throw ConfigError("config: missing key 'constants'");
  const json& cj = j.at("constants");
  require_object(cj, "config.constants");
  reject_unknown(cj, "config.constants",
                 {"beta", "beta_lo", "beta_hi", "c_eps", "C_T", "C_H", "C_gap",
                  "C_l", "B_v", "bin_side_scale", "bin_conf_scale", "mrc"});
  ConstantsBlock& k = cfg.constants;
  if (cj.contains("beta")) k.beta = get_required<double>(cj, "config.constants", "beta");
  if (cj.contains("beta_lo")) k.beta_lo = get_required<double>(cj, "config.constants", "beta_lo");
  if (cj.contains("beta_hi")) k.beta_hi = get_required<double>(cj, "config.constants", "beta_hi");
  k.c_eps = get_optional<double>(cj, "config.constants", "c_eps", 0.5);
  if (!(k.c_eps > 0.0) || k.c_eps > 0.6)
    throw ConfigError("config.constants.c_eps: must lie in (0, 0.6]");
  if (cj.contains("C_T")) {
    const json& ct = cj.at("C_T");
    if (ct.is_string()) {
      if (ct.get<std::string>() != "auto")
        throw ConfigError("config.constants.C_T: number or \"auto\"");
    } else if (ct.is_number()) {
      k.c_t = ct.get<double>();
    } else {
      throw ConfigError("config.constants.C_T: number or \"auto\"");
    }
  }
  k.c_h = get_optional<double>(cj, "config.constants", "C_H", 1.0);
  k.c_gap = get_optional<double>(cj, "config.constants", "C_gap", 0.5);
  k.c_l = get_optional<double>(cj, "config.constants", "C_l", 1.0);
  k.b_v = get_optional<double>(cj, "config.constants", "B_v", 2.0);
  k.bin_side_scale = get_optional<double>(cj, "config.constants", "bin_side_scale", 2.0);
  k.bin_conf_scale = get_optional<double>(cj, "config.constants", "bin_conf_scale", 2.0);
  if (cj.contains("mrc")) k.mrc = parse_mrc(cj.at("mrc"), "config.constants.mrc", k.b_v);
  else k.mrc.bound = k.b_v;

  const bool needs_range = cfg.algorithm == Algorithm::adaptive;
  if (needs_range) {
    if (k.beta || !k.beta_lo || !k.beta_hi)
      throw ConfigError("config.constants: adaptive runs take beta_lo and beta_hi, not beta");
  } else {
    if (!k.beta || k.beta_lo || k.beta_hi)
      throw ConfigError("config.constants: this algorithm takes beta, not a beta range");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// experiment runner

struct SummaryRow {
  std::int64_t t = 0;
  double mean_cum_regret = 0.0;
  double std_cum_regret = 0.0;
};

struct ExperimentResult {
  std::vector<std::int64_t> checkpoints;
  std::vector<SummaryRow> summary;
  std::vector<RegretTrace> traces; //!< per trial, in trial order
  std::string algorithm_label;
};

namespace run_detail {

inline RegretTrace run_one_trial(const ExperimentConfig& cfg,
                                 const EnvironmentSpec& env, int trial)
{
  const std::uint64_t trial_seed = cfg.seed + static_cast<std::uint64_t>(trial);
  const ConstantsBlock& k = cfg.constants;
  switch (cfg.algorithm) {
    case Algorithm::single_index: {
      BanditConfig bc;
      bc.beta = *k.beta;
      bc.c_eps = k.c_eps;
      bc.c_t = k.c_t;
      bc.bandwidth_const = k.c_h;
      bc.mrc = k.mrc;
      bc.seed = trial_seed;
      return run_policy(env, cfg.horizon, bc);
    }
    case Algorithm::smooth_bandit: {
      SmoothBinConfig sc;
      sc.beta = *k.beta;
      sc.c_eps = k.c_eps;
      sc.c_t = k.c_t;
      sc.side_scale = k.bin_side_scale;
      sc.conf_scale = k.bin_conf_scale;
      sc.seed = trial_seed;
      return run_smoothbandit(env, cfg.horizon, sc);
    }
    case Algorithm::adaptive: {
      SmoothnessConfig sm;
      sm.beta_lo = *k.beta_lo;
      sm.beta_hi = *k.beta_hi;
      sm.c_gap = k.c_gap;
      sm.c_l = k.c_l;
      sm.bandwidth_const = k.c_h;
      sm.mrc = k.mrc;
      sm.seed = trial_seed;
      BanditConfig proto;
      proto.c_eps = k.c_eps;
      proto.c_t = k.c_t;
      proto.bandwidth_const = k.c_h;
      proto.mrc = k.mrc;
      return run_adaptive(env, cfg.horizon, sm, proto);
    }
  }
  throw std::logic_error("run_one_trial: unreachable");
}

inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

} // namespace run_detail

inline std::vector<std::int64_t> checkpoint_times(std::int64_t horizon,
                                                  std::int64_t stride)
{
  std::vector<std::int64_t> out;
  for (std::int64_t t = stride - 1; t < horizon; t += stride) out.push_back(t);
  if (horizon > 0 && (out.empty() || out.back() != horizon - 1))
    out.push_back(horizon - 1);
  return out;
}

//! Run `trials` replicates (per-trial seed = seed + trial), aggregate, and
//! persist trace, diagnostics and summary CSVs under cfg.output. Workers
//! write into per-trial buffers merged in trial order, so the thread count
//! never changes any output byte.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1)
{
  const EnvironmentSpec env = cfg.resolve_environment();
  ExperimentResult result;
  result.algorithm_label = algorithm_name(cfg.algorithm);
  result.traces.resize(static_cast<std::size_t>(cfg.trials));

  if (threads <= 1 || cfg.trials == 1) {
    for (int trial = 0; trial < cfg.trials; ++trial)
      result.traces[static_cast<std::size_t>(trial)] =
        run_detail::run_one_trial(cfg, env, trial);
  } else {
    std::vector<std::thread> pool;
    const int workers = std::min(threads, cfg.trials);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int trial = w; trial < cfg.trials; trial += workers)
          result.traces[static_cast<std::size_t>(trial)] =
            run_detail::run_one_trial(cfg, env, trial);
      });
    for (std::thread& th : pool) th.join();
  }

  result.checkpoints = checkpoint_times(cfg.horizon, cfg.checkpoint_stride);
  for (std::int64_t t : result.checkpoints) {
    SummaryRow row;
    row.t = t;
    double sum = 0.0;
    for (const RegretTrace& trace : result.traces)
      sum += trace.rows[static_cast<std::size_t>(t)].cum_regret;
    row.mean_cum_regret = sum / cfg.trials;
    double ss = 0.0;
    for (const RegretTrace& trace : result.traces) {
      const double dev = trace.rows[static_cast<std::size_t>(t)].cum_regret - row.mean_cum_regret;
      ss += dev * dev;
    }
    row.std_cum_regret = cfg.trials > 1 ? std::sqrt(ss / (cfg.trials - 1)) : 0.0;
    result.summary.push_back(row);
  }

  // persistence
  namespace fs = std::filesystem;
  using run_detail::format_double;
  const fs::path out(cfg.output);
  fs::create_directories(out);

  std::ostringstream trace_csv;
  trace_csv << kCsvVersionLine << "\ntrial,t,arm,inst_regret,cum_regret\n";
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const RegretTrace& trace = result.traces[static_cast<std::size_t>(trial)];
    for (std::int64_t t : result.checkpoints) {
      const RegretRow& row = trace.rows[static_cast<std::size_t>(t)];
      trace_csv << trial << ',' << row.t << ',' << row.arm << ','
                << format_double(row.inst_regret) << ',' << format_double(row.cum_regret)
                << '\n';
    }
  }
  run_detail::write_file(out / "trace.csv", trace_csv.str());

  std::ostringstream diag_csv;
  diag_csv << kCsvVersionLine << "\ntrial,epoch,arm,index_error,objective\n";
  for (int trial = 0; trial < cfg.trials; ++trial)
    for (const IndexDiagRow& row : result.traces[static_cast<std::size_t>(trial)].diag)
      diag_csv << trial << ',' << row.epoch << ',' << row.arm << ','
               << format_double(row.index_error) << ',' << format_double(row.objective)
               << '\n';
  run_detail::write_file(out / "index_diag.csv", diag_csv.str());

  std::ostringstream summary_csv;
  summary_csv << kCsvVersionLine << "\nt,mean_cum_regret,std_cum_regret,algorithm\n";
  for (const SummaryRow& row : result.summary)
    summary_csv << row.t << ',' << format_double(row.mean_cum_regret) << ','
                << format_double(row.std_cum_regret) << ',' << result.algorithm_label
                << '\n';
  run_detail::write_file(out / "summary.csv", summary_csv.str());

  if (cfg.algorithm == Algorithm::adaptive) {
    std::ostringstream smooth_csv;
    smooth_csv << kCsvVersionLine << "\ntrial,beta_est,b_max,l1,l2,l3,n0\n";
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto& rec = result.traces[static_cast<std::size_t>(trial)].smoothness;
      if (!rec) continue;
      smooth_csv << trial << ',' << format_double(rec->beta_est) << ','
                 << format_double(rec->b_max) << ',' << rec->l1 << ',' << rec->l2 << ','
                 << rec->l3 << ',' << rec->n0 << '\n';
    }
    run_detail::write_file(out / "smoothness.csv", smooth_csv.str());
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV reading and plots

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  if (line != kCsvVersionLine)
    throw ConfigError(path + ": unsupported csv version line '" + line + "'");
  CsvTable table;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(s);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
  };
  if (!std::getline(in, line)) throw ConfigError(path + ": missing header");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

//! Render the regret summary (one series per algorithm label, mean with a
//! one-standard-deviation band) and, when diagnostics are supplied, the
//! per-arm mean index error by epoch. Returns the written file paths.
inline std::vector<std::string> emit_plots(const std::string& summary_csv,
                                           const std::optional<std::string>& diag_csv,
                                           const std::string& outdir)
{
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  std::vector<std::string> written;

  const CsvTable summary = read_csv(summary_csv);
  const std::vector<std::string> expect = {"t", "mean_cum_regret", "std_cum_regret",
                                           "algorithm"};
  if (summary.header != expect)
    throw ConfigError(summary_csv + ": unexpected summary header");

  std::vector<std::string> order;
  std::map<std::string, SvgSeries> by_algo;
  for (const auto& row : summary.rows) {
    if (row.size() != 4) throw ConfigError(summary_csv + ": malformed row");
    auto [it, fresh] = by_algo.try_emplace(row[3]);
    if (fresh) {
      it->second.label = row[3];
      order.push_back(row[3]);
    }
    it->second.x.push_back(std::stod(row[0]));
    it->second.y.push_back(std::stod(row[1]));
    it->second.band.push_back(std::stod(row[2]));
  }
  SvgChart regret("cumulative regret", "t", "regret");
  for (const std::string& label : order) regret.add_series(by_algo[label]);
  const fs::path regret_path = fs::path(outdir) / "regret.svg";
  run_detail::write_file(regret_path, regret.render());
  written.push_back(regret_path.string());

  if (diag_csv) {
    const CsvTable diag = read_csv(*diag_csv);
    const std::vector<std::string> expect_diag = {"trial", "epoch", "arm",
                                                  "index_error", "objective"};
    if (diag.header != expect_diag)
      throw ConfigError(*diag_csv + ": unexpected diagnostics header");
    // mean index error per (arm, epoch)
    std::map<std::pair<int, int>, std::pair<double, int>> acc;
    for (const auto& row : diag.rows) {
      const int epoch = std::stoi(row[1]);
      const int arm = std::stoi(row[2]);
      auto& slot = acc[{arm, epoch}];
      slot.first += std::stod(row[3]);
      slot.second += 1;
    }
    std::map<int, SvgSeries> per_arm;
    for (const auto& [key, slot] : acc) {
      SvgSeries& s = per_arm[key.first];
      if (s.label.empty()) s.label = "arm " + std::to_string(key.first);
      s.x.push_back(key.second);
      s.y.push_back(slot.first / slot.second);
    }
    SvgChart err("index estimation error", "epoch", "mean ||vhat - v||");
    for (auto& [arm, series] : per_arm) err.add_series(std::move(series));
    const fs::path err_path = fs::path(outdir) / "index_error.svg";
    run_detail::write_file(err_path, err.render());
    written.push_back(err_path.string());
  }
  return written;
}

} // namespace sibandit
