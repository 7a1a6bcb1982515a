// sibandit: simulation and regression CLI.
//
//   sibandit simulate   --config cfg.json [--trials N] [--seed S] [--threads T] [--out DIR]
//   sibandit regress    --data data.csv --beta B [--seed S] [--cross-fit] [--out DIR]
//   sibandit smoothness --config cfg.json [--out DIR]
//   sibandit plot       --summary summary.csv [--diag index_diag.csv] [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>
#include <sibandit/harness.hpp>
#include <sibandit/sireg.hpp>

namespace {

using namespace sibandit;

std::vector<LabeledSample> read_samples_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  std::vector<LabeledSample> samples;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::string tok;
    std::istringstream ss(line);
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) { // header row
        first = false;
        continue;
      }
      throw ConfigError(path + ": non-numeric row");
    }
    first = false;
    if (fields.size() < 2) throw ConfigError(path + ": rows need x1..xd,y");
    LabeledSample s;
    s.x = Vector(static_cast<Eigen::Index>(fields.size() - 1));
    for (std::size_t i = 0; i + 1 < fields.size(); ++i)
      s.x(static_cast<Eigen::Index>(i)) = fields[i];
    s.y = fields.back();
    if (!samples.empty() && samples.front().x.size() != s.x.size())
      throw ConfigError(path + ": inconsistent column count");
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ConfigError(path + ": no data rows");
  return samples;
}

int cmd_simulate(const std::string& config_path, std::optional<int> trials,
                 std::optional<std::uint64_t> seed, int threads,
                 std::optional<std::string> out)
{
  ExperimentConfig cfg = load_config(config_path);
  if (trials) {
    if (*trials < 1) throw ConfigError("--trials: must be >= 1");
    cfg.trials = *trials;
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.output = *out;
  const ExperimentResult result = run_experiment(cfg, threads);
  std::cout << "algorithm=" << result.algorithm_label << " trials=" << cfg.trials
            << " horizon=" << cfg.horizon;
  if (!result.summary.empty())
    std::cout << " terminal_mean_regret="
              << result.summary.back().mean_cum_regret;
  std::cout << "\nwrote " << cfg.output << "/{trace,index_diag,summary";
  if (cfg.algorithm == Algorithm::adaptive) std::cout << ",smoothness";
  std::cout << "}.csv\n";
  return 0;
}

int cmd_regress(const std::string& data_path, double beta, std::uint64_t seed,
                bool cross_fit, const std::string& out)
{
  const std::vector<LabeledSample> samples = read_samples_csv(data_path);
  SiregOptions opt;
  opt.beta = beta;
  opt.seed = seed;
  opt.cross_fit = cross_fit;

  // direction probe plus optimizer trace for diagnostics
  MrcSearchConfig probe = opt.mrc;
  probe.seed = seed;
  opt.direction = choose_direction(samples, probe);
  DeTrace mrc_trace;
  opt.mrc_trace = &mrc_trace;
  const RewardEstimator est = fit_sireg(samples, opt);

  namespace fs = std::filesystem;
  fs::create_directories(out);

  std::ostringstream index_csv;
  index_csv << kCsvVersionLine << "\ncoordinate,value\n";
  for (Eigen::Index i = 0; i < est.index().v.size(); ++i)
    index_csv << i << ',' << run_detail::format_double(est.index().v(i)) << '\n';
  run_detail::write_file(fs::path(out) / "index.csv", index_csv.str());

  const auto [lo, hi] = est.evaluable_region();
  std::ostringstream grid_csv;
  grid_csv << kCsvVersionLine << "\nz,link_estimate\n";
  const int grid_points = 200;
  for (int i = 0; i <= grid_points; ++i) {
    const double z = lo + (hi - lo) * i / grid_points;
    grid_csv << run_detail::format_double(z) << ','
             << run_detail::format_double(est.link().fit_predict(z).value) << '\n';
  }
  run_detail::write_file(fs::path(out) / "link_grid.csv", grid_csv.str());

  nlohmann::json diag;
  diag["n"] = samples.size();
  diag["d"] = samples.front().x.size();
  diag["beta"] = beta;
  diag["degree"] = floor_strict(beta);
  diag["bandwidth"] = est.bandwidth();
  diag["objective"] = est.index().objective_value;
  diag["direction"] = est.index().direction == Direction::increasing ? "increasing"
                                                                     : "decreasing";
  diag["evaluable_region"] = {lo, hi};
  diag["cross_fit"] = cross_fit;
  run_detail::write_file(fs::path(out) / "diagnostics.json", diag.dump(2) + "\n");

  std::ostringstream trace_csv;
  trace_csv << kCsvVersionLine << "\ngeneration,best_objective\n";
  for (const auto& [generation, best] : mrc_trace)
    trace_csv << generation << ',' << run_detail::format_double(best) << '\n';
  run_detail::write_file(fs::path(out) / "mrc_trace.csv", trace_csv.str());

  std::cout << "fitted index on n=" << samples.size() << " samples; objective="
            << est.index().objective_value << "\nwrote " << out
            << "/{index.csv,link_grid.csv,diagnostics.json,mrc_trace.csv}\n";
  return 0;
}

int cmd_smoothness(const std::string& config_path, std::optional<std::string> out)
{
  const ExperimentConfig cfg = load_config(config_path);
  if (cfg.algorithm != Algorithm::adaptive)
    throw ConfigError("smoothness needs an adaptive config (beta_lo/beta_hi)");
  const EnvironmentSpec env = cfg.resolve_environment();
  SmoothnessConfig sm;
  sm.beta_lo = *cfg.constants.beta_lo;
  sm.beta_hi = *cfg.constants.beta_hi;
  sm.c_gap = cfg.constants.c_gap;
  sm.c_l = cfg.constants.c_l;
  sm.bandwidth_const = cfg.constants.c_h;
  sm.mrc = cfg.constants.mrc;
  sm.seed = cfg.seed;
  const SmoothnessEstimate est = estimate_smoothness(env, cfg.horizon, sm);

  const std::string outdir = out.value_or(cfg.output);
  namespace fs = std::filesystem;
  fs::create_directories(outdir);

  nlohmann::json j;
  j["beta_est"] = est.beta_est;
  j["b_max"] = est.b_max;
  j["l1"] = est.l1;
  j["l2"] = est.l2;
  j["l3"] = est.l3;
  j["N0"] = est.n0;
  j["budget_capped"] = est.budget_capped;
  j["zero_discrepancy"] = est.zero_discrepancy;
  j["theory_warning"] = est.theory_warning;
  run_detail::write_file(fs::path(outdir) / "smoothness.json", j.dump(2) + "\n");

  std::ostringstream bins_csv;
  bins_csv << kCsvVersionLine << "\narm,bin,lo,hi,count,max_discrepancy\n";
  for (const BinDiag& bin : est.bins)
    bins_csv << bin.arm << ',' << bin.bin << ',' << run_detail::format_double(bin.lo)
             << ',' << run_detail::format_double(bin.hi) << ',' << bin.count << ','
             << run_detail::format_double(bin.max_discrepancy) << '\n';
  run_detail::write_file(fs::path(outdir) / "bins.csv", bins_csv.str());

  if (est.theory_warning)
    std::cerr << "warning: beta_hi <= 2/(beta_lo ^ (1 - beta_lo)); estimation "
                 "guarantees may not apply\n";
  if (est.budget_capped)
    std::cerr << "warning: exploration budget capped at horizon/(4K)\n";
  std::cout << "beta_est=" << est.beta_est << " b_max=" << est.b_max << " N0=" << est.n0
            << "\nwrote " << outdir << "/{smoothness.json,bins.csv}\n";
  return 0;
}

int cmd_plot(const std::string& summary, std::optional<std::string> diag,
             const std::string& out)
{
  const std::vector<std::string> files = emit_plots(summary, diag, out);
  for (const std::string& f : files) std::cout << "wrote " << f << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"single-index contextual bandit simulator"};
  app.require_subcommand(1);

  std::string config_path, data_path, summary_path, out_dir = "out";
  std::optional<std::string> out_opt, diag_opt;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed_opt;
  std::uint64_t seed = 0;
  int threads = 1;
  double beta = 1.5;
  bool cross_fit = false;

  CLI::App* simulate = app.add_subcommand("simulate", "run a configured experiment");
  simulate->add_option("--config", config_path, "experiment config (json)")->required();
  simulate->add_option("--trials", trials, "override trial count");
  simulate->add_option("--seed", seed_opt, "override master seed");
  simulate->add_option("--threads", threads, "worker threads for trials");
  simulate->add_option("--out", out_opt, "override output directory");

  CLI::App* regress = app.add_subcommand("regress", "offline single-index regression");
  regress->add_option("--data", data_path, "csv of x1..xd,y")->required();
  regress->add_option("--beta", beta, "link smoothness level")->required();
  regress->add_option("--seed", seed, "optimizer seed");
  regress->add_flag("--cross-fit", cross_fit, "average the swapped-split fit");
  regress->add_option("--out", out_dir, "output directory");

  CLI::App* smoothness = app.add_subcommand("smoothness", "standalone smoothness estimation");
  smoothness->add_option("--config", config_path, "adaptive config (json)")->required();
  smoothness->add_option("--out", out_opt, "output directory");

  CLI::App* plot = app.add_subcommand("plot", "render summary csv to svg");
  plot->add_option("--summary", summary_path, "summary.csv")->required();
  plot->add_option("--diag", diag_opt, "index_diag.csv for the error plot");
  plot->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, trials, seed_opt, threads, out_opt);
    if (regress->parsed())
      return cmd_regress(data_path, beta, seed, cross_fit, out_dir);
    if (smoothness->parsed()) return cmd_smoothness(config_path, out_opt);
    if (plot->parsed()) return cmd_plot(summary_path, diag_opt, out_dir);
  } catch (const sibandit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
