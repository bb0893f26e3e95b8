#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaitvibe/errors.hpp"
#include "gaitvibe/evaluation.hpp"
#include "gaitvibe/fusion.hpp"
#include "gaitvibe/gait.hpp"
#include "gaitvibe/io.hpp"
#include "gaitvibe/locate.hpp"
#include "gaitvibe/profile_io.hpp"
#include "gaitvibe/run_config.hpp"
#include "gaitvibe/simfloor.hpp"

namespace fs = std::filesystem;
using namespace gaitvibe;
using nlohmann::json;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

struct Globals
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

RunConfig load(const Globals& g)
{
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.seed)
    c.seed = *g.seed;
  return c;
}

fs::path out_dir(const Globals& g, const RunConfig& c)
{
  fs::path dir = g.out != "." || c.paths.out.empty() ? fs::path(g.out) : fs::path(c.paths.out);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> expand(const std::vector<std::string>& patterns)
{
  std::vector<std::string> out;
  for (const auto& p : patterns)
  {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i)
        out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc == GLOB_NOMATCH && fs::exists(p))
      out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// X.trace.csv -> X
std::string stem_of(const fs::path& trace)
{
  std::string name = trace.filename().string();
  const std::string suffix = ".trace.csv";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    return name.substr(0, name.size() - suffix.size());
  return trace.stem().string();
}

fs::path sibling(const fs::path& trace, const std::string& suffix)
{
  return trace.parent_path() / (stem_of(trace) + suffix);
}

int cmd_simulate(const Globals& g, const std::string& suite, const std::string& scenario_file)
{
  const RunConfig cfg = load(g);
  std::vector<sim::SimScenario> scenarios;
  if (!scenario_file.empty())
  {
    json doc;
    try
    {
      doc = json::parse(io::read_text(scenario_file));
    }
    catch (const json::parse_error& e)
    {
      throw ScenarioError("scenario " + scenario_file + " is not valid JSON: " + e.what());
    }
    if (doc.is_array())
      for (const auto& d : doc)
        scenarios.push_back(sim::scenario_from_json(d));
    else
      scenarios.push_back(sim::scenario_from_json(doc));
  }
  else
    scenarios = sim::scenario_suite(suite.empty() ? "constant" : suite);

  const fs::path dir = out_dir(g, cfg);
  for (std::size_t k = 0; k < scenarios.size(); ++k)
  {
    auto sc = scenarios[k];
    if (g.seed)
      sc.seed = *g.seed + k;
    const auto res = sim::synthesize(sc);
    char name[64];
    std::snprintf(name, sizeof name, "_trial%02d", sc.trial_id);
    const std::string stem = sc.name + name;
    io::write_trace(dir / (stem + ".trace.csv"), res.record);
    io::write_events(dir / (stem + ".events.csv"), res.events);
    io::write_truth(dir / (stem + ".truth.csv"), res.truth);
    std::cout << stem << ": " << res.events.size() << " footsteps\n";
  }
  return kExitOk;
}

int cmd_calibrate(const Globals& g, const std::vector<std::string>& patterns, std::string profile_path)
{
  RunConfig cfg = load(g);
  std::vector<std::string> files = expand(patterns);
  if (files.empty() && !cfg.paths.traces.empty())
    files = expand({cfg.paths.traces});
  std::vector<Trial> trials;
  for (const auto& f : files)
  {
    if (f.find(".trace.csv") == std::string::npos)
      continue;
    const fs::path events = sibling(f, ".events.csv");
    if (!fs::exists(events))
      throw InputError("no event file " + events.string() + " for " + f);
    trials.push_back({io::read_trace(f), io::read_events(events)});
  }
  if (trials.empty())
    throw InputError("no trace files matched");

  const auto profile = calibrate(trials, cfg.calibration());
  if (profile_path.empty())
    profile_path = cfg.paths.profile.empty() ? (out_dir(g, cfg) / "profile.json").string() : cfg.paths.profile;
  else if (fs::path(profile_path).has_parent_path())
    fs::create_directories(fs::path(profile_path).parent_path());
  save_profile(profile_path, profile);
  const auto& m = profile.metadata;
  std::cout << "calibrated on " << m.trial_count << " trials, " << m.matched_footsteps << "/"
            << m.footstep_count << " footsteps, " << m.velocity_sample_count
            << " velocity samples, RMSE " << m.velocity_rmse << " m/s, CI width max " << m.ci_width_max
            << " m/s" << (m.needs_more_trials ? " (needs more trials)" : "") << "\n";
  for (const auto& w : m.warnings)
    std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_localize(const Globals& g, std::string trace, std::string profile_path, bool with_baseline)
{
  RunConfig cfg = load(g);
  if (trace.empty())
    trace = cfg.paths.traces;
  if (profile_path.empty())
    profile_path = cfg.paths.profile;
  if (trace.empty() || profile_path.empty())
    throw InputError("localize needs --trace and --profile");
  if (!fs::exists(profile_path))
    throw InputError("profile " + profile_path + " does not exist");
  const auto profile = load_profile(profile_path);
  const auto record = io::read_trace(trace);

  auto opts = cfg.tracking();
  const auto run = eval::run_trial(record, {}, profile, opts, cfg.baseline());
  const fs::path dir = out_dir(g, cfg);
  const std::string stem = stem_of(trace);
  io::write_localization(dir / (stem + ".loc.csv"), run.enhanced);
  if (with_baseline)
    io::write_localization(dir / (stem + ".baseline.loc.csv"), run.baseline);

  json report;
  report["footsteps"] = run.enhanced.size();
  json failures = json::array();
  for (const auto& f : run.failures)
    failures.push_back({{"seq", f.seq}, {"segment_time_s", f.segment_time}, {"reason", f.reason}});
  report["failures"] = failures;
  try
  {
    report["gait"] = eval::gait_report_json(spatial_params(eval::to_gait(run.enhanced)));
  }
  catch (const DegenerateGeometry& e)
  {
    report["gait"] = nullptr;
    report["gait_note"] = e.what();
  }
  io::write_text(dir / (stem + ".gait.json"), report.dump(2) + "\n");
  std::cout << stem << ": " << run.enhanced.size() << " footsteps localized, " << run.failures.size()
            << " skipped\n";
  return kExitOk;
}

void write_plots(const fs::path& dir, const eval::LocalizationMetrics& enh,
                 const std::optional<eval::LocalizationMetrics>& base,
                 const std::optional<GaitComparison>& gait)
{
  std::vector<eval::BarSeries> bars{{"enhanced", enh.mae, enh.std}};
  if (base)
    bars.push_back({"baseline", base->mae, base->std});
  io::write_text(dir / "localization_error.svg",
                 eval::bar_chart_svg("Footstep localization error", "error (m)", bars));
  if (gait)
  {
    std::vector<eval::BarSeries> g{{"step len", gait->step_length.mape, 0.0},
                                   {"stride len", gait->stride_length.mape, 0.0},
                                   {"step width", gait->step_width.mape, 0.0},
                                   {"step angle", gait->step_angle.mape, 0.0},
                                   {"speed", gait->walking_speed.mape, 0.0}};
    io::write_text(dir / "gait_mape.svg", eval::bar_chart_svg("Gait parameter error", "MAPE (%)", g));
  }
}

json comparison_table(const eval::LocalizationMetrics& enh, const eval::LocalizationMetrics& base)
{
  return json::array({{{"method", "enhanced"}, {"mae_m", enh.mae}, {"median_m", enh.median}, {"count", enh.count}},
                      {{"method", "baseline"}, {"mae_m", base.mae}, {"median_m", base.median}, {"count", base.count}},
                      {{"method", "ratio"},
                       {"mae", base.mae > 0 ? enh.mae / base.mae : 0.0},
                       {"median", base.median > 0 ? enh.median / base.median : 0.0}}});
}

int cmd_eval(const Globals& g, const std::vector<std::string>& estimates, const std::vector<std::string>& truths,
             const std::vector<std::string>& baselines, const std::string& suite, int calibration_trials)
{
  RunConfig cfg = load(g);
  const fs::path dir = out_dir(g, cfg);
  json report;

  if (!suite.empty())
  {
    const auto rep = eval::evaluate_suite(suite, calibration_trials, cfg.tracking(), cfg.calibration());
    report["suite"] = suite;
    report["calibration_trials"] = calibration_trials;
    report["enhanced"] = eval::metrics_json(rep.enhanced);
    report["baseline"] = eval::metrics_json(rep.baseline);
    report["comparison"] = comparison_table(rep.enhanced, rep.baseline);
    if (rep.gait_enhanced)
      report["gait_enhanced"] = eval::gait_json(*rep.gait_enhanced);
    if (rep.gait_baseline)
      report["gait_baseline"] = eval::gait_json(*rep.gait_baseline);
    write_plots(dir, rep.enhanced, rep.baseline, rep.gait_enhanced);
  }
  else
  {
    const auto est_files = expand(estimates);
    const auto truth_files = expand(truths);
    const auto base_files = expand(baselines);
    if (est_files.empty() || truth_files.empty())
      throw InputError("eval needs --estimates and --truth files (or --suite)");
    if (est_files.size() != truth_files.size())
      throw InputError("eval needs one truth file per estimate file");
    if (!base_files.empty() && base_files.size() != est_files.size())
      throw InputError("eval needs one baseline file per estimate file");

    eval::LocalizationMetrics enh, base;
    std::optional<GaitComparison> gait;
    for (std::size_t i = 0; i < est_files.size(); ++i)
    {
      const auto est = io::read_localization(est_files[i]);
      const auto truth = io::read_events(truth_files[i]);
      const auto m = eval::localization_metrics(est, truth);
      enh.errors.insert(enh.errors.end(), m.errors.begin(), m.errors.end());
      enh.missed += m.missed;
      enh.spurious += m.spurious;
      if (!base_files.empty())
      {
        const auto b = eval::localization_metrics(io::read_localization(base_files[i]), truth);
        base.errors.insert(base.errors.end(), b.errors.begin(), b.errors.end());
        base.missed += b.missed;
        base.spurious += b.spurious;
      }
      if (i == 0 && est_files.size() == 1)
        gait = compare_params(eval::to_gait(est), eval::to_gait(truth));
    }
    const auto finish = [](eval::LocalizationMetrics& m) {
      const int missed = m.missed, spurious = m.spurious;
      m.count = static_cast<int>(m.errors.size());
      if (m.count == 0)
        throw EvalError("no estimated footstep matched the truth");
      double s = 0.0;
      for (double e : m.errors)
        s += e;
      m.mae = s / m.count;
      double v = 0.0;
      for (double e : m.errors)
        v += (e - m.mae) * (e - m.mae);
      m.std = std::sqrt(v / m.count);
      m.median = eval::median(m.errors);
      m.p90 = eval::percentile(m.errors, 0.9);
      m.max = *std::max_element(m.errors.begin(), m.errors.end());
      m.missed = missed;
      m.spurious = spurious;
    };
    finish(enh);
    report["enhanced"] = eval::metrics_json(enh);
    std::optional<eval::LocalizationMetrics> base_opt;
    if (!base_files.empty())
    {
      finish(base);
      report["baseline"] = eval::metrics_json(base);
      report["comparison"] = comparison_table(enh, base);
      base_opt = base;
    }
    if (gait)
      report["gait"] = eval::gait_json(*gait);
    write_plots(dir, enh, base_opt, gait);
  }

  io::write_text(dir / "metrics.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Footstep localization and gait analysis from floor vibration"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "run configuration (JSON)");
  app.add_option("--seed", g.seed, "random seed override");
  app.add_option("--out", g.out, "output directory");

  std::string suite, scenario;
  auto* sim = app.add_subcommand("simulate", "write trace, event and truth files for a suite or scenario");
  auto* suite_opt = sim->add_option("--suite", suite, "constant | polynomial | columns | snr_sweep (default constant)");
  sim->add_option("--scenario", scenario, "scenario file (JSON object or array)")->excludes(suite_opt);

  std::vector<std::string> trial_globs;
  std::string profile_out;
  auto* cal = app.add_subcommand("calibrate", "fit a calibration profile from paired trials");
  cal->add_option("trials", trial_globs, "trace files or glob patterns (X.trace.csv paired with X.events.csv)");
  cal->add_option("--profile", profile_out, "profile output path (default <out>/profile.json)");

  std::string trace, profile_in;
  bool with_baseline = false;
  auto* loc = app.add_subcommand("localize", "localize footsteps and report gait parameters");
  loc->add_option("--trace", trace, "trace file");
  loc->add_option("--profile", profile_in, "calibration profile");
  loc->add_flag("--baseline", with_baseline, "also write constant-velocity baseline estimates");

  std::vector<std::string> est, truth, base;
  std::string eval_suite;
  int calib_trials = 3;
  auto* ev = app.add_subcommand("eval", "compare estimates with ground truth");
  ev->add_option("--estimates", est, "localization CSV files");
  ev->add_option("--truth", truth, "event CSV files with true footsteps");
  ev->add_option("--baseline", base, "baseline localization CSV files");
  ev->add_option("--suite", eval_suite, "run the full pipeline on a simulator suite");
  ev->add_option("--calibration-trials", calib_trials, "suite trials used for calibration");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try
  {
    if (sim->parsed())
      return cmd_simulate(g, suite, scenario);
    if (cal->parsed())
      return cmd_calibrate(g, trial_globs, profile_out);
    if (loc->parsed())
      return cmd_localize(g, trace, profile_in, with_baseline);
    if (ev->parsed())
      return cmd_eval(g, est, truth, base, eval_suite, calib_trials);
  }
  catch (const InputClass& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  catch (const std::exception& e)
  {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
