#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/gait.hpp"
#include "gaitvibe/locate.hpp"
#include "gaitvibe/simfloor.hpp"

// Metrics shared by the eval command and the acceptance harness.
namespace gaitvibe::eval
{

struct LocalizationMetrics
{
  int count = 0;
  int missed = 0;
  int spurious = 0;
  double mae = 0.0;
  double std = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  std::vector<double> errors;
};

double median(std::vector<double> v);
double percentile(std::vector<double> v, double q);

// Errors of estimates matched to true strikes by nearest time.
LocalizationMetrics localization_metrics(const std::vector<LocalizedFootstep>& estimates,
                                         const std::vector<FootstepEvent>& truth,
                                         double max_gap = kMatchGapS);

std::vector<GaitStep> to_gait(const std::vector<LocalizedFootstep>& steps);
std::vector<GaitStep> to_gait(const std::vector<FootstepEvent>& events);

struct TrialRun
{
  int trial_id = 0;
  std::vector<FootstepEvent> truth;
  std::vector<LocalizedFootstep> enhanced;
  std::vector<LocalizedFootstep> baseline;
  std::vector<StepFailure> failures;
};

// Enhanced tracking plus the constant-velocity baseline on the same segments.
TrialRun run_trial(const VibrationRecord& record, const std::vector<FootstepEvent>& truth,
                   const CalibrationProfile& profile, const TrackOptions& options = {},
                   const BaselineOptions& baseline = {});

struct SuiteReport
{
  std::string suite;
  int calibration_trials = 0;
  CalibrationProfile profile;
  std::vector<TrialRun> runs;
  LocalizationMetrics enhanced;
  LocalizationMetrics baseline;
  std::optional<GaitComparison> gait_enhanced;
  std::optional<GaitComparison> gait_baseline;
};

// Simulates the suite, calibrates on the first `calibration_trials` trials and
// evaluates the rest.
SuiteReport evaluate_suite(const std::string& suite, int calibration_trials = 3,
                           const TrackOptions& options = {}, const CalibrationOptions& calib = {});

nlohmann::json metrics_json(const LocalizationMetrics& m);
nlohmann::json gait_json(const GaitComparison& g);
nlohmann::json gait_report_json(const GaitParameters& g);

struct BarSeries
{
  std::string label;
  double value = 0.0;
  double error = 0.0;
};

// Standalone SVG bar chart with symmetric error bars.
std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<BarSeries>& bars);

} // namespace gaitvibe::eval
