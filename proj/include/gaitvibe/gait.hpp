#pragma once

#include <optional>
#include <vector>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/geometry.hpp"

// Spatial gait parameters from an ordered footstep sequence.
namespace gaitvibe
{

struct GaitStep
{
  double t = 0.0;
  Point2 location;
  Foot foot = Foot::Unknown;
};

struct ProgressionLine
{
  Point2 anchor;
  Point2 direction;
};

/// Total-least-squares walking axis. With three or more footsteps the line is
/// fit through the midpoints of consecutive footsteps, which cancels the
/// left/right alternation; with two it joins them. Direction points along
/// increasing time. Throws DegenerateGeometry for fewer than 2 footsteps or
/// coincident points.
ProgressionLine progression_line(const std::vector<GaitStep>& seq);

struct StepParams
{
  int from = 0;
  double t = 0.0;
  double step_length = 0.0;
  double step_width = 0.0;
  double step_angle_deg = 0.0;
};

struct StrideParams
{
  int from = 0;
  int to = 0;
  double t = 0.0;
  double stride_length = 0.0;
};

struct Summary
{
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

Summary summarize(const std::vector<double>& values);

struct GaitParameters
{
  ProgressionLine line;
  std::vector<StepParams> steps;
  std::vector<StrideParams> strides;
  std::optional<double> walking_speed;
  Summary step_length;
  Summary step_width;
  Summary step_angle;
  Summary stride_length;
};

/// Steps k -> k+1 decomposed along and across the progression line; strides
/// join same-foot footsteps when labels exist, else k -> k+2; speed is the
/// projected span over the elapsed time. Throws InputError when times are not
/// strictly increasing.
GaitParameters spatial_params(const std::vector<GaitStep>& seq);

struct ParamError
{
  double mape = 0.0;
  double mae = 0.0;
  int compared = 0;
  // Truth below 1 cm (or 0.01 deg / m/s), left out of the MAPE.
  int excluded = 0;
};

struct GaitComparison
{
  ParamError step_length;
  ParamError step_width;
  ParamError step_angle;
  ParamError stride_length;
  ParamError walking_speed;
  int matched = 0;
  int missed = 0;
  int spurious = 0;
  double mean_mape = 0.0;
};

inline constexpr double kMatchGapS = 0.3;
inline constexpr double kMinTruthValue = 0.01;

/// Matches estimated to true footsteps by nearest time (gap <= 0.3 s, one to
/// one), recomputes parameters on the matched pairs and reports MAPE and mean
/// absolute error. Throws EvalError when nothing matches.
GaitComparison compare_params(const std::vector<GaitStep>& estimated,
                              const std::vector<GaitStep>& truth, double max_gap = kMatchGapS);

// One-to-one nearest-time matching: pairs (estimate index, truth index).
std::vector<std::pair<int, int>> match_by_time(const std::vector<double>& estimated,
                                               const std::vector<double>& truth, double max_gap);

} // namespace gaitvibe
