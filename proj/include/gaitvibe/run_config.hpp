#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/locate.hpp"

namespace gaitvibe
{

struct RunPaths
{
  std::string traces;
  std::string events;
  std::string profile;
  std::string out;
};

/// Every tunable threshold, with the published defaults.
struct RunConfig
{
  RunPaths paths;
  Rect floor{0.0, 7.0, -1.0, 1.0};
  BandSpec detection_band = kDetectionBand;
  BandSpec arrival_band = kArrivalBand;
  double detection_sigma = 3.0;
  double candidate_sigma = kCandidateSigma;
  double window_s = 0.8;
  double min_gap_s = 0.25;
  double smoothing_s = 0.02;
  bool denoise = true;
  double wiener_window_s = 0.025;
  double proposal_size_m = 2.0;
  double soft_boundary_m = kSoftBoundaryM;
  double recovery_step_m = 0.5;
  double grid_resolution_m = kGridResolutionM;
  ResidualNorm residual_norm = ResidualNorm::L2;
  double v_min = kDefaultVMin;
  double v_max = kDefaultVMax;
  int polynomial_degree = kProfileDegree;
  double ci_limit_mps = 100.0;
  double ratio_sigmas = 3.0;
  double distance_tie_m = kDistanceTieM;
  double order_time_tol_s = kOrderTimeTolS;
  double baseline_v_step_mps = 5.0;
  std::uint64_t seed = 1;

  // Throws ConfigError for out-of-range values or missing referenced files.
  void validate() const;

  SegmentationOptions segmentation() const;
  CalibrationOptions calibration() const;
  TrackOptions tracking() const;
  BaselineOptions baseline() const;
};

nlohmann::json config_to_json(const RunConfig& config);
// Unknown keys are rejected; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

} // namespace gaitvibe
