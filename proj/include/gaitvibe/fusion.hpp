#pragma once

#include <string>
#include <vector>

#include "gaitvibe/geometry.hpp"
#include "gaitvibe/signal.hpp"
#include "gaitvibe/velocity_profile.hpp"

// Fusion-stage calibration: vision footstep events paired with vibration
// segments yield per-sensor arrival statistics and a floor velocity profile.
namespace gaitvibe
{

enum class Foot
{
  Unknown,
  Left,
  Right
};

const char* to_string(Foot foot);
// Accepts left/right/l/r/unknown/empty (case-insensitive); InputError otherwise.
Foot parse_foot(const std::string& text);

struct FootstepEvent
{
  int trial_id = 0;
  double strike_time = 0.0;
  Point2 location;
  Foot foot = Foot::Unknown;

  friend bool operator==(const FootstepEvent&, const FootstepEvent&) = default;
};

struct ArrivalEstimate
{
  int sensor_id = 0;
  double arrival_time = 0.0;
  double arrival_amplitude = 0.0;

  friend bool operator==(const ArrivalEstimate&, const ArrivalEstimate&) = default;
};

struct RatioEntry
{
  int sensor_id = 0;
  double mean = 0.0;
  double std = 0.0;
  int count = 0;

  friend bool operator==(const RatioEntry&, const RatioEntry&) = default;
};

struct ArrivalRatioModel
{
  std::vector<RatioEntry> entries;

  /// Throws InputError when the sensor has no entry.
  const RatioEntry& at(int sensor_id) const;
};

inline constexpr double kCandidateSigma = 1.2816;
inline constexpr double kDistanceTieM = 0.01;
inline constexpr double kOrderTimeTolS = 0.004;

/// Local maxima of the sensor's arrival-band envelope above mean + z * std,
/// restricted to [strike_time, peak_time] and refined to sub-sample time.
/// Throws InputError for a strike after the peak or outside the segment, and
/// NoArrivalCandidate when nothing qualifies.
std::vector<ArrivalEstimate> arrival_candidates(const FootstepSegment& segment,
                                                const FootstepEvent& strike, int sensor_id,
                                                const NoiseEntry& noise,
                                                double z = kCandidateSigma);

// Same peak rule over an explicit time range of a channel segment; returns an
// empty list instead of throwing.
std::vector<ArrivalEstimate> envelope_peaks(const FootstepSegment& segment,
                                            const ChannelSegment& channel, double from_time,
                                            double threshold);

/// Pairwise ordering rule: when must_precede(a, b) holds, sensor a's arrival
/// may not be later than sensor b's by more than the time tolerance.
struct OrderConstraints
{
  // Row a, column b; indices refer to the candidate list order.
  std::vector<std::vector<bool>> must_precede;
  double time_tolerance = kOrderTimeTolS;
};

// Depth-first search over one candidate per list for the order-consistent
// combination with the smallest summed arrival time. Empty lists are skipped;
// the result holds one estimate per non-empty list, or is empty when no
// combination satisfies the constraints.
std::vector<ArrivalEstimate> earliest_consistent(
    const std::vector<std::vector<ArrivalEstimate>>& candidates, const OrderConstraints& order);

/// Chooses one arrival per sensor whose order matches the footstep-to-sensor
/// distance order (distances within the tie tolerance may come in either
/// order), minimizing the summed arrival time. `layout` is parallel to
/// `candidates`. Throws OrderInconsistent with fewer than 3 usable sensors or
/// no admissible combination.
std::vector<ArrivalEstimate> shortlist_by_distance_order(
    const std::vector<std::vector<ArrivalEstimate>>& candidates, Point2 strike,
    const std::vector<SensorInfo>& layout, double tie_tolerance = kDistanceTieM,
    double time_tolerance = kOrderTimeTolS);

struct RatioSample
{
  int sensor_id = 0;
  double arrival_amplitude = 0.0;
  double peak_amplitude = 0.0;
};

inline constexpr int kMinRatioSamples = 5;

/// Per-sensor mean and std of arrival / peak amplitude. Ratios outside (0, 1]
/// are dropped. Throws CalibrationError when a sensor keeps fewer than 5.
ArrivalRatioModel fit_ratio_model(const std::vector<RatioSample>& samples);

/// A matched footstep: vision event plus its chosen arrivals.
struct FusedFootstep
{
  FootstepEvent event;
  std::vector<ArrivalEstimate> arrivals;
};

struct VelocitySampleSet
{
  std::vector<VelocitySample> samples;
  int discarded_nonpositive = 0;
  int discarded_out_of_range = 0;
};

/// v = distance / (arrival - strike) per footstep and sensor, attributed to
/// the strike location. Non-positive delays and speeds outside
/// [v_min, v_max] are discarded and counted.
VelocitySampleSet velocity_samples(const std::vector<FusedFootstep>& footsteps,
                                   const std::vector<SensorInfo>& layout,
                                   double v_min = kDefaultVMin, double v_max = kDefaultVMax);

struct CalibrationMetadata
{
  int trial_count = 0;
  int footstep_count = 0;
  int matched_footsteps = 0;
  int velocity_sample_count = 0;
  int discarded_samples = 0;
  double velocity_rmse = 0.0;
  double ci_width_max = 0.0;
  double ci_width_mean = 0.0;
  bool needs_more_trials = false;
  bool ridge_fallback = false;
  std::vector<std::string> warnings;
};

struct CalibrationProfile
{
  std::vector<SensorInfo> sensors;
  double sample_rate_hz = kDefaultSampleRateHz;
  BandSpec detection_band = kDetectionBand;
  BandSpec arrival_band = kArrivalBand;
  NoiseModel noise;
  ArrivalRatioModel ratio;
  VelocityProfile velocity;
  CalibrationMetadata metadata;
};

struct Trial
{
  VibrationRecord record;
  std::vector<FootstepEvent> events;
};

struct CalibrationOptions
{
  Rect floor{0.0, 7.0, -1.0, 1.0};
  SegmentationOptions segmentation;
  double candidate_sigma = kCandidateSigma;
  double v_min = kDefaultVMin;
  double v_max = kDefaultVMax;
  double ci_limit = 100.0;
  double tie_tolerance = kDistanceTieM;
  double time_tolerance = kOrderTimeTolS;
  // Gap kept between the end of the noise window and the first strike.
  double quiet_margin_s = 0.05;
};

// Pooled noise model from the footstep-free lead-in of every trial.
NoiseModel fusion_noise_model(const std::vector<Trial>& trials, const CalibrationOptions& options);

// Index of the segment that best matches a strike (covers it, nearest peak
// at or after it), or -1.
int match_segment(const std::vector<FootstepSegment>& segments, double strike_time);

CalibrationProfile calibrate(const std::vector<Trial>& trials, const CalibrationOptions& options = {});

} // namespace gaitvibe
