#pragma once

#include <cstddef>
#include <vector>

#include "gaitvibe/geometry.hpp"

// Vibration-trace preprocessing: noise statistics, Wiener denoising, band
// extraction, footstep detection and fixed-window segmentation.
namespace gaitvibe
{

inline constexpr double kDefaultSampleRateHz = 500.0;

struct SensorInfo
{
  int id = 0;
  Point2 position;

  friend bool operator==(const SensorInfo&, const SensorInfo&) = default;
};

struct SensorChannel
{
  int sensor_id = 0;
  Point2 position;
  std::vector<double> samples;
  double sample_rate_hz = kDefaultSampleRateHz;
};

/// Time-aligned multi-channel record. Channel i's sample k was taken at
/// t0 + k / sample_rate.
struct VibrationRecord
{
  std::vector<SensorChannel> channels;
  double t0 = 0.0;

  /// Throws InputError unless there are >= 3 non-empty channels with a shared
  /// positive sample rate and length, finite samples and distinct positions.
  void validate() const;

  double sample_rate() const { return channels.empty() ? kDefaultSampleRateHz : channels.front().sample_rate_hz; }
  std::size_t sample_count() const { return channels.empty() ? 0 : channels.front().samples.size(); }
  double duration() const { return static_cast<double>(sample_count()) / sample_rate(); }
  double end_time() const { return t0 + duration(); }
  std::vector<SensorInfo> layout() const;
};

struct TimeWindow
{
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
};

struct NoiseEntry
{
  int sensor_id = 0;
  double mean = 0.0;
  double std = 0.0;
  double window_s = 0.0;

  /// One-sided bound mean + z * std.
  double bound(double z) const { return mean + z * std; }

  friend bool operator==(const NoiseEntry&, const NoiseEntry&) = default;
};

struct NoiseModel
{
  std::vector<NoiseEntry> entries;

  /// Throws InputError when the sensor has no entry.
  const NoiseEntry& at(int sensor_id) const;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct BandSpec
{
  double low_hz = 0.0;
  double high_hz = 0.0;

  /// Throws ConfigError unless 0 <= low < high <= fs / 2.
  void validate(double sample_rate_hz) const;

  friend bool operator==(const BandSpec&, const BandSpec&) = default;
};

// Broadband footstep energy; capped at Nyquist for 500 Hz sampling.
inline constexpr BandSpec kDetectionBand{10.0, 250.0};
// High band where the wave arrival peak is distinct from the force ramp.
inline constexpr BandSpec kArrivalBand{150.0, 200.0};

inline constexpr double kMinNoiseWindowS = 0.5;

// Mean and standard deviation of the band-filtered channel over the quiet
// window (absolute times; the channel's first sample is at t0). Throws
// CalibrationError for windows shorter than 0.5 s or a zero deviation.
NoiseEntry estimate_noise(const SensorChannel& channel, TimeWindow quiet, double t0 = 0.0,
                          BandSpec band = kDetectionBand);

NoiseModel estimate_noise_model(const VibrationRecord& record, TimeWindow quiet,
                                BandSpec band = kDetectionBand);

// Local mean / local variance Wiener rule over a sliding window. Returns the
// input unchanged when the local variance never exceeds the noise variance.
SensorChannel denoise(const SensorChannel& channel, const NoiseEntry& noise,
                      double window_s = 0.025);

// Zero-phase band-pass. Throws ConfigError for a band outside Nyquist.
SensorChannel bandpass(const SensorChannel& channel, BandSpec band);

struct SegmentationOptions
{
  BandSpec detection = kDetectionBand;
  BandSpec arrival = kArrivalBand;
  double threshold_sigma = 3.0;
  double smoothing_s = 0.02;
  double min_gap_s = 0.25;
  double window_s = 0.8;
  bool denoise = true;
  double wiener_window_s = 0.025;
};

/// Per-sensor slice of a footstep window.
struct ChannelSegment
{
  int sensor_id = 0;
  Point2 position;
  // Maximum of the arrival-band envelope inside the window.
  double peak_time = 0.0;
  double peak_amplitude = 0.0;
  std::size_t peak_index = 0;
  std::vector<double> arrival_envelope;
  std::vector<double> detection;
};

struct FootstepSegment
{
  double start = 0.0;
  double end = 0.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  // Peak of the combined detection envelope the window is centered on.
  double center_time = 0.0;
  double score = 0.0;
  int detection_channel = 0;
  bool truncated = false;
  std::vector<ChannelSegment> channels;

  std::size_t size() const { return channels.empty() ? 0 : channels.front().arrival_envelope.size(); }
  double time_at(double index) const { return start + index / sample_rate_hz; }
  // Fractional sample index of an absolute time.
  double index_of(double t) const { return (t - start) * sample_rate_hz; }
  bool covers(double t) const { return t >= start && t <= end; }
  /// Throws InputError when the sensor is absent.
  const ChannelSegment& channel(int sensor_id) const;
};

/// Sample indices of detected footstep peaks given per-channel detection
/// envelopes. A sample is active when some channel's envelope strictly exceeds
/// its threshold; each active run contributes its strongest sample (ranked by
/// (envelope - mean) / std) plus any local maximum whose valley towards every
/// higher sample falls below half its score. Peaks closer than min_gap samples
/// keep only the stronger one.
struct DetectedPeak
{
  std::size_t index = 0;
  double score = 0.0;
  std::size_t channel = 0;
};

std::vector<DetectedPeak> pick_peaks(const std::vector<std::vector<double>>& envelopes,
                                     const std::vector<NoiseEntry>& noise, double threshold_sigma,
                                     std::size_t min_gap);

std::vector<FootstepSegment> detect_footsteps(const VibrationRecord& record,
                                              const NoiseModel& noise,
                                              const SegmentationOptions& options = {});

} // namespace gaitvibe
