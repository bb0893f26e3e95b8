#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/geometry.hpp"
#include "gaitvibe/signal.hpp"
#include "gaitvibe/velocity_profile.hpp"

// Synthetic floor: known wave-speed field, exponential attenuation and a
// ramped-onset footstep burst, producing traces plus exact ground truth.
namespace gaitvibe::sim
{

enum class FieldKind
{
  Constant,
  Polynomial,
  Columns
};

struct VelocityField
{
  FieldKind kind = FieldKind::Constant;
  double constant = 100.0;
  // Used for FieldKind::Polynomial; the clamp range is ignored.
  VelocityProfile polynomial;
  // Columns: v_fast minus the deepest Gaussian dip (std column_width) at each x.
  std::vector<double> columns_x{0.0, 3.5, 7.0};
  double v_slow = 60.0;
  double v_fast = 200.0;
  double column_width = 0.8;

  double operator()(Point2 p) const;
};

struct FloorModel
{
  Rect bounds{0.0, 7.0, -1.0, 1.0};
  VelocityField velocity;
  // Amplitude factor exp(-attenuation * distance), 1/m.
  double attenuation = 0.08;
  std::vector<SensorInfo> sensors;

  // Throws ScenarioError for fewer than 3 sensors, negative attenuation or a
  // field leaving [30, 300] m/s on a 5 cm grid.
  void validate() const;
};

std::vector<SensorInfo> default_layout();

struct GaitTemplate
{
  double step_length = 0.7;
  double step_width = 0.2;
  double cadence = 1.8;
  Point2 start{0.35, 0.0};
  double heading = 0.0;
  int step_count = 10;
  double first_strike = 1.0;
  Foot first_foot = Foot::Left;
  // Per-step force multipliers; missing entries mean 1.
  std::vector<double> force_scale;

  double force(int step) const;
  // Strike times and locations; the left foot lands on the +normal side.
  std::vector<FootstepEvent> footsteps(int trial_id) const;
};

struct Waveform
{
  // Leading Gaussian lobe height relative to the ramp peak.
  double onset_fraction = 0.15;
  double onset_width_s = 0.01;
  double ramp_s = 0.06;
  double decay_s = 0.04;
  double carrier_hz = 175.0;
  double low_hz = 30.0;
  double low_gain = 2.0;

  // Unit-amplitude burst, tau relative to the wave arrival.
  double operator()(double tau) const;
  // Support [start, end] outside which the burst is below 1e-12.
  double support_start() const;
  double support_end() const;
};

struct SimScenario
{
  std::string name = "custom";
  int trial_id = 0;
  FloorModel floor;
  GaitTemplate gait;
  Waveform waveform;
  // One value per sensor, or a single value for all.
  std::vector<double> noise_std{0.0};
  // Share of noise power that is white; the rest is confined below 60 Hz.
  double white_fraction = 0.1;
  double sample_rate_hz = kDefaultSampleRateHz;
  double t0 = 0.0;
  // Record length; 0 means last strike + 1 s.
  double duration_s = 0.0;
  std::uint64_t seed = 1;

  double noise_for(std::size_t channel) const;
};

// Noise std giving the requested SNR, defined as the arrival-lobe amplitude
// seen 1 m from the strike over the noise std.
double noise_std_for_snr(double snr_db, const Waveform& wave, double attenuation);

struct ArrivalTruth
{
  int trial_id = 0;
  int step = 0;
  int sensor_id = 0;
  double strike_time = 0.0;
  double arrival_time = 0.0;
  double distance = 0.0;
  double amplitude = 0.0;
  double peak_time = 0.0;
};

struct SimResult
{
  VibrationRecord record;
  std::vector<FootstepEvent> events;
  std::vector<ArrivalTruth> truth;
};

// Throws ScenarioError for invalid scenarios or footsteps outside the floor.
SimResult synthesize(const SimScenario& scenario);

// constant, polynomial, columns, snr_sweep. Throws ConfigError otherwise.
std::vector<SimScenario> scenario_suite(const std::string& name);
std::vector<std::string> suite_names();

// The reference degree-4 field used by the polynomial suite.
VelocityProfile reference_polynomial_field();

nlohmann::json scenario_to_json(const SimScenario& scenario);
// Missing keys take defaults; throws ScenarioError on bad values.
SimScenario scenario_from_json(const nlohmann::json& doc);

// Box-Muller over mt19937_64. std::normal_distribution differs between
// standard libraries; the engine does not.
class NormalStream
{
public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double operator()();

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace gaitvibe::sim
