#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/signal.hpp"
#include "gaitvibe/simfloor.hpp"

namespace testutil
{

inline gaitvibe::SensorChannel tone(double hz, double amplitude, double seconds, double fs = 500.0)
{
  gaitvibe::SensorChannel ch;
  ch.sample_rate_hz = fs;
  const auto n = static_cast<std::size_t>(seconds * fs);
  for (std::size_t i = 0; i < n; ++i)
    ch.samples.push_back(amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs));
  return ch;
}

inline gaitvibe::SensorChannel white(std::uint64_t seed, double sd, double seconds, double fs = 500.0)
{
  gaitvibe::SensorChannel ch;
  ch.sample_rate_hz = fs;
  gaitvibe::sim::NormalStream normal(seed);
  const auto n = static_cast<std::size_t>(seconds * fs);
  for (std::size_t i = 0; i < n; ++i)
    ch.samples.push_back(sd * normal());
  return ch;
}

inline double rms(const std::vector<double>& x, std::size_t from = 0, std::size_t to = 0)
{
  if (to == 0)
    to = x.size();
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i)
    s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

// Straight walk scenario on the default floor with the given SNR.
inline gaitvibe::sim::SimScenario walk(double snr_db, int steps = 10, std::uint64_t seed = 7)
{
  gaitvibe::sim::SimScenario sc;
  sc.floor.sensors = gaitvibe::sim::default_layout();
  sc.gait.step_count = steps;
  sc.seed = seed;
  sc.noise_std = {gaitvibe::sim::noise_std_for_snr(snr_db, sc.waveform, sc.floor.attenuation)};
  return sc;
}

inline gaitvibe::Trial trial(const gaitvibe::sim::SimResult& r) { return {r.record, r.events}; }

inline std::vector<gaitvibe::Trial> trials(const std::vector<gaitvibe::sim::SimScenario>& scenarios)
{
  std::vector<gaitvibe::Trial> out;
  for (const auto& s : scenarios)
    out.push_back(trial(gaitvibe::sim::synthesize(s)));
  return out;
}

inline double truth_arrival(const std::vector<gaitvibe::sim::ArrivalTruth>& truth, int step, int sensor)
{
  for (const auto& t : truth)
    if (t.step == step && t.sensor_id == sensor)
      return t.arrival_time;
  return NAN;
}

} // namespace testutil
