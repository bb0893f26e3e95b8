#include "gaitvibe/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gaitvibe/dsp.hpp"
#include "gaitvibe/errors.hpp"

namespace gaitvibe
{

void VibrationRecord::validate() const
{
  if (channels.size() < 3)
    throw InputError("record needs at least 3 channels, got " + std::to_string(channels.size()));
  const double fs = channels.front().sample_rate_hz;
  const std::size_t n = channels.front().samples.size();
  if (!(fs > 0.0) || !std::isfinite(fs))
    throw InputError("sample rate must be positive");
  if (n == 0)
    throw InputError("record has no samples");
  if (!std::isfinite(t0))
    throw InputError("record start time is not finite");
  for (std::size_t i = 0; i < channels.size(); ++i)
  {
    const auto& ch = channels[i];
    if (ch.sample_rate_hz != fs)
      throw InputError("sensor " + std::to_string(ch.sensor_id) + " has a different sample rate");
    if (ch.samples.size() != n)
      throw InputError("sensor " + std::to_string(ch.sensor_id) + " has a different sample count");
    if (!std::isfinite(ch.position.x) || !std::isfinite(ch.position.y))
      throw InputError("sensor " + std::to_string(ch.sensor_id) + " position is not finite");
    for (double v : ch.samples)
      if (!std::isfinite(v))
        throw InputError("sensor " + std::to_string(ch.sensor_id) + " contains NaN or Inf");
    for (std::size_t j = 0; j < i; ++j)
    {
      if (channels[j].sensor_id == ch.sensor_id)
        throw InputError("duplicate sensor id " + std::to_string(ch.sensor_id));
      if (channels[j].position == ch.position)
        throw InputError("sensors " + std::to_string(channels[j].sensor_id) + " and " +
                         std::to_string(ch.sensor_id) + " share a position");
    }
  }
}

std::vector<SensorInfo> VibrationRecord::layout() const
{
  std::vector<SensorInfo> out;
  out.reserve(channels.size());
  for (const auto& ch : channels)
    out.push_back({ch.sensor_id, ch.position});
  return out;
}

const NoiseEntry& NoiseModel::at(int sensor_id) const
{
  for (const auto& e : entries)
    if (e.sensor_id == sensor_id)
      return e;
  throw InputError("no noise entry for sensor " + std::to_string(sensor_id));
}

void BandSpec::validate(double sample_rate_hz) const
{
  const double nyquist = 0.5 * sample_rate_hz;
  if (!(low_hz >= 0.0) || !(low_hz < high_hz) || !(high_hz <= nyquist))
    throw ConfigError("band [" + std::to_string(low_hz) + ", " + std::to_string(high_hz) +
                      "] Hz is invalid for Nyquist " + std::to_string(nyquist) + " Hz");
}

const ChannelSegment& FootstepSegment::channel(int sensor_id) const
{
  for (const auto& c : channels)
    if (c.sensor_id == sensor_id)
      return c;
  throw InputError("segment has no sensor " + std::to_string(sensor_id));
}

NoiseEntry estimate_noise(const SensorChannel& channel, TimeWindow quiet, double t0, BandSpec band)
{
  const double fs = channel.sample_rate_hz;
  band.validate(fs);
  const auto n = static_cast<long>(channel.samples.size());
  const long first = std::max(0L, static_cast<long>(std::ceil((quiet.start - t0) * fs - 1e-9)));
  const long last = std::min(n, static_cast<long>(std::ceil((quiet.end - t0) * fs - 1e-9)));
  const long count = last - first;
  const double covered = count > 0 ? static_cast<double>(count) / fs : 0.0;
  if (covered + 1e-9 < kMinNoiseWindowS)
    throw CalibrationError("quiet window for sensor " + std::to_string(channel.sensor_id) +
                           " covers " + std::to_string(covered) + " s, need 0.5 s");

  const auto filtered = dsp::bandpass(channel.samples, fs, band.low_hz, band.high_hz);
  double mean = 0.0;
  for (long i = first; i < last; ++i)
    mean += filtered[i];
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (long i = first; i < last; ++i)
    var += (filtered[i] - mean) * (filtered[i] - mean);
  var /= static_cast<double>(count);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0))
    throw CalibrationError("noise std for sensor " + std::to_string(channel.sensor_id) + " is zero");
  return {channel.sensor_id, mean, sd, covered};
}

NoiseModel estimate_noise_model(const VibrationRecord& record, TimeWindow quiet, BandSpec band)
{
  NoiseModel model;
  for (const auto& ch : record.channels)
    model.entries.push_back(estimate_noise(ch, quiet, record.t0, band));
  return model;
}

SensorChannel denoise(const SensorChannel& channel, const NoiseEntry& noise, double window_s)
{
  const auto& x = channel.samples;
  const auto half = static_cast<std::size_t>(
      std::max(1.0, std::round(0.5 * window_s * channel.sample_rate_hz)));
  const auto mean = dsp::moving_average(x, half);
  const auto var = dsp::moving_variance(x, mean, half);
  const double nv = noise.std * noise.std;

  if (std::none_of(var.begin(), var.end(), [nv](double v) { return v > nv; }))
    return channel;

  SensorChannel out = channel;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    const double gain = var[i] > nv ? (var[i] - nv) / var[i] : 0.0;
    out.samples[i] = mean[i] + gain * (x[i] - mean[i]);
  }
  return out;
}

SensorChannel bandpass(const SensorChannel& channel, BandSpec band)
{
  band.validate(channel.sample_rate_hz);
  SensorChannel out = channel;
  out.samples = dsp::bandpass(channel.samples, channel.sample_rate_hz, band.low_hz, band.high_hz);
  return out;
}

std::vector<DetectedPeak> pick_peaks(const std::vector<std::vector<double>>& envelopes,
                                     const std::vector<NoiseEntry>& noise, double threshold_sigma,
                                     std::size_t min_gap)
{
  if (envelopes.empty())
    return {};
  const std::size_t n = envelopes.front().size();

  // Combined score: strongest channel z among channels above threshold.
  std::vector<double> score(n, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> chan(n, 0);
  std::vector<bool> above(n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < envelopes.size(); ++c)
    {
      const double z = (envelopes[c][i] - noise[c].mean) / noise[c].std;
      if (envelopes[c][i] > noise[c].bound(threshold_sigma))
      {
        if (!above[i] || z > score[i])
        {
          score[i] = z;
          chan[i] = c;
        }
        above[i] = true;
      }
      else if (!above[i] && z > score[i])
        score[i] = z;
    }

  std::vector<DetectedPeak> runs;
  bool active = false;
  DetectedPeak cur;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (above[i] && (!active || score[i] > cur.score))
    {
      cur = {i, score[i], chan[i]};
      active = true;
    }
    if (!above[i] && active)
    {
      runs.push_back(cur);
      active = false;
    }
  }
  if (active)
    runs.push_back(cur);

  // A run also splits at any local maximum whose valley towards every higher
  // sample drops below half its score.
  for (std::size_t i = 1; i + 1 < n; ++i)
  {
    if (!above[i] || !(score[i] >= score[i - 1] && score[i] > score[i + 1]) || !(score[i] > 0.0))
      continue;
    double left = score[i], right = score[i];
    for (std::size_t j = i; j-- > 0 && score[j] <= score[i];)
      left = std::min(left, score[j]);
    for (std::size_t j = i + 1; j < n && score[j] <= score[i]; ++j)
      right = std::min(right, score[j]);
    if (std::max(left, right) <= 0.5 * score[i] &&
        std::none_of(runs.begin(), runs.end(), [&](const DetectedPeak& p) { return p.index == i; }))
      runs.push_back({i, score[i], chan[i]});
  }
  std::sort(runs.begin(), runs.end(),
            [](const DetectedPeak& a, const DetectedPeak& b) { return a.index < b.index; });

  // Strongest first; ties go to the earlier peak.
  std::vector<std::size_t> rank(runs.size());
  for (std::size_t i = 0; i < rank.size(); ++i)
    rank[i] = i;
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].score > runs[b].score; });

  std::vector<DetectedPeak> kept;
  for (std::size_t r : rank)
  {
    const auto& p = runs[r];
    const bool close = std::any_of(kept.begin(), kept.end(), [&](const DetectedPeak& k) {
      const std::size_t gap = k.index > p.index ? k.index - p.index : p.index - k.index;
      return gap < min_gap;
    });
    if (!close)
      kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end(),
            [](const DetectedPeak& a, const DetectedPeak& b) { return a.index < b.index; });
  return kept;
}

namespace
{

std::vector<double> slice(const std::vector<double>& x, long start, std::size_t count)
{
  std::vector<double> out(count, 0.0);
  const auto n = static_cast<long>(x.size());
  for (std::size_t k = 0; k < count; ++k)
  {
    const long i = start + static_cast<long>(k);
    if (i >= 0 && i < n)
      out[k] = x[i];
  }
  return out;
}

} // namespace

std::vector<FootstepSegment> detect_footsteps(const VibrationRecord& record,
                                              const NoiseModel& noise,
                                              const SegmentationOptions& options)
{
  if (record.channels.empty() || record.sample_count() == 0)
    return {};
  const double fs = record.sample_rate();
  options.detection.validate(fs);
  options.arrival.validate(fs);

  const std::size_t nc = record.channels.size();
  std::vector<std::vector<double>> detection(nc), envelopes(nc), arrival(nc);
  std::vector<NoiseEntry> entries(nc);
  const auto smooth_half =
      static_cast<std::size_t>(std::max(0.0, std::round(0.5 * options.smoothing_s * fs)));

  for (std::size_t c = 0; c < nc; ++c)
  {
    const auto& ch = record.channels[c];
    entries[c] = noise.at(ch.sensor_id);
    const SensorChannel src =
        options.denoise ? denoise(ch, entries[c], options.wiener_window_s) : ch;
    detection[c] = dsp::bandpass(src.samples, fs, options.detection.low_hz, options.detection.high_hz);
    std::vector<double> mag(detection[c].size());
    std::transform(detection[c].begin(), detection[c].end(), mag.begin(),
                   [](double v) { return std::abs(v); });
    envelopes[c] = dsp::moving_average(mag, smooth_half);
    arrival[c] = dsp::band_envelope(ch.samples, fs, options.arrival.low_hz, options.arrival.high_hz);
  }

  const auto min_gap = static_cast<std::size_t>(std::round(options.min_gap_s * fs));
  const auto peaks = pick_peaks(envelopes, entries, options.threshold_sigma, min_gap);

  const auto width = static_cast<std::size_t>(std::round(options.window_s * fs));
  const auto n = static_cast<long>(record.sample_count());
  std::vector<FootstepSegment> out;
  out.reserve(peaks.size());
  for (const auto& p : peaks)
  {
    FootstepSegment seg;
    const long start = static_cast<long>(p.index) - static_cast<long>(width / 2);
    seg.sample_rate_hz = fs;
    seg.start = record.t0 + static_cast<double>(start) / fs;
    seg.end = seg.start + static_cast<double>(width) / fs;
    seg.center_time = record.t0 + static_cast<double>(p.index) / fs;
    seg.score = p.score;
    seg.truncated = start < 0 || start + static_cast<long>(width) > n;

    double best = -1.0;
    for (std::size_t c = 0; c < nc; ++c)
    {
      ChannelSegment cs;
      cs.sensor_id = record.channels[c].sensor_id;
      cs.position = record.channels[c].position;
      cs.arrival_envelope = slice(arrival[c], start, width);
      cs.detection = slice(detection[c], start, width);
      const auto it = std::max_element(cs.arrival_envelope.begin(), cs.arrival_envelope.end());
      cs.peak_index = static_cast<std::size_t>(it - cs.arrival_envelope.begin());
      cs.peak_amplitude = *it;
      cs.peak_time = seg.time_at(static_cast<double>(cs.peak_index));
      if (cs.peak_amplitude > best)
      {
        best = cs.peak_amplitude;
        seg.detection_channel = cs.sensor_id;
      }
      seg.channels.push_back(std::move(cs));
    }
    out.push_back(std::move(seg));
  }
  return out;
}

} // namespace gaitvibe
