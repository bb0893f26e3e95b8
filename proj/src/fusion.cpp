#include "gaitvibe/fusion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "gaitvibe/dsp.hpp"
#include "gaitvibe/errors.hpp"

namespace gaitvibe
{

const char* to_string(Foot foot)
{
  switch (foot)
  {
  case Foot::Left:
    return "left";
  case Foot::Right:
    return "right";
  case Foot::Unknown:
    break;
  }
  return "unknown";
}

Foot parse_foot(const std::string& text)
{
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "left" || s == "l")
    return Foot::Left;
  if (s == "right" || s == "r")
    return Foot::Right;
  if (s.empty() || s == "unknown" || s == "-")
    return Foot::Unknown;
  throw InputError("unknown foot label '" + text + "'");
}

const RatioEntry& ArrivalRatioModel::at(int sensor_id) const
{
  for (const auto& e : entries)
    if (e.sensor_id == sensor_id)
      return e;
  throw InputError("no arrival ratio for sensor " + std::to_string(sensor_id));
}

std::vector<ArrivalEstimate> envelope_peaks(const FootstepSegment& segment,
                                            const ChannelSegment& channel, double from_time,
                                            double threshold)
{
  const auto& e = channel.arrival_envelope;
  std::vector<ArrivalEstimate> out;
  if (e.empty())
    return out;
  const double first = std::ceil(segment.index_of(from_time) - 1e-9);
  const std::size_t lo = first <= 0.0 ? 0 : static_cast<std::size_t>(first);
  const std::size_t hi = std::min(channel.peak_index, e.size() - 1);
  for (std::size_t j = lo; j <= hi && j < e.size(); ++j)
  {
    if (!(e[j] > threshold))
      continue;
    const bool rises = j == 0 || e[j] >= e[j - 1];
    const bool falls = j + 1 == e.size() || e[j] > e[j + 1];
    if (!rises || !falls)
      continue;
    double off = 0.0;
    if (j > 0 && j + 1 < e.size())
      off = dsp::parabolic_offset(e[j - 1], e[j], e[j + 1]);
    double t = segment.time_at(static_cast<double>(j) + off);
    t = std::clamp(t, std::min(from_time, channel.peak_time), channel.peak_time);
    out.push_back({channel.sensor_id, t, e[j]});
  }
  return out;
}

std::vector<ArrivalEstimate> arrival_candidates(const FootstepSegment& segment,
                                                const FootstepEvent& strike, int sensor_id,
                                                const NoiseEntry& noise, double z)
{
  const auto& ch = segment.channel(sensor_id);
  if (!segment.covers(strike.strike_time))
    throw InputError("strike at " + std::to_string(strike.strike_time) +
                     " s lies outside the segment");
  if (strike.strike_time > ch.peak_time)
    throw InputError("strike at " + std::to_string(strike.strike_time) +
                     " s is after sensor " + std::to_string(sensor_id) + "'s peak");
  auto out = envelope_peaks(segment, ch, strike.strike_time, noise.bound(z));
  if (out.empty())
    throw NoArrivalCandidate("sensor " + std::to_string(sensor_id) +
                             ": no envelope peak above the noise bound");
  return out;
}

std::vector<ArrivalEstimate> earliest_consistent(
    const std::vector<std::vector<ArrivalEstimate>>& candidates, const OrderConstraints& order)
{
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!candidates[i].empty())
      used.push_back(i);

  // Cheapest possible completion from each depth, for pruning.
  std::vector<double> tail(used.size() + 1, 0.0);
  for (std::size_t k = used.size(); k-- > 0;)
  {
    const auto& c = candidates[used[k]];
    double m = std::numeric_limits<double>::infinity();
    for (const auto& a : c)
      m = std::min(m, a.arrival_time);
    tail[k] = tail[k + 1] + m;
  }

  std::vector<std::size_t> pick(used.size()), best;
  double best_sum = std::numeric_limits<double>::infinity();
  const auto constrained = [&](std::size_t a, std::size_t b) {
    return !order.must_precede.empty() && order.must_precede[a][b];
  };

  auto search = [&](auto&& self, std::size_t depth, double sum) -> void {
    if (sum + tail[depth] >= best_sum)
      return;
    if (depth == used.size())
    {
      best_sum = sum;
      best = pick;
      return;
    }
    const std::size_t s = used[depth];
    const auto& list = candidates[s];
    for (std::size_t k = 0; k < list.size(); ++k)
    {
      const double t = list[k].arrival_time;
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d)
      {
        const std::size_t o = used[d];
        const double to = candidates[o][pick[d]].arrival_time;
        if (constrained(s, o) && t > to + order.time_tolerance)
          ok = false;
        if (constrained(o, s) && to > t + order.time_tolerance)
          ok = false;
      }
      if (!ok)
        continue;
      pick[depth] = k;
      self(self, depth + 1, sum + t);
    }
  };
  search(search, 0, 0.0);

  std::vector<ArrivalEstimate> out;
  if (best.size() != used.size() || used.empty())
    return out;
  for (std::size_t d = 0; d < used.size(); ++d)
    out.push_back(candidates[used[d]][best[d]]);
  return out;
}

std::vector<ArrivalEstimate> shortlist_by_distance_order(
    const std::vector<std::vector<ArrivalEstimate>>& candidates, Point2 strike,
    const std::vector<SensorInfo>& layout, double tie_tolerance, double time_tolerance)
{
  if (candidates.size() != layout.size())
    throw InputError("candidate lists do not match the sensor layout");
  const auto usable = std::count_if(candidates.begin(), candidates.end(),
                                    [](const auto& c) { return !c.empty(); });
  if (usable < 3)
    throw OrderInconsistent("only " + std::to_string(usable) + " sensors have arrival candidates");

  const std::size_t n = layout.size();
  OrderConstraints order;
  order.time_tolerance = time_tolerance;
  order.must_precede.assign(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      order.must_precede[a][b] = distance(layout[a].position, strike) <
                                 distance(layout[b].position, strike) - tie_tolerance;

  auto out = earliest_consistent(candidates, order);
  if (out.empty())
    throw OrderInconsistent("no arrival combination matches the distance order");
  return out;
}

ArrivalRatioModel fit_ratio_model(const std::vector<RatioSample>& samples)
{
  std::map<int, std::vector<double>> by_sensor;
  for (const auto& s : samples)
  {
    auto& list = by_sensor[s.sensor_id];
    if (!(s.peak_amplitude > 0.0))
      continue;
    const double r = s.arrival_amplitude / s.peak_amplitude;
    if (r > 0.0 && r <= 1.0)
      list.push_back(r);
  }
  ArrivalRatioModel model;
  for (const auto& [id, list] : by_sensor)
  {
    if (list.size() < static_cast<std::size_t>(kMinRatioSamples))
      throw CalibrationError("sensor " + std::to_string(id) + " has " +
                             std::to_string(list.size()) + " valid arrival ratios, need 5");
    const double mean = std::accumulate(list.begin(), list.end(), 0.0) / static_cast<double>(list.size());
    double var = 0.0;
    for (double r : list)
      var += (r - mean) * (r - mean);
    var /= static_cast<double>(list.size());
    model.entries.push_back({id, mean, std::sqrt(var), static_cast<int>(list.size())});
  }
  if (model.entries.empty())
    throw CalibrationError("no arrival ratio samples");
  return model;
}

VelocitySampleSet velocity_samples(const std::vector<FusedFootstep>& footsteps,
                                   const std::vector<SensorInfo>& layout, double v_min,
                                   double v_max)
{
  VelocitySampleSet out;
  for (const auto& f : footsteps)
  {
    for (const auto& a : f.arrivals)
    {
      const auto it = std::find_if(layout.begin(), layout.end(),
                                   [&](const SensorInfo& s) { return s.id == a.sensor_id; });
      if (it == layout.end())
        throw InputError("arrival for unknown sensor " + std::to_string(a.sensor_id));
      const double dt = a.arrival_time - f.event.strike_time;
      if (!(dt > 0.0))
      {
        ++out.discarded_nonpositive;
        continue;
      }
      const double v = distance(it->position, f.event.location) / dt;
      if (v < v_min || v > v_max)
      {
        ++out.discarded_out_of_range;
        continue;
      }
      out.samples.push_back({f.event.location, v, f.event.trial_id, f.event.strike_time, a.sensor_id});
    }
  }
  return out;
}

int match_segment(const std::vector<FootstepSegment>& segments, double strike_time)
{
  int best = -1;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segments.size(); ++i)
  {
    const auto& s = segments[i];
    if (!s.covers(strike_time) || s.center_time < strike_time)
      continue;
    const double gap = s.center_time - strike_time;
    if (gap < best_gap)
    {
      best_gap = gap;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace
{

void check_layouts(const std::vector<Trial>& trials)
{
  const auto ref = trials.front().record.layout();
  for (std::size_t i = 1; i < trials.size(); ++i)
    if (trials[i].record.layout() != ref)
      throw InputError("trial " + std::to_string(i) + " uses a different sensor layout");
}

TimeWindow quiet_window(const Trial& trial, double margin)
{
  if (trial.events.empty())
    throw CalibrationError("trial has no vision events");
  double first = trial.events.front().strike_time;
  for (const auto& e : trial.events)
    first = std::min(first, e.strike_time);
  return {trial.record.t0, first - margin};
}

} // namespace

NoiseModel fusion_noise_model(const std::vector<Trial>& trials, const CalibrationOptions& options)
{
  std::map<int, std::vector<NoiseEntry>> by_sensor;
  for (std::size_t i = 0; i < trials.size(); ++i)
  {
    try
    {
      const auto m = estimate_noise_model(trials[i].record,
                                          quiet_window(trials[i], options.quiet_margin_s),
                                          options.segmentation.detection);
      for (const auto& e : m.entries)
        by_sensor[e.sensor_id].push_back(e);
    }
    catch (const CalibrationError& e)
    {
      throw CalibrationError("trial " + std::to_string(i) + ": " + e.what());
    }
  }
  NoiseModel pooled;
  for (const auto& [id, list] : by_sensor)
  {
    NoiseEntry p{id, 0.0, 0.0, 0.0};
    for (const auto& e : list)
    {
      p.mean += e.mean;
      p.std += e.std * e.std;
      p.window_s += e.window_s;
    }
    p.mean /= static_cast<double>(list.size());
    p.std = std::sqrt(p.std / static_cast<double>(list.size()));
    pooled.entries.push_back(p);
  }
  return pooled;
}

CalibrationProfile calibrate(const std::vector<Trial>& input, const CalibrationOptions& options)
{
  if (input.empty())
    throw CalibrationError("calibration needs at least one trial");
  // Canonical trial order: trial id, then record start, then first strike.
  auto trials = input;
  const auto key = [](const Trial& t) {
    int id = std::numeric_limits<int>::max();
    double first = std::numeric_limits<double>::infinity();
    for (const auto& ev : t.events)
    {
      id = std::min(id, ev.trial_id);
      first = std::min(first, ev.strike_time);
    }
    return std::make_tuple(id, t.record.t0, first);
  };
  std::stable_sort(trials.begin(), trials.end(),
                   [&](const Trial& a, const Trial& b) { return key(a) < key(b); });
  for (const auto& t : trials)
    t.record.validate();
  check_layouts(trials);

  const auto layout = trials.front().record.layout();
  CalibrationProfile profile;
  profile.sensors = layout;
  profile.sample_rate_hz = trials.front().record.sample_rate();
  profile.detection_band = options.segmentation.detection;
  profile.arrival_band = options.segmentation.arrival;
  profile.noise = fusion_noise_model(trials, options);
  auto& meta = profile.metadata;
  meta.trial_count = static_cast<int>(trials.size());

  std::vector<FusedFootstep> fused;
  std::vector<RatioSample> ratios;
  for (std::size_t ti = 0; ti < trials.size(); ++ti)
  {
    const auto& trial = trials[ti];
    const auto segments = detect_footsteps(trial.record, profile.noise, options.segmentation);
    auto events = trial.events;
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
      return a.strike_time < b.strike_time;
    });
    for (const auto& ev : events)
    {
      ++meta.footstep_count;
      const std::string where =
          "trial " + std::to_string(ev.trial_id) + " strike " + std::to_string(ev.strike_time) + " s";
      if (!options.floor.contains(ev.location))
        throw InputError(where + ": location outside the floor bounds");
      const int si = match_segment(segments, ev.strike_time);
      if (si < 0)
      {
        meta.warnings.push_back(where + ": no detected segment");
        continue;
      }
      const auto& seg = segments[static_cast<std::size_t>(si)];

      std::vector<std::vector<ArrivalEstimate>> cands(layout.size());
      bool bad_label = false;
      for (std::size_t s = 0; s < layout.size(); ++s)
      {
        try
        {
          cands[s] = arrival_candidates(seg, ev, layout[s].id, profile.noise.at(layout[s].id),
                                        options.candidate_sigma);
        }
        catch (const NoArrivalCandidate&)
        {
        }
        catch (const InputError& e)
        {
          meta.warnings.push_back(where + ": " + e.what());
          bad_label = true;
          break;
        }
      }
      if (bad_label)
        continue;

      std::vector<ArrivalEstimate> chosen;
      try
      {
        chosen = shortlist_by_distance_order(cands, ev.location, layout, options.tie_tolerance,
                                             options.time_tolerance);
      }
      catch (const OrderInconsistent& e)
      {
        meta.warnings.push_back(where + ": " + e.what());
        continue;
      }
      ++meta.matched_footsteps;
      for (const auto& a : chosen)
        ratios.push_back({a.sensor_id, a.arrival_amplitude, seg.channel(a.sensor_id).peak_amplitude});
      fused.push_back({ev, std::move(chosen)});
    }
  }

  std::stable_sort(fused.begin(), fused.end(), [](const FusedFootstep& a, const FusedFootstep& b) {
    if (a.event.trial_id != b.event.trial_id)
      return a.event.trial_id < b.event.trial_id;
    return a.event.strike_time < b.event.strike_time;
  });

  auto vs = velocity_samples(fused, layout, options.v_min, options.v_max);
  meta.velocity_sample_count = static_cast<int>(vs.samples.size());
  meta.discarded_samples = vs.discarded_nonpositive + vs.discarded_out_of_range;

  const auto fit = fit_velocity_profile(vs.samples, options.floor, options.v_min, options.v_max);
  profile.velocity = fit.profile;
  profile.ratio = fit_ratio_model(ratios);

  meta.velocity_rmse = fit.rmse;
  meta.ridge_fallback = fit.ridge_fallback;
  for (const auto& w : fit.warnings)
    meta.warnings.push_back(w);

  std::set<std::pair<double, double>> seen;
  double sum = 0.0;
  int count = 0;
  for (const auto& s : vs.samples)
  {
    if (!seen.insert({s.location.x, s.location.y}).second)
      continue;
    const double w = fit.ci_width(s.location);
    meta.ci_width_max = std::max(meta.ci_width_max, w);
    sum += w;
    ++count;
  }
  meta.ci_width_mean = count > 0 ? sum / count : 0.0;
  meta.needs_more_trials = meta.ci_width_max > options.ci_limit;
  return profile;
}

} // namespace gaitvibe
