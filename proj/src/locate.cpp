#include "gaitvibe/locate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaitvibe/dsp.hpp"
#include "gaitvibe/errors.hpp"

namespace gaitvibe
{

LocationProposal propose_next(std::optional<Point2> prev, Rect floor,
                              const std::vector<SensorInfo>& sensors, double size,
                              double extra_margin)
{
  LocationProposal p;
  if (prev)
  {
    p.box = Rect::centered(*prev, 0.5 * size, 0.5 * size).dilated(extra_margin).intersect(floor);
    if (p.box.empty())
      p.box = Rect::centered(floor.clamp(*prev), 0.0, 0.0);
    p.center = p.box.clamp(*prev);
    return p;
  }
  Rect area = floor;
  if (!sensors.empty())
  {
    area = {sensors.front().position.x, sensors.front().position.x, sensors.front().position.y,
            sensors.front().position.y};
    for (const auto& s : sensors)
    {
      area.x_min = std::min(area.x_min, s.position.x);
      area.x_max = std::max(area.x_max, s.position.x);
      area.y_min = std::min(area.y_min, s.position.y);
      area.y_max = std::max(area.y_max, s.position.y);
    }
    area = area.dilated(kSoftBoundaryM + extra_margin);
  }
  p.box = area.intersect(floor);
  if (p.box.empty())
    p.box = floor;
  p.center = p.box.center();
  p.is_initial = true;
  return p;
}

std::vector<Point2> grid_points(const Rect& box, double resolution)
{
  if (!(resolution > 0.0))
    throw InputError("grid resolution must be positive");
  if (box.empty())
    throw InputError("search area is empty");
  const auto nx = static_cast<long>(std::floor(box.width() / resolution + 1e-9)) + 1;
  const auto ny = static_cast<long>(std::floor(box.height() / resolution + 1e-9)) + 1;
  // Coordinates snapped to the nanometre so printed grid points stay clean.
  const auto snap = [](double v, double lo, double hi) {
    return std::clamp(std::round(v * 1e9) / 1e9, lo, hi);
  };
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(nx * ny));
  for (long i = 0; i < nx; ++i)
    for (long j = 0; j < ny; ++j)
      out.push_back({snap(box.x_min + static_cast<double>(i) * resolution, box.x_min, box.x_max),
                     snap(box.y_min + static_cast<double>(j) * resolution, box.y_min, box.y_max)});
  return out;
}

OrderConstraints proposal_order(const std::vector<SensorInfo>& sensors, const Rect& box,
                                double resolution, double tie_tolerance)
{
  const std::size_t n = sensors.size();
  OrderConstraints order;
  order.must_precede.assign(n, std::vector<bool>(n, true));
  for (std::size_t a = 0; a < n; ++a)
    order.must_precede[a][a] = false;
  for (const Point2& p : grid_points(box, resolution))
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (order.must_precede[a][b] &&
            !(distance(sensors[a].position, p) < distance(sensors[b].position, p) - tie_tolerance))
          order.must_precede[a][b] = false;
  return order;
}

ArrivalSelection estimate_arrivals(const FootstepSegment& segment, const LocationProposal& proposal,
                                   const CalibrationProfile& profile, const ArrivalOptions& options)
{
  std::vector<SensorInfo> sensors;
  std::vector<std::vector<ArrivalEstimate>> cands;
  for (const auto& ch : segment.channels)
  {
    const auto& noise = profile.noise.at(ch.sensor_id);
    const auto& ratio = profile.ratio.at(ch.sensor_id);
    const double bound = noise.bound(options.candidate_sigma);
    const auto& e = ch.arrival_envelope;

    std::vector<ArrivalEstimate> kept;
    std::size_t first = e.size();
    for (std::size_t j = 0; j <= ch.peak_index && j < e.size(); ++j)
      if (e[j] > bound)
      {
        first = j;
        break;
      }
    if (first < e.size())
    {
      const double half = std::max(options.ratio_sigmas * ratio.std, options.min_ratio_halfwidth);
      const double lo = (ratio.mean - half) * ch.peak_amplitude;
      const double hi = (ratio.mean + half) * ch.peak_amplitude;
      for (const auto& c : envelope_peaks(segment, ch, segment.time_at(static_cast<double>(first)), bound))
        if (c.arrival_amplitude >= lo && c.arrival_amplitude <= hi)
          kept.push_back(c);
    }
    sensors.push_back({ch.sensor_id, ch.position});
    cands.push_back(std::move(kept));
  }

  const auto usable = std::count_if(cands.begin(), cands.end(), [](const auto& c) { return !c.empty(); });
  if (usable < 3)
    throw NoArrivalFound("only " + std::to_string(usable) + " sensors have arrival candidates");

  auto order = proposal_order(sensors, proposal.box, options.grid_resolution, options.tie_tolerance);
  order.time_tolerance = options.time_tolerance;
  ArrivalSelection sel;
  sel.arrivals = earliest_consistent(cands, order);
  if (sel.arrivals.empty())
  {
    sel.arrivals = earliest_consistent(cands, OrderConstraints{});
    sel.order_relaxed = true;
  }
  return sel;
}

const TdoaEntry& TdoaVector::reference() const
{
  for (const auto& e : entries)
    if (e.sensor_id == reference_id)
      return e;
  throw InputError("TDoA vector lacks its reference sensor");
}

TdoaVector tdoa(const std::vector<ArrivalEstimate>& arrivals, const std::vector<SensorInfo>& sensors,
                int reference_id, double max_dt)
{
  if (arrivals.size() < 3)
    throw InputError("TDoA needs at least 3 arrivals, got " + std::to_string(arrivals.size()));
  const auto ref = std::find_if(arrivals.begin(), arrivals.end(),
                                [&](const ArrivalEstimate& a) { return a.sensor_id == reference_id; });
  if (ref == arrivals.end())
    throw InputError("reference sensor " + std::to_string(reference_id) + " has no arrival");

  TdoaVector out;
  out.reference_id = reference_id;
  out.reference_time = ref->arrival_time;
  for (const auto& a : arrivals)
  {
    const auto s = std::find_if(sensors.begin(), sensors.end(),
                                [&](const SensorInfo& si) { return si.id == a.sensor_id; });
    if (s == sensors.end())
      throw InputError("arrival for unknown sensor " + std::to_string(a.sensor_id));
    const double dt = a.arrival_time - ref->arrival_time;
    if (std::abs(dt) > max_dt)
      throw ArrivalRejected("sensor " + std::to_string(a.sensor_id) + " TDoA " + std::to_string(dt) +
                            " s exceeds the physical bound " + std::to_string(max_dt) + " s");
    out.entries.push_back({a.sensor_id, s->position, dt});
  }
  return out;
}

TdoaVector tdoa(const std::vector<ArrivalEstimate>& arrivals, const FootstepSegment& segment,
                double max_dt)
{
  std::vector<SensorInfo> sensors;
  int ref = 0;
  double best = -1.0;
  for (const auto& a : arrivals)
  {
    const auto& ch = segment.channel(a.sensor_id);
    sensors.push_back({ch.sensor_id, ch.position});
    if (ch.peak_amplitude > best)
    {
      best = ch.peak_amplitude;
      ref = ch.sensor_id;
    }
  }
  return tdoa(arrivals, sensors, ref, max_dt);
}

std::string flags_to_string(unsigned flags)
{
  static const std::pair<unsigned, const char*> names[] = {{kFlagInitial, "initial"},
                                                          {kFlagRecovery, "recovery"},
                                                          {kFlagOrderRelaxed, "order_relaxed"},
                                                          {kFlagTruncated, "truncated"},
                                                          {kFlagBoundary, "boundary"}};
  std::string out;
  for (const auto& [bit, name] : names)
    if (flags & bit)
    {
      if (!out.empty())
        out += '|';
      out += name;
    }
  return out;
}

double tdoa_residual(const TdoaVector& t, Point2 p, double v, ResidualNorm norm)
{
  const double dref = distance(t.reference().position, p);
  double acc = 0.0;
  for (const auto& e : t.entries)
  {
    const double r = (distance(e.position, p) - dref) / v - e.dt;
    acc += norm == ResidualNorm::L2 ? r * r : std::abs(r);
  }
  return norm == ResidualNorm::L2 ? std::sqrt(acc) : acc;
}

namespace
{

struct Best
{
  double residual = std::numeric_limits<double>::infinity();
  Point2 p;
  double v = 0.0;
  double center_distance = 0.0;
  bool set = false;

  void offer(double r, Point2 q, double vq, Point2 center)
  {
    const double dc = distance(q, center);
    const double tol = std::max(1e-12 * std::abs(residual), 1e-15);
    bool take = false;
    if (!set || r < residual - tol)
      take = true;
    else if (std::abs(r - residual) <= tol)
    {
      if (dc != center_distance)
        take = dc < center_distance;
      else
        take = q.x < p.x || (q.x == p.x && q.y < p.y);
    }
    if (take)
    {
      residual = r;
      p = q;
      v = vq;
      center_distance = dc;
      set = true;
    }
  }
};

LocalizedFootstep finish(const TdoaVector& t, const Best& b)
{
  LocalizedFootstep out;
  out.location = b.p;
  out.velocity = b.v;
  out.residual = b.residual;
  out.time = t.reference_time - distance(t.reference().position, b.p) / b.v;
  return out;
}

} // namespace

LocalizedFootstep localize(const TdoaVector& t, const LocationProposal& proposal,
                           const VelocityProfile& profile, const GridOptions& options)
{
  Best best;
  for (const Point2& p : grid_points(proposal.box, options.resolution))
  {
    const double v = profile(p);
    best.offer(tdoa_residual(t, p, v, options.norm), p, v, proposal.center);
  }
  auto out = finish(t, best);
  const auto& b = proposal.box;
  const double eps = 1e-9;
  if (!proposal.is_initial && (std::abs(best.p.x - b.x_min) < eps || std::abs(best.p.x - b.x_max) < eps ||
                               std::abs(best.p.y - b.y_min) < eps || std::abs(best.p.y - b.y_max) < eps))
    out.flags |= kFlagBoundary;
  return out;
}

LocalizedFootstep baseline_localize(const TdoaVector& t, const Rect& area, const BaselineOptions& options)
{
  if (!(options.v_step > 0.0) || !(options.v_min > 0.0) || !(options.v_min <= options.v_max))
    throw InputError("baseline velocity grid is invalid");
  std::vector<double> speeds;
  for (long k = 0;; ++k)
  {
    const double v = options.v_min + static_cast<double>(k) * options.v_step;
    if (v > options.v_max + 1e-9)
      break;
    speeds.push_back(v);
  }
  const Point2 center = area.center();
  Best best;
  for (const Point2& p : grid_points(area, options.resolution))
    for (double v : speeds)
      best.offer(tdoa_residual(t, p, v, options.norm), p, v, center);
  return finish(t, best);
}

std::vector<ArrivalEstimate> threshold_arrivals(const FootstepSegment& segment, const NoiseModel& noise,
                                                double z, PickerSignal signal,
                                                std::size_t smoothing_half_width)
{
  std::vector<ArrivalEstimate> out;
  for (const auto& ch : segment.channels)
  {
    const double bound = noise.at(ch.sensor_id).bound(z);
    std::vector<double> e;
    if (signal == PickerSignal::Arrival)
      e = ch.arrival_envelope;
    else
    {
      std::vector<double> mag(ch.detection.size());
      std::transform(ch.detection.begin(), ch.detection.end(), mag.begin(),
                     [](double v) { return std::abs(v); });
      e = dsp::moving_average(mag, smoothing_half_width);
    }
    if (e.empty())
      continue;
    const auto peak = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
    for (std::size_t j = 0; j <= peak; ++j)
      if (e[j] > bound)
      {
        out.push_back({ch.sensor_id, segment.time_at(static_cast<double>(j)), e[j]});
        break;
      }
  }
  return out;
}

TrackResult track_trial(const VibrationRecord& record, const CalibrationProfile& profile,
                        const TrackOptions& options)
{
  TrackResult res;
  if (record.channels.empty() || record.sample_count() == 0)
    return res;
  record.validate();
  if (record.layout() != profile.sensors)
    throw InputError("record sensor layout does not match the calibration profile");

  auto seg_opts = options.segmentation;
  seg_opts.detection = profile.detection_band;
  seg_opts.arrival = profile.arrival_band;
  res.segments = detect_footsteps(record, profile.noise, seg_opts);
  const auto sensors = record.layout();

  std::vector<double> intervals;
  for (std::size_t i = 1; i < res.segments.size(); ++i)
    intervals.push_back(res.segments[i].center_time - res.segments[i - 1].center_time);
  double median_interval = 0.0;
  if (!intervals.empty())
  {
    std::nth_element(intervals.begin(), intervals.begin() + intervals.size() / 2, intervals.end());
    median_interval = intervals[intervals.size() / 2];
  }

  const double max_dt = options.floor.diagonal() / profile.velocity.v_min;
  std::optional<Point2> prev;
  double prev_time = 0.0;
  int failures_in_row = 0;
  for (std::size_t i = 0; i < res.segments.size(); ++i)
  {
    const auto& seg = res.segments[i];
    int missed = failures_in_row;
    if (prev && median_interval > 0.0 && seg.center_time - prev_time > options.gap_factor * median_interval)
      missed = std::max(missed, static_cast<int>(std::lround((seg.center_time - prev_time) / median_interval)) - 1);
    const double margin = options.recovery_step * missed;
    const auto proposal = propose_next(prev, options.floor, sensors, options.proposal_size,
                                       prev ? margin : 0.0);
    try
    {
      const auto sel = estimate_arrivals(seg, proposal, profile, options.arrivals);
      const auto t = tdoa(sel.arrivals, seg, max_dt);
      auto step = localize(t, proposal, profile.velocity, options.grid);
      step.seq = static_cast<int>(i);
      step.segment_time = seg.center_time;
      if (sel.order_relaxed)
        step.flags |= kFlagOrderRelaxed;
      if (proposal.is_initial)
        step.flags |= kFlagInitial;
      if (missed > 0 && prev)
        step.flags |= kFlagRecovery;
      if (seg.truncated)
        step.flags |= kFlagTruncated;
      step.note = "residual " + std::to_string(step.residual * 1e3) + " ms";
      res.footsteps.push_back(step);
      prev = step.location;
      prev_time = seg.center_time;
      failures_in_row = 0;
    }
    catch (const InputClass&)
    {
      throw;
    }
    catch (const Error& e)
    {
      res.failures.push_back({static_cast<int>(i), seg.center_time, e.what()});
      ++failures_in_row;
    }
  }
  return res;
}

} // namespace gaitvibe
