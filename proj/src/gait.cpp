#include "gaitvibe/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "gaitvibe/errors.hpp"

namespace gaitvibe
{
namespace
{

struct Weighted
{
  Point2 p;
  double t;
};

std::optional<ProgressionLine> tls(const std::vector<Weighted>& pts)
{
  Point2 c;
  double tc = 0.0;
  for (const auto& q : pts)
  {
    c = c + q.p;
    tc += q.t;
  }
  const double n = static_cast<double>(pts.size());
  c = (1.0 / n) * c;
  tc /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& q : pts)
  {
    const Point2 d = q.p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  const double scale = std::max({sxx, syy, std::abs(sxy)});
  if (!(scale > 1e-24))
    return std::nullopt;

  // Principal axis of the 2x2 scatter matrix.
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  Point2 u{std::cos(angle), std::sin(angle)};

  double trend = 0.0;
  for (const auto& q : pts)
    trend += (q.t - tc) * dot(q.p - c, u);
  if (trend < 0.0)
    u = -1.0 * u;
  return ProgressionLine{c, u};
}

} // namespace

ProgressionLine progression_line(const std::vector<GaitStep>& seq)
{
  if (seq.size() < 2)
    throw DegenerateGeometry("progression line needs at least 2 footsteps");

  std::vector<Weighted> raw;
  for (const auto& s : seq)
    raw.push_back({s.location, s.t});
  if (seq.size() >= 3)
  {
    std::vector<Weighted> mids;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k)
      mids.push_back({0.5 * (seq[k].location + seq[k + 1].location), 0.5 * (seq[k].t + seq[k + 1].t)});
    if (auto line = tls(mids))
      return *line;
  }
  if (auto line = tls(raw))
    return *line;
  throw DegenerateGeometry("all footsteps coincide");
}

Summary summarize(const std::vector<double>& values)
{
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty())
    return s;
  for (double v : values)
    s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values)
    s.std += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(values.size()));
  return s;
}

GaitParameters spatial_params(const std::vector<GaitStep>& seq)
{
  for (std::size_t k = 1; k < seq.size(); ++k)
    if (!(seq[k].t > seq[k - 1].t))
      throw InputError("footstep times must be strictly increasing");

  GaitParameters g;
  g.line = progression_line(seq);
  const Point2 u = g.line.direction;
  const Point2 n{-u.y, u.x};

  std::vector<double> lengths, widths, angles, strides;
  for (std::size_t k = 0; k + 1 < seq.size(); ++k)
  {
    const Point2 d = seq[k + 1].location - seq[k].location;
    StepParams s;
    s.from = static_cast<int>(k);
    s.t = seq[k + 1].t;
    s.step_length = std::abs(dot(d, u));
    s.step_width = std::abs(dot(d, n));
    s.step_angle_deg = std::atan2(s.step_width, s.step_length) * 180.0 / std::numbers::pi;
    g.steps.push_back(s);
    lengths.push_back(s.step_length);
    widths.push_back(s.step_width);
    angles.push_back(s.step_angle_deg);
  }

  const bool labelled = std::none_of(seq.begin(), seq.end(),
                                     [](const GaitStep& s) { return s.foot == Foot::Unknown; });
  for (std::size_t k = 0; k < seq.size(); ++k)
  {
    std::size_t j = k + 2;
    if (labelled)
    {
      j = k + 1;
      while (j < seq.size() && seq[j].foot != seq[k].foot)
        ++j;
    }
    if (j >= seq.size())
      continue;
    StrideParams s{static_cast<int>(k), static_cast<int>(j), seq[j].t,
                   distance(seq[j].location, seq[k].location)};
    g.strides.push_back(s);
    strides.push_back(s.stride_length);
  }

  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < seq.size(); ++k)
  {
    const double p = dot(seq[k].location - g.line.anchor, u);
    lo = k == 0 ? p : std::min(lo, p);
    hi = k == 0 ? p : std::max(hi, p);
  }
  const double elapsed = seq.back().t - seq.front().t;
  if (elapsed > 0.0)
    g.walking_speed = (hi - lo) / elapsed;

  g.step_length = summarize(lengths);
  g.step_width = summarize(widths);
  g.step_angle = summarize(angles);
  g.stride_length = summarize(strides);
  return g;
}

std::vector<std::pair<int, int>> match_by_time(const std::vector<double>& estimated,
                                               const std::vector<double>& truth, double max_gap)
{
  std::vector<std::tuple<double, int, int>> pairs;
  for (std::size_t i = 0; i < estimated.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j)
    {
      const double gap = std::abs(estimated[i] - truth[j]);
      if (gap <= max_gap)
        pairs.emplace_back(gap, static_cast<int>(i), static_cast<int>(j));
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> used_e(estimated.size(), false), used_t(truth.size(), false);
  std::vector<std::pair<int, int>> out;
  for (const auto& [gap, i, j] : pairs)
  {
    if (used_e[i] || used_t[j])
      continue;
    used_e[i] = used_t[j] = true;
    out.emplace_back(i, j);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

namespace
{

class ErrorAccumulator
{
public:
  void add(double est, double truth)
  {
    abs_sum_ += std::abs(est - truth);
    ++n_;
    if (std::abs(truth) < kMinTruthValue)
    {
      ++excluded_;
      return;
    }
    pct_sum_ += std::abs(est - truth) / std::abs(truth);
    ++pct_n_;
  }

  ParamError result() const
  {
    ParamError e;
    e.compared = pct_n_;
    e.excluded = excluded_;
    e.mae = n_ > 0 ? abs_sum_ / n_ : 0.0;
    e.mape = pct_n_ > 0 ? 100.0 * pct_sum_ / pct_n_ : 0.0;
    return e;
  }

private:
  double abs_sum_ = 0.0;
  double pct_sum_ = 0.0;
  int n_ = 0;
  int pct_n_ = 0;
  int excluded_ = 0;
};

} // namespace

GaitComparison compare_params(const std::vector<GaitStep>& estimated, const std::vector<GaitStep>& truth,
                              double max_gap)
{
  std::vector<double> te, tt;
  for (const auto& s : estimated)
    te.push_back(s.t);
  for (const auto& s : truth)
    tt.push_back(s.t);
  const auto pairs = match_by_time(te, tt, max_gap);
  if (pairs.empty())
    throw EvalError("no estimated footstep lies within " + std::to_string(max_gap) + " s of the truth");

  GaitComparison c;
  c.matched = static_cast<int>(pairs.size());
  c.missed = static_cast<int>(truth.size() - pairs.size());
  c.spurious = static_cast<int>(estimated.size() - pairs.size());

  std::vector<GaitStep> es, ts;
  for (const auto& [i, j] : pairs)
  {
    es.push_back(estimated[i]);
    ts.push_back(truth[j]);
    // Shared timeline so both sequences see identical step pairing.
    es.back().t = truth[j].t;
    es.back().foot = truth[j].foot;
  }
  if (es.size() < 2)
    return c;

  const auto ge = spatial_params(es);
  const auto gt = spatial_params(ts);
  ErrorAccumulator len, wid, ang, str, spd;
  for (std::size_t k = 0; k < gt.steps.size(); ++k)
  {
    len.add(ge.steps[k].step_length, gt.steps[k].step_length);
    wid.add(ge.steps[k].step_width, gt.steps[k].step_width);
    ang.add(ge.steps[k].step_angle_deg, gt.steps[k].step_angle_deg);
  }
  for (std::size_t k = 0; k < gt.strides.size() && k < ge.strides.size(); ++k)
    str.add(ge.strides[k].stride_length, gt.strides[k].stride_length);
  if (ge.walking_speed && gt.walking_speed)
    spd.add(*ge.walking_speed, *gt.walking_speed);

  c.step_length = len.result();
  c.step_width = wid.result();
  c.step_angle = ang.result();
  c.stride_length = str.result();
  c.walking_speed = spd.result();

  double sum = 0.0;
  int n = 0;
  for (const ParamError* p : {&c.step_length, &c.step_width, &c.step_angle, &c.stride_length, &c.walking_speed})
    if (p->compared > 0)
    {
      sum += p->mape;
      ++n;
    }
  c.mean_mape = n > 0 ? sum / n : 0.0;
  return c;
}

} // namespace gaitvibe
