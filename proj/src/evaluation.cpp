#include "gaitvibe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gaitvibe/errors.hpp"

namespace gaitvibe::eval
{

using nlohmann::json;

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

double percentile(std::vector<double> v, double q)
{
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

LocalizationMetrics localization_metrics(const std::vector<LocalizedFootstep>& estimates,
                                         const std::vector<FootstepEvent>& truth, double max_gap)
{
  std::vector<double> te, tt;
  for (const auto& e : estimates)
    te.push_back(e.time);
  for (const auto& t : truth)
    tt.push_back(t.strike_time);
  LocalizationMetrics m;
  for (const auto& [i, j] : match_by_time(te, tt, max_gap))
    m.errors.push_back(distance(estimates[i].location, truth[j].location));
  m.count = static_cast<int>(m.errors.size());
  m.missed = static_cast<int>(truth.size()) - m.count;
  m.spurious = static_cast<int>(estimates.size()) - m.count;
  if (m.errors.empty())
    return m;
  for (double e : m.errors)
    m.mae += e;
  m.mae /= m.count;
  for (double e : m.errors)
    m.std += (e - m.mae) * (e - m.mae);
  m.std = std::sqrt(m.std / m.count);
  m.median = median(m.errors);
  m.p90 = percentile(m.errors, 0.9);
  m.max = *std::max_element(m.errors.begin(), m.errors.end());
  return m;
}

std::vector<GaitStep> to_gait(const std::vector<LocalizedFootstep>& steps)
{
  std::vector<GaitStep> out;
  for (const auto& s : steps)
    out.push_back({s.time, s.location, Foot::Unknown});
  return out;
}

std::vector<GaitStep> to_gait(const std::vector<FootstepEvent>& events)
{
  std::vector<GaitStep> out;
  for (const auto& e : events)
    out.push_back({e.strike_time, e.location, e.foot});
  return out;
}

TrialRun run_trial(const VibrationRecord& record, const std::vector<FootstepEvent>& truth,
                   const CalibrationProfile& profile, const TrackOptions& options,
                   const BaselineOptions& baseline)
{
  TrialRun run;
  run.trial_id = truth.empty() ? 0 : truth.front().trial_id;
  run.truth = truth;
  auto tr = track_trial(record, profile, options);
  run.enhanced = tr.footsteps;
  run.failures = tr.failures;

  auto bopts = baseline;
  bopts.v_min = profile.velocity.v_min;
  bopts.v_max = profile.velocity.v_max;
  const double max_dt = options.floor.diagonal() / profile.velocity.v_min;
  const auto smooth = static_cast<std::size_t>(
      std::max(0.0, std::round(0.5 * options.segmentation.smoothing_s * profile.sample_rate_hz)));
  for (std::size_t i = 0; i < tr.segments.size(); ++i)
  {
    const auto& seg = tr.segments[i];
    try
    {
      const auto arrivals = threshold_arrivals(seg, profile.noise, options.segmentation.threshold_sigma,
                                               PickerSignal::Detection, smooth);
      const auto t = tdoa(arrivals, seg, max_dt);
      auto step = baseline_localize(t, options.floor, bopts);
      step.seq = static_cast<int>(i);
      step.segment_time = seg.center_time;
      run.baseline.push_back(step);
    }
    catch (const InputClass&)
    {
      // fewer than three sensors crossed the threshold
    }
    catch (const Error&)
    {
    }
  }
  return run;
}

namespace
{

void merge(ParamError& into, const ParamError& add, double& weighted_abs, int& abs_n)
{
  const int n = into.compared + add.compared;
  if (n > 0)
    into.mape = (into.mape * into.compared + add.mape * add.compared) / n;
  into.compared = n;
  into.excluded += add.excluded;
  const int m = add.compared + add.excluded;
  weighted_abs += add.mae * m;
  abs_n += m;
  into.mae = abs_n > 0 ? weighted_abs / abs_n : 0.0;
}

struct GaitPool
{
  GaitComparison total;
  double abs[5] = {};
  int n[5] = {};
  bool any = false;

  void add(const GaitComparison& c)
  {
    any = true;
    merge(total.step_length, c.step_length, abs[0], n[0]);
    merge(total.step_width, c.step_width, abs[1], n[1]);
    merge(total.step_angle, c.step_angle, abs[2], n[2]);
    merge(total.stride_length, c.stride_length, abs[3], n[3]);
    merge(total.walking_speed, c.walking_speed, abs[4], n[4]);
    total.matched += c.matched;
    total.missed += c.missed;
    total.spurious += c.spurious;
  }

  std::optional<GaitComparison> result()
  {
    if (!any)
      return std::nullopt;
    double sum = 0.0;
    int k = 0;
    for (const ParamError* p : {&total.step_length, &total.step_width, &total.step_angle,
                                &total.stride_length, &total.walking_speed})
      if (p->compared > 0)
      {
        sum += p->mape;
        ++k;
      }
    total.mean_mape = k > 0 ? sum / k : 0.0;
    return total;
  }
};

LocalizationMetrics pool(const std::vector<LocalizationMetrics>& parts)
{
  LocalizationMetrics m;
  for (const auto& p : parts)
  {
    m.errors.insert(m.errors.end(), p.errors.begin(), p.errors.end());
    m.missed += p.missed;
    m.spurious += p.spurious;
  }
  m.count = static_cast<int>(m.errors.size());
  if (m.errors.empty())
    return m;
  for (double e : m.errors)
    m.mae += e;
  m.mae /= m.count;
  for (double e : m.errors)
    m.std += (e - m.mae) * (e - m.mae);
  m.std = std::sqrt(m.std / m.count);
  m.median = median(m.errors);
  m.p90 = percentile(m.errors, 0.9);
  m.max = *std::max_element(m.errors.begin(), m.errors.end());
  return m;
}

} // namespace

SuiteReport evaluate_suite(const std::string& suite, int calibration_trials, const TrackOptions& options,
                           const CalibrationOptions& calib)
{
  const auto scenarios = sim::scenario_suite(suite);
  if (calibration_trials < 1 || calibration_trials >= static_cast<int>(scenarios.size()))
    throw ConfigError("calibration trial count must leave at least one trial to evaluate");

  SuiteReport rep;
  rep.suite = suite;
  rep.calibration_trials = calibration_trials;
  std::vector<Trial> fusion;
  std::vector<sim::SimResult> operating;
  for (std::size_t k = 0; k < scenarios.size(); ++k)
  {
    auto res = sim::synthesize(scenarios[k]);
    if (static_cast<int>(k) < calibration_trials)
      fusion.push_back({std::move(res.record), std::move(res.events)});
    else
      operating.push_back(std::move(res));
  }
  rep.profile = calibrate(fusion, calib);

  std::vector<LocalizationMetrics> enh, base;
  GaitPool ge, gb;
  for (const auto& res : operating)
  {
    auto run = run_trial(res.record, res.events, rep.profile, options);
    enh.push_back(localization_metrics(run.enhanced, run.truth));
    base.push_back(localization_metrics(run.baseline, run.truth));
    const auto truth = to_gait(run.truth);
    try
    {
      ge.add(compare_params(to_gait(run.enhanced), truth));
    }
    catch (const EvalError&)
    {
    }
    try
    {
      gb.add(compare_params(to_gait(run.baseline), truth));
    }
    catch (const EvalError&)
    {
    }
    rep.runs.push_back(std::move(run));
  }
  rep.enhanced = pool(enh);
  rep.baseline = pool(base);
  rep.gait_enhanced = ge.result();
  rep.gait_baseline = gb.result();
  return rep;
}

json metrics_json(const LocalizationMetrics& m)
{
  return {{"count", m.count},   {"missed", m.missed}, {"spurious", m.spurious}, {"mae_m", m.mae},
          {"std_m", m.std},     {"median_m", m.median}, {"p90_m", m.p90},     {"max_m", m.max}};
}

json gait_json(const GaitComparison& g)
{
  const auto p = [](const ParamError& e) {
    return json{{"mape_pct", e.mape}, {"mae", e.mae}, {"compared", e.compared}, {"excluded", e.excluded}};
  };
  return {{"matched", g.matched},
          {"missed", g.missed},
          {"spurious", g.spurious},
          {"mean_mape_pct", g.mean_mape},
          {"step_length", p(g.step_length)},
          {"step_width", p(g.step_width)},
          {"step_angle", p(g.step_angle)},
          {"stride_length", p(g.stride_length)},
          {"walking_speed", p(g.walking_speed)}};
}

json gait_report_json(const GaitParameters& g)
{
  const auto s = [](const Summary& v) { return json{{"mean", v.mean}, {"std", v.std}, {"count", v.count}}; };
  json steps = json::array();
  for (const auto& st : g.steps)
    steps.push_back({{"from", st.from},
                     {"t_s", st.t},
                     {"step_length_m", st.step_length},
                     {"step_width_m", st.step_width},
                     {"step_angle_deg", st.step_angle_deg}});
  json strides = json::array();
  for (const auto& st : g.strides)
    strides.push_back({{"from", st.from}, {"to", st.to}, {"t_s", st.t}, {"stride_length_m", st.stride_length}});
  json out = {{"progression_line",
               {{"anchor", {g.line.anchor.x, g.line.anchor.y}},
                {"direction", {g.line.direction.x, g.line.direction.y}}}},
              {"steps", steps},
              {"strides", strides},
              {"summary",
               {{"step_length_m", s(g.step_length)},
                {"step_width_m", s(g.step_width)},
                {"step_angle_deg", s(g.step_angle)},
                {"stride_length_m", s(g.stride_length)}}}};
  out["walking_speed_mps"] = g.walking_speed ? json(*g.walking_speed) : json(nullptr);
  return out;
}

namespace
{

std::string fmt(double v, int digits = 3)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s)
  {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

} // namespace

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<BarSeries>& bars)
{
  const double w = 160.0 + 110.0 * static_cast<double>(bars.size());
  const double h = 360.0, left = 70.0, top = 40.0, bottom = 60.0;
  const double plot_h = h - top - bottom;
  double ymax = 0.0;
  for (const auto& b : bars)
    ymax = std::max(ymax, b.value + b.error);
  if (!(ymax > 0.0))
    ymax = 1.0;
  ymax *= 1.15;
  const auto y = [&](double v) { return top + plot_h * (1.0 - v / ymax); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w, 0) + "\" height=\"" +
                  fmt(h, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(w / 2, 0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
  s += "<text transform=\"translate(18," + fmt(top + plot_h / 2, 0) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(y_label) + "</text>\n";
  s += "<line x1=\"" + fmt(left, 0) + "\" y1=\"" + fmt(top, 0) + "\" x2=\"" + fmt(left, 0) + "\" y2=\"" +
       fmt(top + plot_h, 0) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(left, 0) + "\" y1=\"" + fmt(top + plot_h, 0) + "\" x2=\"" + fmt(w - 20, 0) +
       "\" y2=\"" + fmt(top + plot_h, 0) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k)
  {
    const double v = ymax * k / 4.0;
    s += "<text x=\"" + fmt(left - 6, 0) + "\" y=\"" + fmt(y(v) + 4, 1) + "\" text-anchor=\"end\">" +
         fmt(v, 2) + "</text>\n";
  }
  static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
  for (std::size_t i = 0; i < bars.size(); ++i)
  {
    const auto& b = bars[i];
    const double x = left + 30.0 + 110.0 * static_cast<double>(i);
    s += "<rect x=\"" + fmt(x, 1) + "\" y=\"" + fmt(y(b.value), 1) + "\" width=\"70\" height=\"" +
         fmt(top + plot_h - y(b.value), 1) + "\" fill=\"" + colors[i % 6] + "\"/>\n";
    if (b.error > 0.0)
    {
      const double cx = x + 35.0;
      s += "<line x1=\"" + fmt(cx, 1) + "\" y1=\"" + fmt(y(b.value + b.error), 1) + "\" x2=\"" + fmt(cx, 1) +
           "\" y2=\"" + fmt(y(std::max(0.0, b.value - b.error)), 1) + "\" stroke=\"black\"/>\n";
      for (double e : {b.value + b.error, std::max(0.0, b.value - b.error)})
        s += "<line x1=\"" + fmt(cx - 8, 1) + "\" y1=\"" + fmt(y(e), 1) + "\" x2=\"" + fmt(cx + 8, 1) +
             "\" y2=\"" + fmt(y(e), 1) + "\" stroke=\"black\"/>\n";
    }
    s += "<text x=\"" + fmt(x + 35, 1) + "\" y=\"" + fmt(top + plot_h + 18, 1) + "\" text-anchor=\"middle\">" +
         escape(b.label) + "</text>\n";
    s += "<text x=\"" + fmt(x + 35, 1) + "\" y=\"" + fmt(y(b.value) - 6, 1) + "\" text-anchor=\"middle\">" +
         fmt(b.value, 3) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

} // namespace gaitvibe::eval
