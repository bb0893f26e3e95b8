#include "gaitvibe/simfloor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaitvibe/dsp.hpp"
#include "gaitvibe/errors.hpp"

namespace gaitvibe::sim
{

using nlohmann::json;

double VelocityField::operator()(Point2 p) const
{
  switch (kind)
  {
  case FieldKind::Constant:
    return constant;
  case FieldKind::Polynomial:
    return polynomial.raw(p);
  case FieldKind::Columns:
  {
    double dip = 0.0;
    for (double cx : columns_x)
    {
      const double z = (p.x - cx) / column_width;
      dip = std::max(dip, std::exp(-0.5 * z * z));
    }
    return v_fast - (v_fast - v_slow) * dip;
  }
  }
  return constant;
}

std::vector<SensorInfo> default_layout()
{
  return {{1, {0.5, -1.0}}, {2, {2.5, 1.0}}, {3, {4.5, -1.0}}, {4, {6.5, 1.0}}};
}

void FloorModel::validate() const
{
  if (bounds.empty() || !(bounds.width() > 0.0) || !(bounds.height() > 0.0))
    throw ScenarioError("floor bounds are empty");
  if (sensors.size() < 3)
    throw ScenarioError("floor needs at least 3 sensors");
  if (!(attenuation >= 0.0))
    throw ScenarioError("attenuation must be non-negative");
  if (velocity.kind == FieldKind::Columns && !(velocity.column_width > 0.0))
    throw ScenarioError("column width must be positive");
  const int nx = static_cast<int>(std::ceil(bounds.width() / 0.05));
  const int ny = static_cast<int>(std::ceil(bounds.height() / 0.05));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
    {
      const Point2 p{std::min(bounds.x_max, bounds.x_min + 0.05 * i),
                     std::min(bounds.y_max, bounds.y_min + 0.05 * j)};
      const double v = velocity(p);
      if (!(v >= kDefaultVMin && v <= kDefaultVMax))
        throw ScenarioError("velocity field leaves [30, 300] m/s at (" + std::to_string(p.x) +
                            ", " + std::to_string(p.y) + ")");
    }
}

double GaitTemplate::force(int step) const
{
  return step >= 0 && static_cast<std::size_t>(step) < force_scale.size() ? force_scale[step] : 1.0;
}

std::vector<FootstepEvent> GaitTemplate::footsteps(int trial_id) const
{
  const Point2 u{std::cos(heading), std::sin(heading)};
  const Point2 n{-u.y, u.x};
  const Foot other = first_foot == Foot::Left ? Foot::Right : Foot::Left;
  std::vector<FootstepEvent> out;
  for (int k = 0; k < step_count; ++k)
  {
    const Foot foot = k % 2 == 0 ? first_foot : other;
    const double side = foot == Foot::Right ? -0.5 : 0.5;
    const Point2 p = start + (k * step_length) * u + (side * step_width) * n;
    out.push_back({trial_id, first_strike + k / cadence, p, foot});
  }
  return out;
}

double Waveform::operator()(double tau) const
{
  const double lobe = onset_fraction * std::exp(-0.5 * (tau / onset_width_s) * (tau / onset_width_s));
  double r = 0.0;
  if (tau >= 0.0 && tau <= ramp_s)
  {
    const double h = 0.5 * (1.0 - std::cos(std::numbers::pi * tau / ramp_s));
    r = h * h;
  }
  else if (tau > ramp_s)
    r = std::exp(-(tau - ramp_s) / decay_s);
  const double w = 2.0 * std::numbers::pi * tau;
  return (lobe + r) * std::cos(carrier_hz * w) + low_gain * r * std::sin(low_hz * w);
}

double Waveform::support_start() const { return -8.0 * onset_width_s; }

double Waveform::support_end() const { return ramp_s + 32.0 * decay_s; }

double SimScenario::noise_for(std::size_t channel) const
{
  if (noise_std.empty())
    return 0.0;
  return noise_std.size() == 1 ? noise_std.front() : noise_std.at(channel);
}

double noise_std_for_snr(double snr_db, const Waveform& wave, double attenuation)
{
  return wave.onset_fraction * std::exp(-attenuation) / std::pow(10.0, snr_db / 20.0);
}

double NormalStream::operator()()
{
  if (has_spare_)
  {
    has_spare_ = false;
    return spare_;
  }
  const auto uniform = [this] {
    return 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  };
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double a = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

SimResult synthesize(const SimScenario& sc)
{
  sc.floor.validate();
  if (!(sc.sample_rate_hz > 0.0))
    throw ScenarioError("sample rate must be positive");
  if (!(sc.gait.step_length > 0.0) || !(sc.gait.cadence > 0.0) || sc.gait.step_count < 0)
    throw ScenarioError("step length and cadence must be positive");
  if (!(sc.white_fraction >= 0.0 && sc.white_fraction <= 1.0))
    throw ScenarioError("white_fraction must lie in [0, 1]");
  if (sc.noise_std.size() > 1 && sc.noise_std.size() != sc.floor.sensors.size())
    throw ScenarioError("noise_std needs one value or one per sensor");
  for (double s : sc.noise_std)
    if (!(s >= 0.0))
      throw ScenarioError("noise std must be non-negative");

  SimResult res;
  res.events = sc.gait.footsteps(sc.trial_id);
  for (const auto& e : res.events)
    if (!sc.floor.bounds.contains(e.location, 1e-9))
      throw ScenarioError("footstep at (" + std::to_string(e.location.x) + ", " +
                          std::to_string(e.location.y) + ") lies outside the floor");

  const double fs = sc.sample_rate_hz;
  double duration = sc.duration_s;
  if (duration <= 0.0)
    duration = (res.events.empty() ? sc.gait.first_strike : res.events.back().strike_time) + 1.0 - sc.t0;
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));

  res.record.t0 = sc.t0;
  for (const auto& s : sc.floor.sensors)
    res.record.channels.push_back({s.id, s.position, std::vector<double>(n, 0.0), fs});

  const auto& wave = sc.waveform;
  for (std::size_t k = 0; k < res.events.size(); ++k)
  {
    const auto& ev = res.events[k];
    const double v = sc.floor.velocity(ev.location);
    for (auto& ch : res.record.channels)
    {
      const double d = distance(ch.position, ev.location);
      const double ta = ev.strike_time + d / v;
      const double amp = sc.gait.force(static_cast<int>(k)) * std::exp(-sc.floor.attenuation * d);
      res.truth.push_back({sc.trial_id, static_cast<int>(k), ch.sensor_id, ev.strike_time, ta, d,
                           amp * wave.onset_fraction, ta + wave.ramp_s});
      if (amp == 0.0)
        continue;
      const double i0 = std::ceil((ta + wave.support_start() - sc.t0) * fs);
      const double i1 = std::floor((ta + wave.support_end() - sc.t0) * fs);
      for (double i = std::max(0.0, i0); i <= i1 && i < static_cast<double>(n); i += 1.0)
      {
        const double t = sc.t0 + i / fs;
        ch.samples[static_cast<std::size_t>(i)] += amp * wave(t - ta);
      }
    }
  }

  NormalStream normal(sc.seed);
  for (std::size_t c = 0; c < res.record.channels.size(); ++c)
  {
    const double sigma = sc.noise_for(c);
    if (sigma == 0.0 || n == 0)
      continue;
    std::vector<double> white(n), low(n);
    for (auto& x : white)
      x = normal();
    for (auto& x : low)
      x = normal();
    low = dsp::bandpass(low, fs, 0.0, 60.0);
    double ss = 0.0;
    for (double x : low)
      ss += x * x;
    const double low_sd = std::sqrt(ss / static_cast<double>(n));
    const double gw = sigma * std::sqrt(sc.white_fraction);
    const double gl = low_sd > 0.0 ? sigma * std::sqrt(1.0 - sc.white_fraction) / low_sd : 0.0;
    auto& x = res.record.channels[c].samples;
    for (std::size_t i = 0; i < n; ++i)
      x[i] += gw * white[i] + gl * low[i];
  }
  return res;
}

VelocityProfile reference_polynomial_field()
{
  VelocityProfile p = VelocityProfile::constant(120.0, {0.0, 7.0, -1.0, 1.0});
  p.coefficients = {120.0, 30.0, 10.0, -20.0, 8.0, -10.0, 0.0, 0.0,
                    0.0,   0.0,  10.0, 0.0,   0.0, 0.0,   0.0};
  return p;
}

namespace
{

SimScenario walk_trial(const std::string& name, int k, std::uint64_t seed, double snr_db)
{
  SimScenario sc;
  sc.name = name;
  sc.trial_id = k;
  sc.floor.sensors = default_layout();
  constexpr double offsets[] = {-0.3, 0.0, 0.3};
  const double y = offsets[k % 3];
  if (k % 2 == 0)
  {
    sc.gait.start = {0.35, y};
    sc.gait.heading = 0.0;
  }
  else
  {
    sc.gait.start = {6.65, y};
    sc.gait.heading = std::numbers::pi;
  }
  sc.noise_std = {noise_std_for_snr(snr_db, sc.waveform, sc.floor.attenuation)};
  sc.seed = seed;
  return sc;
}

} // namespace

std::vector<std::string> suite_names() { return {"constant", "polynomial", "columns", "snr_sweep"}; }

std::vector<SimScenario> scenario_suite(const std::string& name)
{
  std::vector<SimScenario> out;
  if (name == "constant")
  {
    for (int k = 0; k < 10; ++k)
      out.push_back(walk_trial(name, k, 1000 + k, 15.0));
  }
  else if (name == "polynomial")
  {
    for (int k = 0; k < 10; ++k)
    {
      auto sc = walk_trial(name, k, 2000 + k, 15.0);
      sc.floor.velocity.kind = FieldKind::Polynomial;
      sc.floor.velocity.polynomial = reference_polynomial_field();
      out.push_back(sc);
    }
  }
  else if (name == "columns")
  {
    for (int k = 0; k < 12; ++k)
    {
      auto sc = walk_trial(name, k, 3000 + k, 15.0);
      sc.floor.velocity.kind = FieldKind::Columns;
      out.push_back(sc);
    }
  }
  else if (name == "snr_sweep")
  {
    int k = 0;
    for (double snr : {5.0, 10.0, 15.0, 20.0})
      for (int r = 0; r < 5; ++r, ++k)
      {
        auto sc = walk_trial(name, k, 4000 + k, snr);
        sc.name = "snr_sweep_" + std::to_string(static_cast<int>(snr)) + "db";
        out.push_back(sc);
      }
  }
  else
    throw ConfigError("unknown scenario suite '" + name + "'");
  return out;
}

namespace
{

const char* kind_name(FieldKind k)
{
  switch (k)
  {
  case FieldKind::Polynomial:
    return "polynomial";
  case FieldKind::Columns:
    return "columns";
  case FieldKind::Constant:
    break;
  }
  return "constant";
}

template <typename T>
T value_or(const json& j, const char* key, T fallback)
{
  if (!j.contains(key))
    return fallback;
  return j.at(key).get<T>();
}

} // namespace

json scenario_to_json(const SimScenario& sc)
{
  json sensors = json::array();
  for (const auto& s : sc.floor.sensors)
    sensors.push_back({{"id", s.id}, {"x_m", s.position.x}, {"y_m", s.position.y}});
  const auto& f = sc.floor.velocity;
  const auto& b = sc.floor.bounds;
  const auto& g = sc.gait;
  const auto& w = sc.waveform;
  json forces = g.force_scale;
  return {
      {"name", sc.name},
      {"trial_id", sc.trial_id},
      {"seed", sc.seed},
      {"sample_rate_hz", sc.sample_rate_hz},
      {"t0", sc.t0},
      {"duration_s", sc.duration_s},
      {"noise_std", sc.noise_std},
      {"white_fraction", sc.white_fraction},
      {"floor",
       {{"bounds", {{"x_min", b.x_min}, {"x_max", b.x_max}, {"y_min", b.y_min}, {"y_max", b.y_max}}},
        {"attenuation", sc.floor.attenuation},
        {"sensors", sensors},
        {"velocity",
         {{"kind", kind_name(f.kind)},
          {"constant", f.constant},
          {"coefficients", f.polynomial.coefficients},
          {"columns_x", f.columns_x},
          {"v_slow", f.v_slow},
          {"v_fast", f.v_fast},
          {"column_width", f.column_width}}}}},
      {"gait",
       {{"step_length", g.step_length},
        {"step_width", g.step_width},
        {"cadence", g.cadence},
        {"start", {g.start.x, g.start.y}},
        {"heading_rad", g.heading},
        {"step_count", g.step_count},
        {"first_strike", g.first_strike},
        {"first_foot", to_string(g.first_foot)},
        {"force_scale", forces}}},
      {"waveform",
       {{"onset_fraction", w.onset_fraction},
        {"onset_width_s", w.onset_width_s},
        {"ramp_s", w.ramp_s},
        {"decay_s", w.decay_s},
        {"carrier_hz", w.carrier_hz},
        {"low_hz", w.low_hz},
        {"low_gain", w.low_gain}}}};
}

SimScenario scenario_from_json(const json& doc)
{
  SimScenario sc;
  sc.floor.sensors = default_layout();
  try
  {
    sc.name = value_or<std::string>(doc, "name", sc.name);
    sc.trial_id = value_or(doc, "trial_id", sc.trial_id);
    sc.seed = value_or<std::uint64_t>(doc, "seed", sc.seed);
    sc.sample_rate_hz = value_or(doc, "sample_rate_hz", sc.sample_rate_hz);
    sc.t0 = value_or(doc, "t0", sc.t0);
    sc.duration_s = value_or(doc, "duration_s", sc.duration_s);
    sc.white_fraction = value_or(doc, "white_fraction", sc.white_fraction);

    if (doc.contains("floor"))
    {
      const auto& f = doc.at("floor");
      if (f.contains("bounds"))
      {
        const auto& b = f.at("bounds");
        sc.floor.bounds = {b.at("x_min").get<double>(), b.at("x_max").get<double>(),
                           b.at("y_min").get<double>(), b.at("y_max").get<double>()};
      }
      sc.floor.attenuation = value_or(f, "attenuation", sc.floor.attenuation);
      if (f.contains("sensors"))
      {
        sc.floor.sensors.clear();
        for (const auto& s : f.at("sensors"))
          sc.floor.sensors.push_back({s.at("id").get<int>(), {s.at("x_m").get<double>(), s.at("y_m").get<double>()}});
      }
      if (f.contains("velocity"))
      {
        const auto& v = f.at("velocity");
        auto& field = sc.floor.velocity;
        const auto kind = value_or<std::string>(v, "kind", "constant");
        if (kind == "constant")
          field.kind = FieldKind::Constant;
        else if (kind == "polynomial")
          field.kind = FieldKind::Polynomial;
        else if (kind == "columns")
          field.kind = FieldKind::Columns;
        else
          throw ScenarioError("unknown velocity field kind '" + kind + "'");
        field.constant = value_or(v, "constant", field.constant);
        field.polynomial.bounds = sc.floor.bounds;
        if (v.contains("coefficients"))
        {
          const auto c = v.at("coefficients").get<std::vector<double>>();
          if (c.size() != static_cast<std::size_t>(kProfileTerms))
            throw ScenarioError("polynomial field needs 15 coefficients");
          std::copy(c.begin(), c.end(), field.polynomial.coefficients.begin());
        }
        field.columns_x = value_or(v, "columns_x", field.columns_x);
        field.v_slow = value_or(v, "v_slow", field.v_slow);
        field.v_fast = value_or(v, "v_fast", field.v_fast);
        field.column_width = value_or(v, "column_width", field.column_width);
      }
    }
    if (doc.contains("gait"))
    {
      const auto& g = doc.at("gait");
      auto& t = sc.gait;
      t.step_length = value_or(g, "step_length", t.step_length);
      t.step_width = value_or(g, "step_width", t.step_width);
      t.cadence = value_or(g, "cadence", t.cadence);
      if (g.contains("start"))
      {
        const auto s = g.at("start").get<std::vector<double>>();
        if (s.size() != 2)
          throw ScenarioError("gait start must be [x, y]");
        t.start = {s[0], s[1]};
      }
      t.heading = value_or(g, "heading_rad", t.heading);
      t.step_count = value_or(g, "step_count", t.step_count);
      t.first_strike = value_or(g, "first_strike", t.first_strike);
      if (g.contains("first_foot"))
        t.first_foot = parse_foot(g.at("first_foot").get<std::string>());
      t.force_scale = value_or(g, "force_scale", t.force_scale);
    }
    if (doc.contains("waveform"))
    {
      const auto& w = doc.at("waveform");
      auto& m = sc.waveform;
      m.onset_fraction = value_or(w, "onset_fraction", m.onset_fraction);
      m.onset_width_s = value_or(w, "onset_width_s", m.onset_width_s);
      m.ramp_s = value_or(w, "ramp_s", m.ramp_s);
      m.decay_s = value_or(w, "decay_s", m.decay_s);
      m.carrier_hz = value_or(w, "carrier_hz", m.carrier_hz);
      m.low_hz = value_or(w, "low_hz", m.low_hz);
      m.low_gain = value_or(w, "low_gain", m.low_gain);
    }
    if (doc.contains("snr_db"))
      sc.noise_std = {noise_std_for_snr(doc.at("snr_db").get<double>(), sc.waveform, sc.floor.attenuation)};
    else if (doc.contains("noise_std"))
    {
      const auto& n = doc.at("noise_std");
      sc.noise_std = n.is_array() ? n.get<std::vector<double>>() : std::vector<double>{n.get<double>()};
    }
  }
  catch (const json::exception& e)
  {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  sc.floor.validate();
  return sc;
}

} // namespace gaitvibe::sim
