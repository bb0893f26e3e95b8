#include "gaitvibe/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gaitvibe/errors.hpp"

namespace gaitvibe
{

using nlohmann::json;

namespace
{

void require(bool ok, const std::string& message)
{
  if (!ok)
    throw ConfigError(message);
}

json band(BandSpec b) { return json::array({b.low_hz, b.high_hz}); }

BandSpec band_from(const json& j, const char* key)
{
  const auto v = j.get<std::vector<double>>();
  require(v.size() == 2, std::string(key) + " must be [low_hz, high_hz]");
  return {v[0], v[1]};
}

} // namespace

void RunConfig::validate() const
{
  require(!floor.empty() && floor.width() > 0.0 && floor.height() > 0.0, "floor bounds are empty");
  detection_band.validate(kDefaultSampleRateHz);
  arrival_band.validate(kDefaultSampleRateHz);
  require(detection_sigma > 0.0, "detection_sigma must be positive");
  require(candidate_sigma >= 0.0, "candidate_sigma must be non-negative");
  require(window_s > 0.0, "window_s must be positive");
  require(min_gap_s >= 0.0, "min_gap_s must be non-negative");
  require(smoothing_s >= 0.0, "smoothing_s must be non-negative");
  require(wiener_window_s > 0.0, "wiener_window_s must be positive");
  require(proposal_size_m > 0.0, "proposal_size_m must be positive");
  require(soft_boundary_m >= 0.0, "soft_boundary_m must be non-negative");
  require(recovery_step_m >= 0.0, "recovery_step_m must be non-negative");
  require(grid_resolution_m > 0.0 && grid_resolution_m <= 0.5, "grid_resolution_m must lie in (0, 0.5]");
  require(v_min > 0.0 && v_min < v_max, "velocity clamp must satisfy 0 < v_min < v_max");
  require(polynomial_degree == kProfileDegree, "only polynomial_degree 4 is supported");
  require(ci_limit_mps > 0.0, "ci_limit_mps must be positive");
  require(ratio_sigmas > 0.0, "ratio_sigmas must be positive");
  require(distance_tie_m >= 0.0, "distance_tie_m must be non-negative");
  require(order_time_tol_s >= 0.0, "order_time_tol_s must be non-negative");
  require(baseline_v_step_mps > 0.0, "baseline_v_step_mps must be positive");
  for (const std::string* p : {&paths.traces, &paths.events, &paths.profile})
    require(p->empty() || std::filesystem::exists(*p), "referenced file does not exist: " + *p);
}

SegmentationOptions RunConfig::segmentation() const
{
  SegmentationOptions s;
  s.detection = detection_band;
  s.arrival = arrival_band;
  s.threshold_sigma = detection_sigma;
  s.smoothing_s = smoothing_s;
  s.min_gap_s = min_gap_s;
  s.window_s = window_s;
  s.denoise = denoise;
  s.wiener_window_s = wiener_window_s;
  return s;
}

CalibrationOptions RunConfig::calibration() const
{
  CalibrationOptions c;
  c.floor = floor;
  c.segmentation = segmentation();
  c.candidate_sigma = candidate_sigma;
  c.v_min = v_min;
  c.v_max = v_max;
  c.ci_limit = ci_limit_mps;
  c.tie_tolerance = distance_tie_m;
  c.time_tolerance = order_time_tol_s;
  return c;
}

TrackOptions RunConfig::tracking() const
{
  TrackOptions t;
  t.floor = floor;
  t.segmentation = segmentation();
  t.arrivals.candidate_sigma = candidate_sigma;
  t.arrivals.ratio_sigmas = ratio_sigmas;
  t.arrivals.tie_tolerance = distance_tie_m;
  t.arrivals.time_tolerance = order_time_tol_s;
  t.arrivals.grid_resolution = grid_resolution_m;
  t.grid.resolution = grid_resolution_m;
  t.grid.norm = residual_norm;
  t.proposal_size = proposal_size_m;
  t.soft_boundary = soft_boundary_m;
  t.recovery_step = recovery_step_m;
  return t;
}

BaselineOptions RunConfig::baseline() const
{
  BaselineOptions b;
  b.resolution = grid_resolution_m;
  b.v_step = baseline_v_step_mps;
  b.v_min = v_min;
  b.v_max = v_max;
  b.norm = residual_norm;
  return b;
}

json config_to_json(const RunConfig& c)
{
  return {{"paths", {{"traces", c.paths.traces}, {"events", c.paths.events}, {"profile", c.paths.profile}, {"out", c.paths.out}}},
          {"floor", {{"x_min", c.floor.x_min}, {"x_max", c.floor.x_max}, {"y_min", c.floor.y_min}, {"y_max", c.floor.y_max}}},
          {"detection_band_hz", band(c.detection_band)},
          {"arrival_band_hz", band(c.arrival_band)},
          {"detection_sigma", c.detection_sigma},
          {"candidate_sigma", c.candidate_sigma},
          {"window_s", c.window_s},
          {"min_gap_s", c.min_gap_s},
          {"smoothing_s", c.smoothing_s},
          {"denoise", c.denoise},
          {"wiener_window_s", c.wiener_window_s},
          {"proposal_size_m", c.proposal_size_m},
          {"soft_boundary_m", c.soft_boundary_m},
          {"recovery_step_m", c.recovery_step_m},
          {"grid_resolution_m", c.grid_resolution_m},
          {"residual_norm", c.residual_norm == ResidualNorm::L2 ? "L2" : "L1"},
          {"velocity_clamp_mps", {c.v_min, c.v_max}},
          {"polynomial_degree", c.polynomial_degree},
          {"ci_limit_mps", c.ci_limit_mps},
          {"ratio_sigmas", c.ratio_sigmas},
          {"distance_tie_m", c.distance_tie_m},
          {"order_time_tol_s", c.order_time_tol_s},
          {"baseline_v_step_mps", c.baseline_v_step_mps},
          {"seed", c.seed}};
}

RunConfig config_from_json(const json& doc)
{
  RunConfig c;
  require(doc.is_object(), "config must be a JSON object");
  const std::set<std::string> known = {
      "paths", "floor", "detection_band_hz", "arrival_band_hz", "detection_sigma", "candidate_sigma",
      "window_s", "min_gap_s", "smoothing_s", "denoise", "wiener_window_s", "proposal_size_m",
      "soft_boundary_m", "recovery_step_m", "grid_resolution_m", "residual_norm", "velocity_clamp_mps",
      "polynomial_degree", "ci_limit_mps", "ratio_sigmas", "distance_tie_m", "order_time_tol_s",
      "baseline_v_step_mps", "seed"};
  for (const auto& [key, value] : doc.items())
    require(known.count(key) > 0, "unknown config key '" + key + "'");

  try
  {
    const auto num = [&](const char* key, double& out) {
      if (doc.contains(key))
        out = doc.at(key).get<double>();
    };
    if (doc.contains("paths"))
    {
      const auto& p = doc.at("paths");
      c.paths.traces = p.value("traces", "");
      c.paths.events = p.value("events", "");
      c.paths.profile = p.value("profile", "");
      c.paths.out = p.value("out", "");
    }
    if (doc.contains("floor"))
    {
      const auto& f = doc.at("floor");
      c.floor = {f.at("x_min").get<double>(), f.at("x_max").get<double>(), f.at("y_min").get<double>(),
                 f.at("y_max").get<double>()};
    }
    if (doc.contains("detection_band_hz"))
      c.detection_band = band_from(doc.at("detection_band_hz"), "detection_band_hz");
    if (doc.contains("arrival_band_hz"))
      c.arrival_band = band_from(doc.at("arrival_band_hz"), "arrival_band_hz");
    num("detection_sigma", c.detection_sigma);
    num("candidate_sigma", c.candidate_sigma);
    num("window_s", c.window_s);
    num("min_gap_s", c.min_gap_s);
    num("smoothing_s", c.smoothing_s);
    if (doc.contains("denoise"))
      c.denoise = doc.at("denoise").get<bool>();
    num("wiener_window_s", c.wiener_window_s);
    num("proposal_size_m", c.proposal_size_m);
    num("soft_boundary_m", c.soft_boundary_m);
    num("recovery_step_m", c.recovery_step_m);
    num("grid_resolution_m", c.grid_resolution_m);
    if (doc.contains("residual_norm"))
    {
      const auto n = doc.at("residual_norm").get<std::string>();
      require(n == "L2" || n == "L1", "residual_norm must be L2 or L1");
      c.residual_norm = n == "L2" ? ResidualNorm::L2 : ResidualNorm::L1;
    }
    if (doc.contains("velocity_clamp_mps"))
    {
      const auto v = doc.at("velocity_clamp_mps").get<std::vector<double>>();
      require(v.size() == 2, "velocity_clamp_mps must be [v_min, v_max]");
      c.v_min = v[0];
      c.v_max = v[1];
    }
    if (doc.contains("polynomial_degree"))
      c.polynomial_degree = doc.at("polynomial_degree").get<int>();
    num("ci_limit_mps", c.ci_limit_mps);
    num("ratio_sigmas", c.ratio_sigmas);
    num("distance_tie_m", c.distance_tie_m);
    num("order_time_tol_s", c.order_time_tol_s);
    num("baseline_v_step_mps", c.baseline_v_step_mps);
    if (doc.contains("seed"))
      c.seed = doc.at("seed").get<std::uint64_t>();
  }
  catch (const json::exception& e)
  {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try
  {
    return config_from_json(json::parse(buf.str()));
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

} // namespace gaitvibe
