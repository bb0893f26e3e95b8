#include "gaitvibe/profile_io.hpp"

#include <fstream>
#include <sstream>

#include "gaitvibe/errors.hpp"

namespace gaitvibe
{

using nlohmann::json;

namespace
{

json band_json(BandSpec b) { return {{"low_hz", b.low_hz}, {"high_hz", b.high_hz}}; }

BandSpec band_from(const json& j) { return {j.at("low_hz").get<double>(), j.at("high_hz").get<double>()}; }

} // namespace

json profile_to_json(const CalibrationProfile& p)
{
  json doc;
  doc["format_version"] = kProfileFormatVersion;
  doc["sample_rate_hz"] = p.sample_rate_hz;

  json sensors = json::array();
  for (const auto& s : p.sensors)
    sensors.push_back({{"id", s.id}, {"x_m", s.position.x}, {"y_m", s.position.y}});
  doc["sensors"] = sensors;
  doc["bands"] = {{"detection", band_json(p.detection_band)}, {"arrival", band_json(p.arrival_band)}};

  json noise = json::array();
  for (const auto& e : p.noise.entries)
    noise.push_back({{"sensor_id", e.sensor_id}, {"mean", e.mean}, {"std", e.std}, {"window_s", e.window_s}});
  doc["noise"] = noise;

  json ratio = json::array();
  for (const auto& e : p.ratio.entries)
    ratio.push_back({{"sensor_id", e.sensor_id}, {"mean", e.mean}, {"std", e.std}, {"count", e.count}});
  doc["arrival_ratio"] = ratio;

  const auto& v = p.velocity;
  json order = json::array();
  for (const char* m : kMonomialOrder)
    order.push_back(m);
  doc["velocity"] = {
      {"degree", kProfileDegree},
      {"normalization", "u = 2*(x - x_min)/(x_max - x_min) - 1, w = 2*(y - y_min)/(y_max - y_min) - 1"},
      {"monomial_order", order},
      {"coefficients", v.coefficients},
      {"bounds", {{"x_min", v.bounds.x_min}, {"x_max", v.bounds.x_max}, {"y_min", v.bounds.y_min}, {"y_max", v.bounds.y_max}}},
      {"clamp_mps", {v.v_min, v.v_max}}};

  const auto& m = p.metadata;
  doc["metadata"] = {{"trial_count", m.trial_count},
                     {"footstep_count", m.footstep_count},
                     {"matched_footsteps", m.matched_footsteps},
                     {"velocity_sample_count", m.velocity_sample_count},
                     {"discarded_samples", m.discarded_samples},
                     {"velocity_rmse_mps", m.velocity_rmse},
                     {"ci_width_max_mps", m.ci_width_max},
                     {"ci_width_mean_mps", m.ci_width_mean},
                     {"needs_more_trials", m.needs_more_trials},
                     {"ridge_fallback", m.ridge_fallback},
                     {"warnings", m.warnings}};
  return doc;
}

CalibrationProfile profile_from_json(const json& doc)
{
  try
  {
    const int version = doc.at("format_version").get<int>();
    if (version != kProfileFormatVersion)
      throw InputError("unsupported profile format_version " + std::to_string(version));

    CalibrationProfile p;
    p.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    for (const auto& s : doc.at("sensors"))
      p.sensors.push_back({s.at("id").get<int>(), {s.at("x_m").get<double>(), s.at("y_m").get<double>()}});
    p.detection_band = band_from(doc.at("bands").at("detection"));
    p.arrival_band = band_from(doc.at("bands").at("arrival"));
    for (const auto& e : doc.at("noise"))
      p.noise.entries.push_back({e.at("sensor_id").get<int>(), e.at("mean").get<double>(),
                                 e.at("std").get<double>(), e.at("window_s").get<double>()});
    for (const auto& e : doc.at("arrival_ratio"))
      p.ratio.entries.push_back({e.at("sensor_id").get<int>(), e.at("mean").get<double>(),
                                 e.at("std").get<double>(), e.at("count").get<int>()});

    const auto& v = doc.at("velocity");
    if (v.at("degree").get<int>() != kProfileDegree)
      throw InputError("velocity profile degree must be 4");
    const auto order = v.at("monomial_order").get<std::vector<std::string>>();
    if (order.size() != kMonomialOrder.size())
      throw InputError("velocity monomial order has the wrong length");
    for (std::size_t k = 0; k < order.size(); ++k)
      if (order[k] != kMonomialOrder[k])
        throw InputError("unexpected monomial '" + order[k] + "' at position " + std::to_string(k));
    const auto coeffs = v.at("coefficients").get<std::vector<double>>();
    if (coeffs.size() != static_cast<std::size_t>(kProfileTerms))
      throw InputError("velocity profile needs 15 coefficients");
    std::copy(coeffs.begin(), coeffs.end(), p.velocity.coefficients.begin());
    const auto& b = v.at("bounds");
    p.velocity.bounds = {b.at("x_min").get<double>(), b.at("x_max").get<double>(),
                         b.at("y_min").get<double>(), b.at("y_max").get<double>()};
    const auto clamp = v.at("clamp_mps").get<std::vector<double>>();
    if (clamp.size() != 2 || !(clamp[0] > 0.0) || !(clamp[0] < clamp[1]))
      throw InputError("velocity clamp must be [v_min, v_max] with 0 < v_min < v_max");
    p.velocity.v_min = clamp[0];
    p.velocity.v_max = clamp[1];

    const auto& m = doc.at("metadata");
    auto& md = p.metadata;
    md.trial_count = m.at("trial_count").get<int>();
    md.footstep_count = m.at("footstep_count").get<int>();
    md.matched_footsteps = m.at("matched_footsteps").get<int>();
    md.velocity_sample_count = m.at("velocity_sample_count").get<int>();
    md.discarded_samples = m.at("discarded_samples").get<int>();
    md.velocity_rmse = m.at("velocity_rmse_mps").get<double>();
    md.ci_width_max = m.at("ci_width_max_mps").get<double>();
    md.ci_width_mean = m.at("ci_width_mean_mps").get<double>();
    md.needs_more_trials = m.at("needs_more_trials").get<bool>();
    md.ridge_fallback = m.at("ridge_fallback").get<bool>();
    md.warnings = m.at("warnings").get<std::vector<std::string>>();
    return p;
  }
  catch (const json::exception& e)
  {
    throw InputError(std::string("malformed calibration profile: ") + e.what());
  }
}

std::string dump_profile(const CalibrationProfile& profile)
{
  return profile_to_json(profile).dump(2) + "\n";
}

void save_profile(const std::filesystem::path& path, const CalibrationProfile& profile)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write profile " + path.string());
  out << dump_profile(profile);
}

CalibrationProfile load_profile(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot read profile " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try
  {
    doc = json::parse(buf.str());
  }
  catch (const json::exception& e)
  {
    throw InputError("profile " + path.string() + " is not valid JSON: " + e.what());
  }
  return profile_from_json(doc);
}

} // namespace gaitvibe
