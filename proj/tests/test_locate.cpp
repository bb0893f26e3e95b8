#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gaitvibe/errors.hpp"
#include "gaitvibe/evaluation.hpp"
#include "gaitvibe/locate.hpp"
#include "gaitvibe/simfloor.hpp"
#include "helpers.hpp"

using namespace gaitvibe;

namespace
{

const Rect kFloor{0.0, 7.0, -1.0, 1.0};

const CalibrationProfile& shared_profile()
{
  static const CalibrationProfile p = calibrate(testutil::trials(
      {testutil::walk(15.0, 10, 61), testutil::walk(15.0, 10, 62), testutil::walk(15.0, 10, 63)}));
  return p;
}

std::vector<ArrivalEstimate> oracle_arrivals(const sim::SimResult& r, int step, double jitter = 0.0,
                                             sim::NormalStream* normal = nullptr)
{
  std::vector<ArrivalEstimate> out;
  for (const auto& t : r.truth)
    if (t.step == step)
      out.push_back({t.sensor_id, t.arrival_time + (normal ? jitter * (*normal)() : 0.0), t.amplitude});
  return out;
}

int loudest(const sim::SimResult& r, int step)
{
  int id = 0;
  double best = -1.0;
  for (const auto& t : r.truth)
    if (t.step == step && t.amplitude > best)
    {
      best = t.amplitude;
      id = t.sensor_id;
    }
  return id;
}

double max_dt(const Rect& floor, double vmin)
{
  return std::hypot(floor.width(), floor.height()) / vmin;
}

double err(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

} // namespace

TEST_SUITE("locate")
{
  TEST_CASE("propose_next geometry")
  {
    const auto sensors = sim::default_layout();
    const auto p = propose_next(Point2{3.0, 0.0}, kFloor, sensors);
    CHECK(p.box.x_min == doctest::Approx(2.5));
    CHECK(p.box.x_max == doctest::Approx(3.5));
    CHECK(p.box.y_min == doctest::Approx(-0.5));
    CHECK(p.box.y_max == doctest::Approx(0.5));
    CHECK_FALSE(p.is_initial);

    const auto init = propose_next(std::nullopt, kFloor, sensors);
    CHECK(init.is_initial);
    CHECK(init.box.x_min == 0.0);
    CHECK(init.box.x_max == 7.0);
    CHECK(init.box.y_min == -1.0);
    CHECK(init.box.y_max == 1.0);

    const std::vector<SensorInfo> small{{1, {2.0, 0.0}}, {2, {3.0, 0.5}}, {3, {4.0, 0.0}}};
    const auto inner = propose_next(std::nullopt, Rect{-10.0, 10.0, -10.0, 10.0}, small);
    CHECK(inner.box.x_min == doctest::Approx(1.0));
    CHECK(inner.box.x_max == doctest::Approx(5.0));
    CHECK(inner.box.y_min == doctest::Approx(-1.0));
    CHECK(inner.box.y_max == doctest::Approx(1.5));

    const auto corner = propose_next(Point2{7.0, 1.0}, kFloor, sensors);
    CHECK(corner.box.x_min == doctest::Approx(6.5));
    CHECK(corner.box.x_max == doctest::Approx(7.0));
    CHECK(corner.box.y_min == doctest::Approx(0.5));
    CHECK(corner.box.y_max == doctest::Approx(1.0));
    CHECK(corner.box.width() > 0.0);
    CHECK(corner.box.height() > 0.0);
  }

  TEST_CASE("estimate_arrivals matches the simulator at 15 dB")
  {
    const auto& profile = shared_profile();
    int steps = 0, exact = 0;
    for (std::uint64_t seed : {71u, 72u})
    {
      const auto r = sim::synthesize(testutil::walk(15.0, 10, seed));
      const auto segs = detect_footsteps(r.record, profile.noise);
      for (std::size_t k = 0; k < r.events.size(); ++k)
      {
        const int s = match_segment(segs, r.events[k].strike_time);
        REQUIRE(s >= 0);
        const auto prop = propose_next(r.events[k].location, kFloor, profile.sensors);
        const auto sel = estimate_arrivals(segs[s], prop, profile);
        bool ok = sel.arrivals.size() == 4;
        for (const auto& a : sel.arrivals)
          ok = ok && std::abs(a.arrival_time - testutil::truth_arrival(r.truth, k, a.sensor_id)) <= 2.0 / 500.0;
        ++steps;
        exact += ok;
      }
    }
    CHECK(exact >= 0.95 * steps);
  }

  TEST_CASE("estimate_arrivals on a quiet segment")
  {
    const auto& profile = shared_profile();
    const auto r = sim::synthesize(testutil::walk(15.0, 3, 5));
    auto seg = detect_footsteps(r.record, profile.noise).at(1);
    for (auto& c : seg.channels)
      std::fill(c.arrival_envelope.begin(), c.arrival_envelope.end(), profile.noise.at(c.sensor_id).mean);
    const auto prop = propose_next(r.events[1].location, kFloor, profile.sensors);
    CHECK_THROWS_AS(estimate_arrivals(seg, prop, profile), NoArrivalFound);
  }

  TEST_CASE("amplitude window skips spurious early peaks")
  {
    const std::vector<SensorInfo> sensors{{1, {0.0, 0.0}}, {2, {2.0, 0.0}}, {3, {1.0, 2.0}}};
    CalibrationProfile profile;
    profile.sensors = sensors;
    for (const auto& s : sensors)
    {
      profile.noise.entries.push_back({s.id, 0.0, 0.01, 1.0});
      profile.ratio.entries.push_back({s.id, 0.15, 0.01, 20});
    }
    profile.velocity = VelocityProfile::constant(100.0, {-1.0, 3.0, -1.0, 3.0});

    FootstepSegment seg;
    seg.start = 10.0;
    seg.end = 10.8;
    const auto bump = [](std::vector<double>& env, double center, double height) {
      for (std::size_t i = 0; i < env.size(); ++i)
        env[i] = std::max(env[i], height * std::exp(-0.5 * std::pow((static_cast<double>(i) - center) / 2.0, 2)));
    };
    const std::vector<double> truth_idx{150.0, 156.0, 162.0};
    for (std::size_t s = 0; s < sensors.size(); ++s)
    {
      ChannelSegment c;
      c.sensor_id = sensors[s].id;
      c.position = sensors[s].position;
      c.arrival_envelope.assign(400, 0.0);
      bump(c.arrival_envelope, 60.0, 0.05);
      bump(c.arrival_envelope, 90.0, 0.06);
      bump(c.arrival_envelope, 120.0, 0.04);
      bump(c.arrival_envelope, truth_idx[s], 0.15);
      bump(c.arrival_envelope, 250.0, 1.0);
      c.peak_index = 250;
      c.peak_time = seg.time_at(250.0);
      c.peak_amplitude = 1.0;
      c.detection = c.arrival_envelope;
      seg.channels.push_back(c);
    }
    const auto prop = propose_next(Point2{0.5, 0.2}, {-1.0, 3.0, -1.0, 3.0}, sensors);
    const auto sel = estimate_arrivals(seg, prop, profile);
    REQUIRE(sel.arrivals.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
      CHECK(sel.arrivals[s].arrival_time == doctest::Approx(seg.time_at(truth_idx[s])).epsilon(1e-9));
    CHECK_FALSE(sel.order_relaxed);
  }

  TEST_CASE("tdoa arithmetic")
  {
    const std::vector<SensorInfo> sensors{{1, {0.0, 0.0}}, {2, {2.0, 0.0}}, {3, {4.0, 0.0}}};
    const double bound = max_dt(kFloor, 30.0);

    const auto zero = tdoa({{1, 1.0, 0.1}, {2, 1.0, 0.2}, {3, 1.0, 0.1}}, sensors, 2, bound);
    for (const auto& e : zero.entries)
      CHECK(e.dt == 0.0);

    const auto v = tdoa({{1, 1.010, 0.1}, {2, 1.000, 0.3}, {3, 1.020, 0.1}}, sensors, 2, bound);
    CHECK(v.reference_id == 2);
    CHECK(v.reference().dt == 0.0);
    REQUIRE(v.entries.size() == 3);
    CHECK(v.entries[0].dt == doctest::Approx(0.010));
    CHECK(v.entries[1].dt == 0.0);
    CHECK(v.entries[2].dt == doctest::Approx(0.020));

    CHECK_THROWS_AS(tdoa({{1, 2.0, 0.1}, {2, 1.0, 0.3}, {3, 1.02, 0.1}}, sensors, 2, bound), ArrivalRejected);
    CHECK_THROWS_AS(tdoa({{1, 1.0, 0.1}, {2, 1.0, 0.3}}, sensors, 2, bound), InputError);
  }

  TEST_CASE("tdoa reference is the sensor with the largest peak")
  {
    const auto& profile = shared_profile();
    const auto r = sim::synthesize(testutil::walk(15.0, 4, 9));
    const auto segs = detect_footsteps(r.record, profile.noise);
    REQUIRE(segs.size() == 4);
    const auto prop = propose_next(r.events[2].location, kFloor, profile.sensors);
    const auto sel = estimate_arrivals(segs[2], prop, profile);
    const auto t = tdoa(sel.arrivals, segs[2], max_dt(kFloor, 30.0));
    int best = 0;
    double amp = -1.0;
    for (const auto& c : segs[2].channels)
      if (c.peak_amplitude > amp)
      {
        amp = c.peak_amplitude;
        best = c.sensor_id;
      }
    CHECK(t.reference_id == best);
  }

  TEST_CASE("square symmetry gives the center")
  {
    const std::vector<SensorInfo> sensors{{1, {0.0, 0.0}}, {2, {2.0, 0.0}}, {3, {2.0, 2.0}}, {4, {0.0, 2.0}}};
    const auto t = tdoa({{1, 1.0, 0.1}, {2, 1.0, 0.1}, {3, 1.0, 0.1}, {4, 1.0, 0.1}}, sensors, 1, 1.0);
    const Rect area{0.0, 2.0, 0.0, 2.0};
    const auto prop = propose_next(Point2{1.0, 1.0}, area, sensors);
    const auto loc = localize(t, prop, VelocityProfile::constant(100.0, area));
    CHECK(loc.location.x == doctest::Approx(1.0));
    CHECK(loc.location.y == doctest::Approx(1.0));
    CHECK(loc.residual == doctest::Approx(0.0));

    const auto base = baseline_localize(t, area);
    CHECK(base.location.x == doctest::Approx(1.0));
    CHECK(base.location.y == doctest::Approx(1.0));
  }

  TEST_CASE("collinear mirror ambiguity goes to the proposal center")
  {
    const std::vector<SensorInfo> sensors{{1, {0.0, 0.0}}, {2, {2.0, 0.0}}, {3, {4.0, 0.0}}};
    const Point2 src{1.5, 0.3};
    std::vector<ArrivalEstimate> arr;
    for (const auto& s : sensors)
      arr.push_back({s.id, 1.0 + err(s.position, src) / 100.0, 0.1});
    const auto t = tdoa(arr, sensors, 2, 1.0);
    const Rect area{0.0, 4.0, -1.0, 1.0};
    const auto profile = VelocityProfile::constant(100.0, area);
    for (double cy : {0.15, -0.15})
    {
      CAPTURE(cy);
      LocationProposal prop{{1.0, 2.0, cy - 0.5, cy + 0.5}, {1.5, cy}, false};
      const auto loc = localize(t, prop, profile);
      CHECK(loc.location.x == doctest::Approx(1.5));
      CHECK(loc.location.y == doctest::Approx(cy > 0 ? 0.3 : -0.3));
      // Brute force: the mirror point is just as good.
      CHECK(tdoa_residual(t, {1.5, -loc.location.y}, 100.0, ResidualNorm::L2) ==
            doctest::Approx(loc.residual).epsilon(1e-9));
    }
  }

  TEST_CASE("localize returns the exhaustive argmin")
  {
    const auto& profile = shared_profile();
    const auto r = sim::synthesize(testutil::walk(15.0, 6, 81));
    const auto segs = detect_footsteps(r.record, profile.noise);
    for (std::size_t k = 0; k < segs.size(); ++k)
    {
      const auto prop = propose_next(r.events[k].location, kFloor, profile.sensors, 1.0);
      const auto sel = estimate_arrivals(segs[k], prop, profile);
      const auto t = tdoa(sel.arrivals, segs[k], max_dt(kFloor, 30.0));
      for (auto norm : {ResidualNorm::L2, ResidualNorm::L1})
      {
        const auto loc = localize(t, prop, profile.velocity, {kGridResolutionM, norm});
        CHECK(prop.box.contains(loc.location));
        for (const auto& q : grid_points(prop.box, kGridResolutionM))
          CHECK(loc.residual <= tdoa_residual(t, q, profile.velocity(q), norm) * (1.0 + 1e-12) + 1e-15);
      }
    }
  }

  TEST_CASE("grid_points rejects empty boxes")
  {
    CHECK_THROWS_AS(grid_points({1.0, 1.0 - 1e-3, 0.0, 1.0}, 0.05), InputError);
    CHECK_THROWS_AS(grid_points({0.0, 1.0, 0.0, 1.0}, 0.0), InputError);
    CHECK(grid_points({0.0, 1.0, 0.0, 1.0}, 0.05).size() == 441);
  }

  TEST_CASE("oracle arrivals and velocity stay within one grid diagonal")
  {
    const auto r = sim::synthesize(testutil::walk(15.0, 10, 91));
    const auto v = VelocityProfile::constant(100.0, kFloor);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> off(-0.45, 0.45);
    for (std::size_t k = 0; k < r.events.size(); ++k)
    {
      const auto t = tdoa(oracle_arrivals(r, k), sim::default_layout(), loudest(r, k), max_dt(kFloor, 30.0));
      const Point2 truth = r.events[k].location;
      const Point2 c{truth.x + off(rng), truth.y + off(rng)};
      const auto prop = propose_next(c, kFloor, sim::default_layout());
      REQUIRE(prop.box.contains(truth));
      const auto loc = localize(t, prop, v);
      CHECK(err(loc.location, truth) <= 0.0708);
    }
  }

  TEST_CASE("oracle error holds on a varying field")
  {
    auto sc = testutil::walk(15.0, 10, 92);
    sc.floor.velocity.kind = sim::FieldKind::Polynomial;
    sc.floor.velocity.polynomial = sim::reference_polynomial_field();
    const auto r = sim::synthesize(sc);
    auto v = sim::reference_polynomial_field();
    for (std::size_t k = 0; k < r.events.size(); ++k)
    {
      const auto t = tdoa(oracle_arrivals(r, k), sim::default_layout(), loudest(r, k), max_dt(kFloor, 30.0));
      const auto prop = propose_next(r.events[k].location, kFloor, sim::default_layout());
      CHECK(err(localize(t, prop, v).location, r.events[k].location) <= 0.0708);
    }
  }

  TEST_CASE("baseline matches the profile method on a constant floor")
  {
    const auto r = sim::synthesize(testutil::walk(15.0, 10, 93));
    const auto v = VelocityProfile::constant(100.0, kFloor);
    for (std::size_t k = 0; k < r.events.size(); ++k)
    {
      const auto t = tdoa(oracle_arrivals(r, k), sim::default_layout(), loudest(r, k), max_dt(kFloor, 30.0));
      const auto prop = propose_next(r.events[k].location, kFloor, sim::default_layout());
      const auto a = localize(t, prop, v);
      const auto b = baseline_localize(t, kFloor);
      CHECK(err(a.location, b.location) <= 2.0 * kGridResolutionM * std::sqrt(2.0) + 1e-9);
      CHECK(b.velocity == doctest::Approx(100.0).epsilon(0.1));
    }
  }

  TEST_CASE("track_trial follows a straight walk")
  {
    const auto& profile = shared_profile();
    const auto r = sim::synthesize(testutil::walk(15.0, 10, 101));
    TrackOptions opt;
    const auto res = track_trial(r.record, profile, opt);
    REQUIRE(res.footsteps.size() == 10);
    CHECK(res.failures.empty());
    CHECK(((res.footsteps[0].flags & kFlagInitial) != 0));
    for (std::size_t k = 0; k < 10; ++k)
    {
      CHECK(res.footsteps[k].seq == static_cast<int>(k));
      CHECK(err(res.footsteps[k].location, r.events[k].location) < 0.3);
      CHECK(std::abs(res.footsteps[k].time - r.events[k].strike_time) < 0.02);
      CHECK(kFloor.contains(res.footsteps[k].location));
      if (k + 1 < 10)
      {
        const auto next = propose_next(res.footsteps[k].location, opt.floor, profile.sensors, opt.proposal_size);
        CHECK(next.box.contains(r.events[k + 1].location));
      }
    }
  }

  TEST_CASE("track_trial on an empty record")
  {
    const auto& profile = shared_profile();
    auto sc = testutil::walk(15.0, 0, 3);
    sc.duration_s = 5.0;
    const auto res = track_trial(sim::synthesize(sc).record, profile);
    CHECK(res.footsteps.empty());
    CHECK(res.failures.empty());
  }

  TEST_CASE("a missing footstep engages recovery")
  {
    const auto& profile = shared_profile();
    auto sc = testutil::walk(15.0, 10, 111);
    sc.gait.force_scale = {1, 1, 1, 1, 1, 0, 1, 1, 1, 1};
    const auto r = sim::synthesize(sc);
    const auto res = track_trial(r.record, profile);
    REQUIRE(res.footsteps.size() == 9);
    CHECK(((res.footsteps[5].flags & kFlagRecovery) != 0));
    for (std::size_t k = 0; k < 9; ++k)
    {
      const auto& truth = r.events[k < 5 ? k : k + 1].location;
      CHECK(err(res.footsteps[k].location, truth) < 0.3);
    }
  }

  TEST_CASE("localization ignores global time shifts")
  {
    const auto& profile = shared_profile();
    const auto r = sim::synthesize(testutil::walk(15.0, 8, 121));
    const auto a = track_trial(r.record, profile);
    auto shifted = r.record;
    shifted.t0 += 1000.0;
    const auto b = track_trial(shifted, profile);
    REQUIRE(a.footsteps.size() == b.footsteps.size());
    for (std::size_t k = 0; k < a.footsteps.size(); ++k)
    {
      CHECK(a.footsteps[k].location == b.footsteps[k].location);
      CHECK(b.footsteps[k].time - a.footsteps[k].time == doctest::Approx(1000.0).epsilon(1e-12));
      CHECK(a.footsteps[k].residual == doctest::Approx(b.footsteps[k].residual).epsilon(1e-6));
    }
  }

  TEST_CASE("localization is invariant to amplitude scaling")
  {
    const auto& profile = shared_profile();
    const auto r = sim::synthesize(testutil::walk(15.0, 8, 131));
    const auto a = track_trial(r.record, profile);
    for (double c : {0.001, 4.2})
    {
      CAPTURE(c);
      auto rec = r.record;
      for (auto& ch : rec.channels)
        for (auto& v : ch.samples)
          v *= c;
      auto scaled = profile;
      for (auto& e : scaled.noise.entries)
      {
        e.mean *= c;
        e.std *= c;
      }
      const auto b = track_trial(rec, scaled);
      REQUIRE(a.footsteps.size() == b.footsteps.size());
      for (std::size_t k = 0; k < a.footsteps.size(); ++k)
      {
        CHECK(a.footsteps[k].location == b.footsteps[k].location);
        CHECK(a.footsteps[k].time == doctest::Approx(b.footsteps[k].time).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("median error grows with arrival-time noise")
  {
    std::vector<sim::SimResult> runs;
    for (const auto& sc : sim::scenario_suite("constant"))
      runs.push_back(sim::synthesize(sc));
    const auto v = VelocityProfile::constant(100.0, kFloor);
    double prev = -1.0;
    for (double jitter : {0.0, 0.0005, 0.001, 0.002, 0.004})
    {
      CAPTURE(jitter);
      sim::NormalStream normal(99);
      std::vector<double> errors;
      for (const auto& r : runs)
        for (std::size_t k = 0; k < r.events.size(); ++k)
        {
          const auto t = tdoa(oracle_arrivals(r, k, jitter, &normal), sim::default_layout(), loudest(r, k), 1.0);
          const auto prop = propose_next(r.events[k].location, kFloor, sim::default_layout());
          errors.push_back(err(localize(t, prop, v).location, r.events[k].location));
        }
      REQUIRE(errors.size() >= 100);
      const double med = eval::median(errors);
      CHECK(med >= prev);
      prev = med;
    }
  }

  TEST_CASE("flags render as text")
  {
    CHECK(flags_to_string(kFlagNone) == "");
    CHECK(flags_to_string(kFlagInitial | kFlagRecovery) == "initial|recovery");
  }
}
