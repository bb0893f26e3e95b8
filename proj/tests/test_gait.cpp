#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gaitvibe/errors.hpp"
#include "gaitvibe/gait.hpp"
#include "gaitvibe/simfloor.hpp"

using namespace gaitvibe;

namespace
{

std::vector<GaitStep> from_events(const std::vector<FootstepEvent>& events)
{
  std::vector<GaitStep> out;
  for (const auto& e : events)
    out.push_back({e.strike_time, e.location, e.foot});
  return out;
}

std::vector<GaitStep> transform(std::vector<GaitStep> seq, double angle, Point2 shift)
{
  const double c = std::cos(angle), s = std::sin(angle);
  for (auto& g : seq)
    g.location = {c * g.location.x - s * g.location.y + shift.x, s * g.location.x + c * g.location.y + shift.y};
  return seq;
}

} // namespace

TEST_SUITE("gait")
{
  TEST_CASE("progression line examples")
  {
    const auto line = progression_line({{0.0, {0.0, 0.0}}, {1.0, {1.0, 0.0}}, {2.0, {3.0, 0.0}}});
    CHECK(line.direction.x == doctest::Approx(1.0));
    CHECK(line.direction.y == doctest::Approx(0.0).epsilon(1e-12));

    const auto zig = progression_line(
        {{0.0, {0.0, 0.1}}, {0.6, {0.7, -0.1}}, {1.2, {1.4, 0.1}}, {1.8, {2.1, -0.1}}});
    CHECK(zig.direction.x == doctest::Approx(1.0));
    CHECK(std::abs(zig.direction.y) < 1e-12);

    const auto back = progression_line({{0.0, {3.0, 0.0}}, {1.0, {2.0, 0.0}}, {2.0, {1.0, 0.0}}});
    CHECK(back.direction.x == doctest::Approx(-1.0));

    CHECK_THROWS_AS(progression_line({{0.0, {1.0, 1.0}}}), DegenerateGeometry);
    CHECK_THROWS_AS(progression_line({{0.0, {1.0, 1.0}}, {1.0, {1.0, 1.0}}, {2.0, {1.0, 1.0}}}),
                    DegenerateGeometry);
  }

  TEST_CASE("hand geometry")
  {
    const auto g = spatial_params({{0.0, {0.0, 0.1}}, {0.6, {0.7, -0.1}}, {1.2, {1.4, 0.1}}});
    REQUIRE(g.steps.size() == 2);
    for (const auto& s : g.steps)
    {
      CHECK(s.step_length == doctest::Approx(0.7));
      CHECK(s.step_width == doctest::Approx(0.2));
      CHECK(s.step_angle_deg == doctest::Approx(std::atan(0.2 / 0.7) * 180.0 / std::numbers::pi));
    }
    CHECK(g.steps[0].step_angle_deg == doctest::Approx(15.945).epsilon(1e-4));
    REQUIRE(g.strides.size() == 1);
    CHECK(g.strides[0].stride_length == doctest::Approx(1.4));
    REQUIRE(g.walking_speed);
    CHECK(*g.walking_speed == doctest::Approx(1.4 / 1.2));
  }

  TEST_CASE("single-file walk has zero width and angle")
  {
    const auto g = spatial_params({{0.0, {0.0, 0.0}}, {0.5, {0.6, 0.0}}, {1.0, {1.3, 0.0}}, {1.5, {2.0, 0.0}}});
    for (const auto& s : g.steps)
    {
      CHECK(s.step_width == doctest::Approx(0.0));
      CHECK(s.step_angle_deg == doctest::Approx(0.0));
    }
  }

  TEST_CASE("times must increase")
  {
    CHECK_THROWS_AS(spatial_params({{0.0, {0.0, 0.0}}, {0.0, {0.7, 0.0}}, {1.0, {1.4, 0.0}}}), InputError);
  }

  TEST_CASE("two footsteps give a step but no stride")
  {
    const auto g = spatial_params({{0.0, {0.0, 0.0}}, {0.5, {0.7, 0.0}}});
    CHECK(g.steps.size() == 1);
    CHECK(g.strides.empty());
    CHECK(g.steps[0].step_length == doctest::Approx(0.7));
  }

  TEST_CASE("strides pair labelled feet")
  {
    const auto g = spatial_params({{0.0, {0.0, 0.1}, Foot::Left},
                                   {0.5, {0.7, -0.1}, Foot::Right},
                                   {1.0, {1.4, -0.1}, Foot::Right},
                                   {1.5, {2.1, 0.1}, Foot::Left}});
    REQUIRE(g.strides.size() == 2);
    CHECK(g.strides[0].from == 0);
    CHECK(g.strides[0].to == 3);
    CHECK(g.strides[0].stride_length == doctest::Approx(2.1));
    CHECK(g.strides[1].from == 1);
    CHECK(g.strides[1].to == 2);
  }

  TEST_CASE("simulator template is reproduced exactly")
  {
    for (double heading : {0.0, 0.3, std::numbers::pi, -2.0})
    {
      CAPTURE(heading);
      sim::GaitTemplate tpl;
      tpl.heading = heading;
      tpl.start = {3.0, 0.0};
      tpl.step_length = 0.65;
      tpl.step_width = 0.18;
      const auto g = spatial_params(from_events(tpl.footsteps(0)));
      for (const auto& s : g.steps)
      {
        CHECK(std::abs(s.step_length - 0.65) <= 1e-9);
        CHECK(std::abs(s.step_width - 0.18) <= 1e-9);
      }
      for (const auto& s : g.strides)
        CHECK(std::abs(s.stride_length - 1.3) <= 1e-9);
      REQUIRE(g.walking_speed);
      CHECK(std::abs(*g.walking_speed - 0.65 * 1.8) <= 1e-9);
    }
  }

  TEST_CASE("rigid motions leave every parameter unchanged")
  {
    const std::vector<GaitStep> seq{{0.0, {0.1, 0.12}},  {0.55, {0.8, -0.07}}, {1.1, {1.45, 0.15}},
                                    {1.7, {2.2, -0.1}}, {2.2, {2.85, 0.09}}, {2.8, {3.6, -0.13}}};
    const auto base = spatial_params(seq);
    for (double angle : {0.7, -2.5, 3.1})
    {
      CAPTURE(angle);
      const auto moved = spatial_params(transform(seq, angle, {12.5, -4.0}));
      REQUIRE(moved.steps.size() == base.steps.size());
      for (std::size_t k = 0; k < base.steps.size(); ++k)
      {
        CHECK(std::abs(moved.steps[k].step_length - base.steps[k].step_length) <= 1e-9);
        CHECK(std::abs(moved.steps[k].step_width - base.steps[k].step_width) <= 1e-9);
        CHECK(std::abs(moved.steps[k].step_angle_deg - base.steps[k].step_angle_deg) <= 1e-9);
      }
      for (std::size_t k = 0; k < base.strides.size(); ++k)
        CHECK(std::abs(moved.strides[k].stride_length - base.strides[k].stride_length) <= 1e-9);
      CHECK(std::abs(*moved.walking_speed - *base.walking_speed) <= 1e-9);
    }
  }

  TEST_CASE("length and width decompose the step vector")
  {
    const std::vector<GaitStep> seq{{0.0, {0.1, 0.12}}, {0.55, {0.8, -0.3}}, {1.1, {1.2, 0.4}}, {1.7, {2.2, -0.1}}};
    const auto g = spatial_params(seq);
    for (const auto& s : g.steps)
    {
      const auto& a = seq[s.from].location;
      const auto& b = seq[s.from + 1].location;
      const double d2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
      CHECK(std::abs(s.step_length * s.step_length + s.step_width * s.step_width - d2) <= 1e-12);
      CHECK(s.step_length >= 0.0);
      CHECK(s.step_width >= 0.0);
      CHECK(s.step_angle_deg >= 0.0);
      CHECK(s.step_angle_deg <= 90.0);
    }
  }

  TEST_CASE("zero angle exactly for steps along the line")
  {
    const auto g = spatial_params({{0.0, {0.0, 0.0}}, {1.0, {1.0, 1.0}}, {2.0, {2.0, 2.0}}, {3.0, {3.5, 3.5}}});
    for (const auto& s : g.steps)
      CHECK(s.step_angle_deg == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("compare_params")
  {
    sim::GaitTemplate tpl;
    const auto truth = from_events(tpl.footsteps(0));

    const auto same = compare_params(truth, truth);
    CHECK(same.step_length.mape == 0.0);
    CHECK(same.step_width.mape == 0.0);
    CHECK(same.stride_length.mape == 0.0);
    CHECK(same.walking_speed.mape == 0.0);
    CHECK(same.matched == 10);
    CHECK(same.missed == 0);
    CHECK(same.spurious == 0);

    auto scaled = truth;
    for (auto& g : scaled)
      g.location = {1.1 * g.location.x, 1.1 * g.location.y};
    const auto c = compare_params(scaled, truth);
    CHECK(c.step_length.mape == doctest::Approx(10.0));
    CHECK(c.stride_length.mape == doctest::Approx(10.0));

    std::vector<GaitStep> straight;
    for (int k = 0; k < 5; ++k)
      straight.push_back({0.5 * k, {0.7 * k, 0.0}});
    auto wobbly = straight;
    wobbly[2].location.y = 0.05;
    const auto z = compare_params(wobbly, straight);
    CHECK(z.step_width.excluded == 4);
    CHECK(z.step_width.compared == 0);
    CHECK(z.step_length.compared == 4);

    auto late = truth;
    for (auto& g : late)
      g.t += 100.0;
    CHECK_THROWS_AS(compare_params(late, truth), EvalError);
  }

  TEST_CASE("compare_params counts misses and spurious steps")
  {
    sim::GaitTemplate tpl;
    const auto truth = from_events(tpl.footsteps(0));
    auto est = truth;
    est.erase(est.begin() + 4);
    est.push_back({truth.back().t + 2.0, {6.0, 0.0}});
    const auto c = compare_params(est, truth);
    CHECK(c.matched == 9);
    CHECK(c.missed == 1);
    CHECK(c.spurious == 1);
  }

  TEST_CASE("time matching is one to one")
  {
    const auto m = match_by_time({1.0, 1.05, 2.0}, {1.02, 2.5}, 0.3);
    REQUIRE(m.size() == 1);
    CHECK(m[0].first == 0);
    CHECK(m[0].second == 0);
  }
}
