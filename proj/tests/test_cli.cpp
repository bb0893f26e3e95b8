#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gaitvibe/io.hpp"
#include "gaitvibe/profile_io.hpp"

namespace fs = std::filesystem;

namespace
{

int run(const std::string& args)
{
  const std::string cmd = std::string(GAITVIBE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("gaitvibe_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Constant suite simulated and calibrated once, shared by the tests below.
const fs::path& workspace()
{
  static const fs::path dir = [] {
    auto d = scratch("shared");
    REQUIRE(run("--out " + q(d) + " simulate --suite constant") == 0);
    REQUIRE(run("--out " + q(d) + " calibrate " + q(d / "constant_trial0[0-2].trace.csv")) == 0);
    return d;
  }();
  return dir;
}

} // namespace

TEST_SUITE("cli")
{
  TEST_CASE("simulate writes one file triple per trial")
  {
    const auto& d = workspace();
    for (int k = 0; k < 10; ++k)
    {
      const std::string stem = "constant_trial0" + std::to_string(k);
      CHECK(fs::exists(d / (stem + ".trace.csv")));
      CHECK(fs::exists(d / (stem + ".events.csv")));
      CHECK(fs::exists(d / (stem + ".truth.csv")));
    }
    CHECK_FALSE(fs::exists(d / "constant_trial10.trace.csv"));
  }

  TEST_CASE("simulate input errors exit 2")
  {
    const auto d = scratch("bad");
    CHECK(run("--out " + q(d) + " simulate --suite nope") == 2);
    CHECK(run("--out " + q(d) + " simulate --suite constant --scenario " + q(d / "x.json")) == 2);
    CHECK(run("--out " + q(d) + " simulate --scenario " + q(d / "missing.json")) == 2);
    gaitvibe::io::write_text(d / "off.json", R"({"name": "off", "gait": {"start": [3.0, 0.0], "step_count": 12}})");
    CHECK(run("--out " + q(d) + " simulate --scenario " + q(d / "off.json")) == 2);
    CHECK(run("--bogus-flag") == 2);
  }

  TEST_CASE("fixed seed gives identical files")
  {
    const auto a = scratch("seed_a");
    const auto b = scratch("seed_b");
    REQUIRE(run("--seed 42 --out " + q(a) + " simulate --suite snr_sweep") == 0);
    REQUIRE(run("--seed 42 --out " + q(b) + " simulate --suite snr_sweep") == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(a))
    {
      ++files;
      CHECK(gaitvibe::io::read_text(e.path()) == gaitvibe::io::read_text(b / e.path().filename()));
    }
    CHECK(files == 60);
    const auto c = scratch("seed_c");
    REQUIRE(run("--seed 43 --out " + q(c) + " simulate --suite snr_sweep") == 0);
    CHECK(gaitvibe::io::read_text(a / "snr_sweep_5db_trial00.trace.csv") !=
          gaitvibe::io::read_text(c / "snr_sweep_5db_trial00.trace.csv"));
  }

  TEST_CASE("calibrate three trials")
  {
    const auto& d = workspace();
    const auto text = gaitvibe::io::read_text(d / "profile.json");
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc.at("format_version") == 1);
    CHECK(doc.at("metadata").at("needs_more_trials") == false);
    CHECK(doc.at("metadata").at("trial_count") == 3);
    CHECK(gaitvibe::dump_profile(gaitvibe::load_profile(d / "profile.json")) == text);
  }

  TEST_CASE("calibrate on one short trial exits 2")
  {
    const auto d = scratch("short");
    gaitvibe::io::write_text(d / "short.json", R"({"name": "short", "snr_db": 15, "gait": {"step_count": 2}})");
    REQUIRE(run("--out " + q(d) + " simulate --scenario " + q(d / "short.json")) == 0);
    CHECK(run("--out " + q(d) + " calibrate " + q(d / "short_trial00.trace.csv")) == 2);
    CHECK(run("--out " + q(d) + " calibrate " + q(d / "nothing*.trace.csv")) == 2);
  }

  TEST_CASE("localize a simulated trial")
  {
    const auto& d = workspace();
    const auto out = scratch("loc");
    REQUIRE(run("--out " + q(out) + " localize --baseline --trace " + q(d / "constant_trial05.trace.csv") +
                " --profile " + q(d / "profile.json")) == 0);
    const auto steps = gaitvibe::io::read_localization(out / "constant_trial05.loc.csv");
    CHECK(steps.size() == 10);
    CHECK(fs::exists(out / "constant_trial05.baseline.loc.csv"));
    CHECK(fs::exists(out / "constant_trial05.gait.json"));

    const auto again = scratch("loc2");
    REQUIRE(run("--out " + q(again) + " localize --baseline --trace " + q(d / "constant_trial05.trace.csv") +
                " --profile " + q(d / "profile.json")) == 0);
    for (const char* f : {"constant_trial05.loc.csv", "constant_trial05.baseline.loc.csv", "constant_trial05.gait.json"})
      CHECK(gaitvibe::io::read_text(out / f) == gaitvibe::io::read_text(again / f));
  }

  TEST_CASE("localize a quiet record")
  {
    const auto& d = workspace();
    const auto out = scratch("quiet");
    gaitvibe::io::write_text(out / "quiet.json",
                             R"({"name": "quiet", "snr_db": 15, "duration_s": 5, "gait": {"step_count": 0}})");
    REQUIRE(run("--out " + q(out) + " simulate --scenario " + q(out / "quiet.json")) == 0);
    CHECK(run("--out " + q(out) + " localize --trace " + q(out / "quiet_trial00.trace.csv") + " --profile " +
              q(d / "profile.json")) == 0);
    CHECK(gaitvibe::io::read_text(out / "quiet_trial00.loc.csv") == "seq,t_s,x_m,y_m,v_mps,residual_s,flags\n");
  }

  TEST_CASE("localize input errors exit 2")
  {
    const auto& d = workspace();
    const auto out = scratch("locbad");
    CHECK(run("--out " + q(out) + " localize --trace " + q(d / "constant_trial05.trace.csv") + " --profile " +
              q(out / "missing.json")) == 2);
    gaitvibe::io::write_text(out / "broken.trace.csv", "fs=500\nsensor 1 0 0\nsensor 2 1 0\nsensor 3 0 1\n0,nan,0\n");
    CHECK(run("--out " + q(out) + " localize --trace " + q(out / "broken.trace.csv") + " --profile " +
              q(d / "profile.json")) == 2);
    gaitvibe::io::write_text(out / "config.json", R"({"grid_resolution_m": 0.9})");
    CHECK(run("--config " + q(out / "config.json") + " --out " + q(out) + " localize --trace " +
              q(d / "constant_trial05.trace.csv") + " --profile " + q(d / "profile.json")) == 2);
  }

  TEST_CASE("eval arithmetic")
  {
    const auto& d = workspace();
    const auto out = scratch("eval");
    const auto events = gaitvibe::io::read_events(d / "constant_trial03.events.csv");
    std::vector<gaitvibe::LocalizedFootstep> same, shifted;
    for (std::size_t k = 0; k < events.size(); ++k)
    {
      gaitvibe::LocalizedFootstep s;
      s.seq = static_cast<int>(k);
      s.time = events[k].strike_time;
      s.location = events[k].location;
      s.velocity = 100.0;
      same.push_back(s);
      s.location.x += 0.1;
      shifted.push_back(s);
    }
    gaitvibe::io::write_localization(out / "same.loc.csv", same);
    gaitvibe::io::write_localization(out / "shifted.loc.csv", shifted);

    REQUIRE(run("--out " + q(out / "a") + " eval --estimates " + q(out / "same.loc.csv") + " --truth " +
                q(d / "constant_trial03.events.csv")) == 0);
    const auto a = nlohmann::json::parse(gaitvibe::io::read_text(out / "a" / "metrics.json"));
    CHECK(a.at("enhanced").at("mae_m").get<double>() == 0.0);
    CHECK(a.at("gait").at("step_length").at("mape_pct").get<double>() == 0.0);
    CHECK(fs::exists(out / "a" / "localization_error.svg"));

    REQUIRE(run("--out " + q(out / "b") + " eval --estimates " + q(out / "shifted.loc.csv") + " --truth " +
                q(d / "constant_trial03.events.csv") + " --baseline " + q(out / "same.loc.csv")) == 0);
    const auto b = nlohmann::json::parse(gaitvibe::io::read_text(out / "b" / "metrics.json"));
    CHECK(b.at("enhanced").at("mae_m").get<double>() == doctest::Approx(0.1));
    CHECK(b.at("baseline").at("mae_m").get<double>() == 0.0);

    CHECK(run("--out " + q(out / "c") + " eval --estimates " + q(out / "nope.loc.csv") + " --truth " +
              q(d / "constant_trial03.events.csv")) == 2);
  }

  TEST_CASE("eval on the columns suite")
  {
    const auto out = scratch("suite");
    REQUIRE(run("--out " + q(out) + " eval --suite columns") == 0);
    const auto m = nlohmann::json::parse(gaitvibe::io::read_text(out / "metrics.json"));
    CHECK(m.at("enhanced").at("median_m").get<double>() < m.at("baseline").at("median_m").get<double>());
    CHECK(m.at("comparison").size() == 3);
    CHECK(fs::exists(out / "gait_mape.svg"));
    CHECK(run("--out " + q(out) + " eval --suite nope") == 2);
  }
}
