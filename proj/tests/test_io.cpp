#include <gtest/gtest.h>

#include <sstream>

#include "ledgaze/io.hpp"

using namespace ledgaze;
using io::Json;

TEST(Config, RoundTrip) {
  SessionConfig c;
  c.seed = 77;
  c.mode = PrototypeMode::prototype2;
  c.estimator = EstimatorKind::svr;
  c.svr_sigma = 0.3;
  c.measure = MeasureSpec::of(MeasureKind::canberra);
  c.subject = SubjectProfile::random(3, 12);
  c.script = GazeScript{}.fixate({10, 20}, 500'000).saccade({100, 200}).blink(150'000).fixate({100, 200}, 300'000);
  const auto j = io::to_json(c);
  const auto back = io::config_from_json(Json::parse(j.dump()));
  EXPECT_EQ(io::to_json(back).dump(), j.dump());
}

TEST(Config, PartialUsesDefaults) {
  const auto c = io::config_from_json(Json::parse(R"({"version":1,"seed":9,"grid":{"rows":3}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.grid.rows, 3);
  EXPECT_EQ(c.grid.cols, 4);
  EXPECT_EQ(io::to_json(c)["optics"], io::to_json(SessionConfig{})["optics"]);
}

TEST(Config, RejectsUnknownKeysAndVersions) {
  EXPECT_THROW(io::config_from_json(Json::parse(R"({"version":1,"columns":4})")), io::FormatError);
  EXPECT_THROW(io::config_from_json(Json::parse(R"({"version":1,"grid":{"colums":4}})")), io::FormatError);
  EXPECT_ANY_THROW(io::config_from_json(Json::parse(R"({"version":2})")));
  EXPECT_ANY_THROW(io::config_from_json(Json::parse(R"({"seed":1})")));
  EXPECT_ANY_THROW(io::config_from_json(Json::parse(R"({"version":1,"grid":{"rows":1}})")));
}

TEST(Config, ShippedDefaultMatchesCode) {
  const auto c = io::load_config(std::string(LEDGAZE_TEST_DATA) + "/../../configs/default.json");
  EXPECT_EQ(io::to_json(c).dump(), io::to_json(SessionConfig{}).dump());
}

TEST(Config, EveryShippedConfigLoads) {
  const auto dir = std::filesystem::path(LEDGAZE_TEST_DATA) / ".." / ".." / "configs";
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(io::load_config(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 3u);
  EXPECT_TRUE(io::load_config(dir / "scripted.json").script.has_value());
}

TEST(Calibration, ExactRoundTrip) {
  CalibrationSet cal;
  cal.add({0.1, 1.0 / 3.0, 2e-17}, {1.5, 2.25});
  cal.add({0.9, 0.7, 0.30000000000000004}, {519, 0});
  const auto back = io::calibration_from_json(Json::parse(io::to_json(cal).dump()));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].mean, cal[i].mean);
    EXPECT_EQ(back[i].target, cal[i].target);
  }
  EXPECT_THROW(io::calibration_from_json(Json::parse(R"({"format":"other","version":1})")), io::FormatError);
}

TEST(SessionLogIo, ExactRoundTrip) {
  const auto layout = LedLayout::make(PrototypeMode::prototype1, 18.0, 25.0);
  const auto subject = SubjectProfile::random(2, layout.channel_count());
  const auto script = GazeScript{}.fixate({100, 100}, 300'000).saccade({400, 300}).blink(120'000).fixate({400, 300}, 300'000);
  const auto log = run_script(layout, subject, script, layout.schedule(), SimConfig{}, 1);
  const auto text = io::session_log_string(log);
  std::istringstream in(text);
  const auto back = io::read_session_log(in);
  EXPECT_EQ(back, log);
  EXPECT_EQ(io::session_log_string(back), text);
}

TEST(SessionLogIo, RejectsMalformedLines) {
  std::istringstream bad("{\"type\":\"header\"}\nnot json\n");
  EXPECT_ANY_THROW(io::read_session_log(bad));
  std::istringstream empty("");
  EXPECT_ANY_THROW(io::read_session_log(empty));
}

TEST(Reports, FormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) EXPECT_EQ(std::stod(io::fmt(v)), v);
  EXPECT_EQ(io::fmt(std::numeric_limits<double>::quiet_NaN()), "");
}

TEST(Reports, TraceHasOneRowPerFrame) {
  const auto layout = LedLayout::make(PrototypeMode::prototype1, 18.0, 25.0);
  const auto subject = SubjectProfile::random(2, layout.channel_count());
  const auto script = GazeScript{}.fixate({100, 100}, 200'000).saccade({300, 300}).fixate({300, 300}, 200'000);
  const auto log = run_script(layout, subject, script, layout.schedule(), SimConfig{}, 1);
  const auto r = evaluate_accuracy(log, [](std::span<const double>) { return ScreenPoint{200, 200}; }, {});
  const auto csv = io::trace_csv(log, r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time_s,target_x,target_y,gaze_x,gaze_y,estimate_x,estimate_y,error_deg,excluded,exclusion");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
  }
  EXPECT_EQ(rows, log.frames.size());
}

TEST(Reports, HistogramBinsQuarterDegree) {
  AccuracyReport r;
  r.histogram = {0.5, 0.25, 0.25};
  const auto csv = io::histogram_csv({{"gpr", &r}});
  EXPECT_NE(csv.find("bin_lo_deg,bin_hi_deg,gpr"), std::string::npos);
  EXPECT_NE(csv.find("0.5,0.75,0.25"), std::string::npos);
}
