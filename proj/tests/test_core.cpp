#include <gtest/gtest.h>

#include <random>

#include "ledgaze/core.hpp"

using namespace ledgaze;

TEST(AngularError, IdenticalPointsIsZero) {
  EXPECT_DOUBLE_EQ(angular_error({100, 100}, {100, 100}, {}), 0.0);
}

TEST(AngularError, ThreeFourFiveTriangle) {
  EXPECT_NEAR(angular_error({103, 104}, {100, 100}, {}), 0.6, 1e-12);
}

TEST(AngularError, TenPixelsAtDefaultScale) {
  DisplayGeometry g;
  EXPECT_DOUBLE_EQ(g.degrees_per_pixel, 0.12);
  EXPECT_NEAR(angular_error({110, 100}, {100, 100}, g), 1.2, 1e-12);
}

TEST(AngularError, MetricProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 520.0);
  DisplayGeometry g;
  for (int i = 0; i < 1000; ++i) {
    const ScreenPoint a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    EXPECT_EQ(angular_error(a, b, g), angular_error(b, a, g));
    EXPECT_LE(angular_error(a, c, g), angular_error(a, b, g) + angular_error(b, c, g) + 1e-12);
  }
}

TEST(AngularError, ScalesLinearlyWithDegreesPerPixel) {
  DisplayGeometry g1, g2;
  g2.degrees_per_pixel = 3 * g1.degrees_per_pixel;
  const ScreenPoint a{12, 40}, b{300, 7};
  EXPECT_NEAR(angular_error(a, b, g2), 3 * angular_error(a, b, g1), 1e-12);
}

TEST(DisplayGeometry, RejectsNonPositiveScale) {
  DisplayGeometry g;
  g.degrees_per_pixel = 0.0;
  EXPECT_THROW(g.validate(), ArgumentError);
}

TEST(DisplayGeometry, ContainsIsHalfOpen) {
  DisplayGeometry g;
  EXPECT_TRUE(g.contains({0, 0}));
  EXPECT_TRUE(g.contains({519.9, 519.9}));
  EXPECT_FALSE(g.contains({520, 10}));
  EXPECT_FALSE(g.contains({-0.1, 10}));
}

TEST(ValidateFrames, AcceptsWellFormedSession) {
  std::vector<SensorFrame> f{{0, {1, 2, 3, 4}}, {10, {1023, 0, 5, 6}}};
  EXPECT_NO_THROW(validate_frames(f, 4));
}

TEST(ValidateFrames, RejectsViolations) {
  EXPECT_THROW(validate_frames(std::vector<SensorFrame>{{0, {1, 2, 3}}}, 3), ArgumentError);
  EXPECT_THROW(validate_frames(std::vector<SensorFrame>{{0, {1, 2, 3}}}, 4), DimensionError);
  EXPECT_THROW(validate_frames(std::vector<SensorFrame>{{0, {1, 2, 3, 1024}}}, 4), ArgumentError);
  EXPECT_THROW(validate_frames(std::vector<SensorFrame>{{5, {1, 2, 3, 4}}, {5, {1, 2, 3, 4}}}, 4), ArgumentError);
}

TEST(NormalizeFrame, DividesByAdcMax) {
  const auto v = normalize_frame({0, {0, 1023, 341}});
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 1.0);
  EXPECT_DOUBLE_EQ(v[2], 341.0 / 1023.0);
}

TEST(CalibrationSet, EnforcesEqualLengthAndAllowsDuplicates) {
  CalibrationSet cal;
  cal.add({0.1, 0.2}, {1, 1});
  cal.add({0.1, 0.2}, {1, 1});
  EXPECT_EQ(cal.size(), 2u);
  EXPECT_EQ(cal.channel_count(), 2u);
  EXPECT_THROW(cal.add({0.1}, {2, 2}), DimensionError);
}

TEST(CalibrationSet, SelectChannelsKeepsOrder) {
  CalibrationSet cal;
  cal.add({1, 2, 3}, {5, 6});
  const std::vector<std::size_t> pick{2, 0};
  const auto sub = cal.select_channels(pick);
  EXPECT_EQ(sub.channel_count(), 2u);
  EXPECT_EQ(sub[0].mean, (std::vector<double>{3, 1}));
  EXPECT_EQ(sub[0].target, (ScreenPoint{5, 6}));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(cal.select_channels(bad), DimensionError);
}
