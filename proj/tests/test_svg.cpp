/*
 * Copyright 2026 The DriftScope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "driftscope/csv.hpp"
#include "driftscope/errors.hpp"
#include "driftscope/pipeline.hpp"
#include "driftscope/svg.hpp"

namespace driftscope {
namespace {

std::size_t Count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

TEST(NiceTicks, Fixtures) {
  const auto unit = NiceTicks(0.0, 1.0);
  ASSERT_EQ(unit.size(), 6u);
  for (std::size_t i = 0; i < unit.size(); ++i) EXPECT_NEAR(unit[i], 0.2 * i, 1e-12);
  EXPECT_EQ(NiceTicks(0.0, 10.0), (std::vector<double>{0, 2, 4, 6, 8, 10}));
  EXPECT_EQ(NiceTicks(2015, 2024).front(), 2014.0);
  EXPECT_EQ(NiceTicks(2015, 2024).back(), 2024.0);
  EXPECT_THROW(NiceTicks(1.0, 1.0), InputError);
  EXPECT_THROW(NiceTicks(0.0, INFINITY), InputError);
}

TEST(NiceTicks, CoverRangeWithNiceSteps) {
  const double ranges[][2] = {{0.97, 1.0}, {-3.2, 7.9}, {0.0012, 0.0031}, {16, 256}};
  for (const auto& r : ranges) {
    const auto t = NiceTicks(r[0], r[1]);
    ASSERT_GE(t.size(), 2u);
    EXPECT_LE(t.front(), r[0] + 1e-12);
    EXPECT_GE(t.back(), r[1] - 1e-12);
    const double step = t[1] - t[0];
    const double mant = step / std::pow(10.0, std::floor(std::log10(step) + 1e-9));
    bool nice = false;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) nice |= std::abs(mant - m) < 1e-6;
    EXPECT_TRUE(nice) << step;
  }
}

TEST(LineChart, OnePolylinePerSeriesAndEscaping) {
  LineChart c;
  c.title = "A & B <test>";
  c.x_label = "year";
  c.y_label = "value";
  c.series = {{"one", {1, 2, 3}, {0.1, 0.2, 0.3}}, {"two \"q\"", {1, 2, 3}, {0.3, 0.1, 0.2}}};
  const std::string svg = RenderLineChart(c);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(Count(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("A &amp; B &lt;test&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("<test>"), std::string::npos);
  EXPECT_EQ(svg, RenderLineChart(c));
}

TEST(LineChart, Errors) {
  LineChart c;
  EXPECT_THROW(RenderLineChart(c), InputError);
  c.series = {{"ragged", {1, 2}, {1}}};
  EXPECT_THROW(RenderLineChart(c), InputError);
  c.series = {{"nan", {1, 2}, {1, NAN}}};
  EXPECT_THROW(RenderLineChart(c), InputError);
}

TEST(BarChart, RectsAndErrors) {
  BarChart b;
  b.title = "bars";
  b.categories = {"x", "y", "z"};
  b.series_names = {"s1", "s2"};
  b.values = {{1, 2, 3}, {3, 2, 1}};
  const std::string svg = RenderBarChart(b);
  EXPECT_GE(Count(svg, "<rect"), 6u);
  b.values = {{1, 2}, {3, 2, 1}};
  EXPECT_THROW(RenderBarChart(b), InputError);
  b.categories.clear();
  b.values.clear();
  EXPECT_THROW(RenderBarChart(b), InputError);
}

TEST(Golden, StabilityPlotIsByteIdentical) {
  const std::string dir = DRIFTSCOPE_GOLDEN_DIR;
  const CsvTable table = ReadCsv(dir + "/stability.csv");
  EXPECT_EQ(RenderStabilityPlot(table, "baseline"), ReadFile(dir + "/stability_baseline.svg"));
  EXPECT_THROW(RenderStabilityPlot(table, "Z"), InputError);
}

}  // namespace
}  // namespace driftscope
