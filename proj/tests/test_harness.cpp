#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "smptw/harness.hpp"
#include "test_support.hpp"

using namespace smptw;
using namespace smptw::harness;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "inline", "inline");
}

SimulationPlan small_plan(int reps) {
  SimulationPlan plan;
  plan.param_pairs = {SmptwParams(1.5, 2.0), SmptwParams(0.5, 4.5)};
  plan.sample_sizes = {30, 60};
  plan.replications = reps;
  plan.base_seed = 777;
  return plan;
}

}  // namespace

TEST(LoadDataset, SimpleColumn) {
  const auto ds = parse("1.0\n2.5\n");
  EXPECT_EQ(ds.values, (std::vector<double>{1.0, 2.5}));
}

TEST(LoadDataset, HeaderCommentsAndWhitespace) {
  std::string text = "y\n";
  for (int i = 1; i <= 76; ++i) text += std::to_string(0.1 * i) + "\n";
  EXPECT_EQ(parse(text).values.size(), 76u);
  EXPECT_EQ(parse("# note\n\n0.5 1.5\t2.5\n3\n").values, (std::vector<double>{0.5, 1.5, 2.5, 3.0}));
  EXPECT_EQ(parse("time,\n1.5,\n2,\n").values, (std::vector<double>{1.5, 2.0}));
  EXPECT_EQ(parse("1e-3\n+2\n").values, (std::vector<double>{1e-3, 2.0}));
}

TEST(LoadDataset, Diagnostics) {
  try {
    parse("y\n1.0\nabc\n");
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  try {
    parse("1.0\n-2\n");
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("0\n"), DomainError);
  EXPECT_THROW(parse("inf\n"), DomainError);
  EXPECT_THROW(parse("y\n"), DomainError);
  EXPECT_THROW(parse(""), DomainError);
  EXPECT_THROW(parse("1,2\n3,4\n"), DomainError);
  EXPECT_THROW(load_dataset("/nonexistent/file.csv"), DomainError);
}

TEST(LoadDataset, BundledKevlar) {
  const auto path = smptw::testing::kevlar_path();
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "kevlar373.csv not found, skipping";
  const auto ds = load_dataset(path);
  EXPECT_EQ(ds.values.size(), 76u);
  EXPECT_EQ(ds.name, "kevlar373");
  for (double v : ds.values) EXPECT_GT(v, 0.0);
}

TEST(SimulationPlan, Validation) {
  auto plan = small_plan(10);
  EXPECT_NO_THROW(plan.validate());
  plan.sample_sizes = {60, 30};
  EXPECT_THROW(plan.validate(), DomainError);
  plan = small_plan(0);
  EXPECT_THROW(plan.validate(), DomainError);
  plan = small_plan(10);
  plan.confidence_level = 1.0;
  EXPECT_THROW(plan.validate(), DomainError);
  EXPECT_EQ(small_plan(200).retry_cap(), 10);
  EXPECT_EQ(small_plan(19).retry_cap(), 0);
}

TEST(SimulationPlan, PublishedPreset) {
  const auto plan = published_study_plan();
  ASSERT_EQ(plan.param_pairs.size(), 5u);
  EXPECT_EQ(plan.param_pairs[2], SmptwParams(2.5, 1.2));
  EXPECT_EQ(plan.sample_sizes, (std::vector<int>{50, 100, 250, 500, 1000}));
  EXPECT_EQ(plan.replications, 1000);
  EXPECT_DOUBLE_EQ(plan.confidence_level, 0.95);
}

TEST(SimulationPlan, FromJson) {
  const auto j = nlohmann::json::parse(
      R"({"param_pairs": [[3, 7], [0.5, 4.5]], "sample_sizes": [50, 100], "replications": 20, "base_seed": 9})");
  const auto plan = plan_from_json(j);
  EXPECT_EQ(plan.param_pairs.size(), 2u);
  EXPECT_EQ(plan.replications, 20);
  EXPECT_EQ(plan.base_seed, 9u);
  EXPECT_DOUBLE_EQ(plan.confidence_level, 0.95);
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"sample_sizes": [5]})")), DomainError);
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"param_pairs": [[-1, 2]], "sample_sizes": [50]})")),
               DomainError);
}

TEST(Simulation, SingleReplicationIsDeterministic) {
  auto plan = small_plan(1);
  const auto a = to_json(run_simulation(plan, {1})).dump();
  const auto b = to_json(run_simulation(plan, {1})).dump();
  EXPECT_EQ(a, b);
}

TEST(Simulation, ByteIdenticalAcrossThreadCounts) {
  const auto plan = small_plan(25);
  const auto one = to_json(run_simulation(plan, {1})).dump(2);
  const auto eight = to_json(run_simulation(plan, {8})).dump(2);
  const auto again = to_json(run_simulation(plan, {3})).dump(2);
  EXPECT_EQ(one, eight);
  EXPECT_EQ(one, again);
  auto other = plan;
  other.base_seed += 1;
  EXPECT_NE(one, to_json(run_simulation(other, {1})).dump(2));
}

TEST(Simulation, ReportInvariants) {
  const auto report = run_simulation(small_plan(40), {});
  ASSERT_EQ(report.cells.size(), 4u);
  for (const auto& c : report.cells) {
    EXPECT_EQ(c.successful, 40);
    for (const auto& s : c.summaries) {
      EXPECT_GE(s.mse, s.bias * s.bias - 1e-12);
      EXPECT_GE(s.coverage, 0.0);
      EXPECT_LE(s.coverage, 1.0);
      EXPECT_NEAR(s.bias, s.mean_estimate - s.true_value, 1e-12);
    }
  }
  const auto j = to_json(report);
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("rows").size(), 4u);
  EXPECT_NE(format_table(report).find("retries"), std::string::npos);
}

TEST(Simulation, DeskScaleCell) {
  SimulationPlan plan;
  plan.param_pairs = {SmptwParams(1.5, 2.0)};
  plan.sample_sizes = {500};
  plan.replications = 200;
  plan.base_seed = 31337;
  const auto report = run_simulation(plan, {});
  const auto& c = report.cells.at(0);
  EXPECT_FALSE(c.unreliable);
  for (const auto& s : c.summaries) {
    EXPECT_LE(std::abs(s.bias), 0.1) << s.name;
    EXPECT_GE(s.coverage, 0.90) << s.name;
    EXPECT_LE(s.coverage, 0.99) << s.name;
  }
}

TEST(Simulation, BiasAndMseShrinkWithSampleSize) {
  auto plan = published_study_plan(200, 4242);
  plan.sample_sizes = {50, 1000};
  const auto report = run_simulation(plan, {});
  for (const auto& p : plan.param_pairs) {
    const auto* small = report.find(p.lambda(), p.phi(), 50);
    const auto* large = report.find(p.lambda(), p.phi(), 1000);
    ASSERT_TRUE(small && large);
    for (int k = 0; k < 2; ++k) {
      EXPECT_LT(large->summaries[k].mse, small->summaries[k].mse) << p.lambda() << " " << p.phi() << " " << k;
      EXPECT_LT(std::abs(large->summaries[k].bias), std::abs(small->summaries[k].bias))
          << p.lambda() << " " << p.phi() << " " << k;
    }
  }
}

TEST(Curves, ExponentialCase) {
  const auto rows = emit_curves(SmptwParams(1.0, 1.0), {0.0, 5.0, 6});
  ASSERT_EQ(rows.size(), 6u);
  for (int i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(rows[i].y, i);
    EXPECT_NEAR(rows[i].pdf, std::exp(-static_cast<double>(i)), 1e-15);
  }
  EXPECT_NEAR(*rows[0].hazard, 1.0, 1e-15);
  EXPECT_NEAR(*rows[3].hazard, 1.0, 1e-12);
}

TEST(Curves, CdfNondecreasingAndHazardOmittedInFarTail) {
  for (const auto& p : smptw::testing::grid_params()) {
    const auto rows = emit_curves(p, {0.0, 8.0, 400});
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GE(rows[i].cdf, rows[i - 1].cdf);
      EXPECT_EQ(rows[i].hazard.has_value(), rows[i].survival >= 1e-12);
      if (rows[i].hazard) EXPECT_GE(*rows[i].hazard, 0.0);
    }
  }
}

TEST(Curves, TrapezoidIntegral) {
  const SmptwParams p(3.0, 2.0);
  const double top = quantile(p, 0.9999);
  const auto rows = emit_curves(p, {0.0, top, 1000});
  double area = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) area += 0.5 * (rows[i].pdf + rows[i - 1].pdf) * (rows[i].y - rows[i - 1].y);
  EXPECT_NEAR(area, 0.9999, 1e-5);
}

TEST(Curves, InvalidGrid) {
  const SmptwParams p(2.0, 2.0);
  EXPECT_THROW(emit_curves(p, {-1.0, 2.0, 5}), DomainError);
  EXPECT_THROW(emit_curves(p, {2.0, 2.0, 5}), DomainError);
  EXPECT_THROW(emit_curves(p, {0.0, 2.0, 1}), DomainError);
}

TEST(Curves, CsvLayout) {
  std::ostringstream out;
  write_curves_csv(out, emit_curves(SmptwParams(3.0, 7.0), {0.0, 3.0, 4}));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "y,pdf,cdf,survival,hazard");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(last.back(), ',');  // survival at y = 3 is below 1e-12
}

TEST(Application, ExclusionFlagLeavesTwoParameterModelUnranked) {
  const auto path = smptw::testing::kevlar_path();
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "kevlar373.csv not found, skipping";
  const auto ds = load_dataset(path);
  const auto faithful = run_application(ds, {true});
  ASSERT_EQ(faithful.rows.size(), 7u);
  EXPECT_EQ(faithful.best()->spec.id, zoo::ModelId::smp_weibull_3p);
  EXPECT_NEAR(faithful.find(zoo::ModelId::standard_weibull)->criteria->aic, 294.3363, 1e-3);
  const auto full = run_application(ds);
  EXPECT_TRUE(full.find(zoo::ModelId::smptw_2p)->rank.has_value());
  const auto j = to_json(full);
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("rows").size(), 7u);
  EXPECT_NE(format_table(full).find("smp_weibull_3p"), std::string::npos);
}
