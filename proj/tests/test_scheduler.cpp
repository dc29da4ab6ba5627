#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "xbar/error.hpp"
#include "xbar/rng.hpp"
#include "xbar/scheduler.hpp"

using namespace xbar;

namespace {

using Lists = std::vector<std::vector<std::size_t>>;

std::vector<SlicedSection> gaussian_sections(std::size_t n, std::uint64_t seed, SectionOrder order,
                                             const CrossbarGeometry& g = {128, 10, 1}) {
  const auto w = gaussian_weights(n, seed);
  return materialize(build_plan(w, g.capacity(), order), w, g, ScaleRule::per_section());
}

}  // namespace

TEST_SUITE("scheduler") {
  TEST_CASE("stride-L interleaves") {
    CHECK(plan_stride_L(6, 2).assignments == Lists{{0, 2, 4}, {1, 3, 5}});
    CHECK(plan_stride_L(5, 1).assignments == Lists{{0, 1, 2, 3, 4}});
    CHECK(plan_stride_L(3, 3).assignments == Lists{{0}, {1}, {2}});
  }

  TEST_CASE("stride-1 uses contiguous blocks, larger ones first") {
    CHECK(plan_stride_one(6, 2).assignments == Lists{{0, 1, 2}, {3, 4, 5}});
    CHECK(plan_stride_one(5, 2).assignments == Lists{{0, 1, 2}, {3, 4}});
    CHECK(plan_stride_one(7, 3).assignments == Lists{{0, 1, 2}, {3, 4}, {5, 6}});
    CHECK(plan_stride_one(5, 1).assignments == plan_stride_L(5, 1).assignments);
  }

  TEST_CASE("plans reject more crossbars than sections") {
    CHECK_THROWS_AS(plan_stride_L(3, 4), ValidationError);
    CHECK_THROWS_AS(plan_stride_one(3, 4), ValidationError);
    CHECK_THROWS_AS(plan_stride_one(3, 0), ValidationError);
  }

  TEST_CASE("plans cover each section exactly once") {
    for (std::size_t s = 1; s < 40; ++s) {
      for (std::size_t l = 1; l <= s; l += 3) {
        CHECK_NOTHROW(plan_stride_L(s, l).validate());
        CHECK_NOTHROW(plan_stride_one(s, l).validate());
        CHECK(plan_stride_one(s, l).section_count() == s);
      }
    }
    ReprogramPlan bad;
    bad.crossbars = 2;
    bad.assignments = {{0, 1}, {1}};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
  }

  TEST_CASE("unsorted baseline requires an original-order plan") {
    const std::vector<float> w(12, 1.0f);
    const auto original = build_plan(w, 2, SectionOrder::original);
    const auto base = plan_unsorted_baseline(original, 2);
    CHECK(base.assignments == Lists{{0, 2, 4}, {1, 3, 5}});
    CHECK(base.policy == SchedulePolicy::unsorted_baseline);
    CHECK_THROWS_AS(plan_unsorted_baseline(build_plan(w, 2, SectionOrder::sorted), 2), ValidationError);
  }

  TEST_CASE("identical weights give equal baseline and sorted ledgers") {
    const std::vector<float> w(64, 0.75f);
    const CrossbarGeometry g{8, 6, 1};
    const auto sp = build_plan(w, 8, SectionOrder::sorted);
    const auto op = build_plan(w, 8, SectionOrder::original);
    const auto ss = materialize(sp, w, g, ScaleRule::per_section());
    const auto os = materialize(op, w, g, ScaleRule::per_section());
    auto sorted_plan = plan_stride_L(sp, 2);
    auto base = plan_unsorted_baseline(op, 2);
    const auto a = evaluate_plan(sorted_plan, ss);
    const auto b = evaluate_plan(base, os);
    CHECK(a.total_switches == b.total_switches);
    for (const auto& ledger : a.ledgers) {
      for (std::size_t k = 1; k < ledger.per_step.size(); ++k) CHECK(ledger.per_step[k].switches == 0);
    }
    auto one = plan_stride_one(sp, 2);
    CHECK(evaluate_plan(one, ss).total_switches == a.total_switches);
  }

  TEST_CASE("L=1 on already sorted input equals the baseline") {
    std::vector<float> w(256);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<float>(i) / 256.0f;
    const CrossbarGeometry g{16, 8, 1};
    const auto sp = build_plan(w, 16, SectionOrder::sorted);
    const auto op = build_plan(w, 16, SectionOrder::original);
    auto a = plan_stride_L(sp, 1);
    auto b = plan_unsorted_baseline(op, 1);
    const auto ea = evaluate_plan(a, materialize(sp, w, g, ScaleRule::per_section()));
    const auto eb = evaluate_plan(b, materialize(op, w, g, ScaleRule::per_section()));
    CHECK(ea.total_switches == eb.total_switches);
  }

  TEST_CASE("evaluate_plan speedup and errors") {
    const auto sections = gaussian_sections(128 * 8, 3, SectionOrder::sorted);
    auto plan = plan_stride_one(sections.size(), 2);
    const auto self = evaluate_plan(plan, sections);
    CHECK(self.speedup == 1.0);
    CHECK(plan.ledgers.size() == 2);
    const auto half = evaluate_plan(plan, sections, self.total_switches * 2);
    CHECK(half.speedup == doctest::Approx(2.0));

    auto wrong = plan_stride_one(sections.size() - 1, 2);
    CHECK_THROWS_AS(evaluate_plan(wrong, sections), ValidationError);
    ReprogramPlan unevaluated = plan_stride_one(4, 2);
    CHECK_THROWS_AS(plan_jobs(unevaluated), ValidationError);
  }

  TEST_CASE("stride-1 is no worse than stride-4 on long Gaussian schedules") {
    const auto sections = gaussian_sections(10000, 42, SectionOrder::sorted);
    REQUIRE(sections.size() >= 64);
    auto one = plan_stride_one(sections.size(), 4);
    auto four = plan_stride_L(sections.size(), 4);
    CHECK(evaluate_plan(one, sections).total_switches <= evaluate_plan(four, sections).total_switches);
  }

  TEST_CASE("greedy rounds of the worked example") {
    const std::vector<std::uint64_t> costs{9, 8, 2, 1};
    const auto s = greedy_rounds(costs, 2);
    REQUIRE(s.rounds.size() == 2);
    CHECK(s.round_times == std::vector<std::uint64_t>{9, 2});
    CHECK(s.makespan == 11);
    CHECK(s.serial_time == 20);
    CHECK(s.speedup() == doctest::Approx(20.0 / 11.0));
  }

  TEST_CASE("mixed grouping of the worked example") {
    const std::vector<Job> order{{0, 9}, {3, 1}, {1, 8}, {2, 2}};
    const auto s = chunk_rounds(order, 2);
    CHECK(s.makespan == 17);
    CHECK(s.speedup() == doctest::Approx(20.0 / 17.0));
    CHECK(s.speedup() < greedy_rounds(std::vector<std::uint64_t>{9, 8, 2, 1}, 2).speedup());
  }

  TEST_CASE("equal costs reach min(L, jobs)") {
    for (std::size_t k : {1u, 3u, 8u, 16u}) {
      const std::vector<std::uint64_t> costs(k, 7);
      for (std::size_t lanes : {1u, 4u, 8u}) {
        const double ideal = static_cast<double>(std::min(lanes, k));
        const auto greedy = greedy_rounds(costs, lanes);
        if (k % lanes == 0 || k < lanes) CHECK(greedy.speedup() == ideal);
        CHECK(random_rounds(costs, lanes, 5).speedup() == greedy.speedup());
      }
    }
  }

  TEST_CASE("one lane is serial") {
    const std::vector<std::uint64_t> costs{4, 1, 9, 3};
    const auto s = greedy_rounds(costs, 1);
    CHECK(s.makespan == s.serial_time);
    CHECK(s.speedup() == 1.0);
  }

  TEST_CASE("random rounds are reproducible per seed") {
    std::vector<std::uint64_t> costs(100);
    Rng rng(2);
    for (auto& c : costs) c = rng.below(1000);
    const auto a = random_rounds(costs, 8, 77);
    const auto b = random_rounds(costs, 8, 77);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (std::size_t r = 0; r < a.rounds.size(); ++r) {
      for (std::size_t j = 0; j < a.rounds[r].size(); ++j) CHECK(a.rounds[r][j].id == b.rounds[r][j].id);
    }
  }

  TEST_CASE("greedy equals the exhaustive partition optimum on small instances") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::uint64_t> costs(1 + rng.below(8));
      for (auto& c : costs) c = rng.below(20);
      const std::size_t lanes = 1 + rng.below(4);
      const auto greedy = greedy_rounds(costs, lanes);
      REQUIRE(greedy.makespan == oracle::min_round_makespan(costs, lanes));
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CHECK(greedy.makespan <= random_rounds(costs, lanes, seed).makespan);
      }
    }
  }

  TEST_CASE("speedup never exceeds the lane count") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::uint64_t> costs(1 + rng.below(300));
      for (auto& c : costs) c = rng.below(500);
      const std::size_t lanes = 1 + rng.below(64);
      CHECK(greedy_rounds(costs, lanes).speedup() <= static_cast<double>(lanes));
      CHECK(random_rounds(costs, lanes, trial).speedup() <= static_cast<double>(lanes));
    }
  }

  TEST_CASE("round inputs are validated") {
    CHECK_THROWS_AS(greedy_rounds(std::vector<std::uint64_t>{}, 2), ValidationError);
    CHECK_THROWS_AS(greedy_rounds(std::vector<std::uint64_t>{1}, 0), ValidationError);
  }
}
