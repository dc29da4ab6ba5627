#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xbar/error.hpp"
#include "xbar/rng.hpp"
#include "xbar/sws.hpp"

using namespace xbar;

TEST_SUITE("sws") {
  TEST_CASE("sorted plan of the sample") {
    const std::vector<float> w{0.5f, -0.3f, 1.5f, 0.0f};
    const auto plan = build_plan(w, 2, SectionOrder::sorted);
    CHECK(plan.permutation == std::vector<std::size_t>{3, 1, 0, 2});
    REQUIRE(plan.section_count() == 2);
    CHECK(plan.sections[0] == std::vector<std::size_t>{3, 1});
    CHECK(plan.sections[1] == std::vector<std::size_t>{0, 2});
  }

  TEST_CASE("already sorted non-negative weights keep identity order") {
    const std::vector<float> w{0.0f, 0.1f, 0.1f, 0.7f, 2.0f};
    const auto plan = build_plan(w, 2, SectionOrder::sorted);
    CHECK(plan.permutation == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(plan.sections.back().size() == 1);
  }

  TEST_CASE("one section when N equals section size") {
    const std::vector<float> w{3.0f, -1.0f, 2.0f};
    CHECK(build_plan(w, 3, SectionOrder::sorted).section_count() == 1);
    CHECK(build_plan(w, 3, SectionOrder::original).sections[0] == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("ties keep ascending original index") {
    const std::vector<float> w{-1.0f, 1.0f, 0.5f, -0.5f};
    CHECK(build_plan(w, 4, SectionOrder::sorted).permutation == std::vector<std::size_t>{2, 3, 0, 1});
  }

  TEST_CASE("build_plan errors") {
    CHECK_THROWS_AS(build_plan(std::vector<float>{}, 2, SectionOrder::sorted), ValidationError);
    const std::vector<float> w{1.0f};
    CHECK_THROWS_AS(build_plan(w, 0, SectionOrder::sorted), ValidationError);
  }

  TEST_CASE("plan properties on random weights") {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<float> w(1 + rng.below(300));
      for (auto& v : w) v = static_cast<float>(rng.gaussian());
      const std::size_t size = 1 + rng.below(40);
      const auto plan = build_plan(w, size, SectionOrder::sorted);

      // bijection
      auto perm = plan.permutation;
      std::sort(perm.begin(), perm.end());
      std::vector<std::size_t> ident(w.size());
      std::iota(ident.begin(), ident.end(), std::size_t{0});
      REQUIRE(perm == ident);

      // partition and nested magnitude ranges
      std::size_t covered = 0;
      for (std::size_t s = 0; s < plan.section_count(); ++s) {
        covered += plan.sections[s].size();
        CHECK(plan.sections[s].size() <= size);
        if (s + 1 < plan.section_count()) {
          double hi = 0.0;
          for (auto i : plan.sections[s]) hi = std::max(hi, static_cast<double>(std::fabs(w[i])));
          double lo = INFINITY;
          for (auto i : plan.sections[s + 1]) lo = std::min(lo, static_cast<double>(std::fabs(w[i])));
          CHECK(hi <= lo);
        }
      }
      CHECK(covered == w.size());
    }
  }

  TEST_CASE("index matching of the sorted pair") {
    const std::vector<float> w{0.5f, -0.3f};
    const auto plan = build_plan(w, 2, SectionOrder::sorted);
    const auto sections = materialize(plan, w, {2, 4, 1}, ScaleRule::fixed(0.1));
    CHECK(sections[0].index_map == std::vector<std::size_t>{1, 0});
    const std::vector<double> x{2.0, 4.0};
    const auto products = apply_index_matching(sections[0], x);
    REQUIRE(products.size() == 2);
    CHECK(products[0] == doctest::Approx(-1.2));
    CHECK(products[1] == doctest::Approx(1.0));
    CHECK(products[0] + products[1] == doctest::Approx(0.5 * 2 + -0.3 * 4));
  }

  TEST_CASE("index matching with identity layout and zero input") {
    const std::vector<float> w{0.5f, -0.25f, 1.0f};
    const auto plan = build_plan(w, 4, SectionOrder::original);
    const auto s = materialize(plan, w, {4, 8, 1}, ScaleRule::per_section());
    const std::vector<double> x{1.0, 2.0, 3.0};
    const auto p = apply_index_matching(s[0], x);
    const auto r = reconstruct(s[0]);
    for (std::size_t k = 0; k < 3; ++k) CHECK(p[k] == r[k] * x[k]);
    CHECK(p[3] == 0.0);  // padding
    const std::vector<double> zero(3, 0.0);
    for (double v : apply_index_matching(s[0], zero)) CHECK(v == 0.0);
    const std::vector<double> short_input{1.0};
    CHECK_THROWS_AS(apply_index_matching(s[0], short_input), ValidationError);
  }

  TEST_CASE("dot product is preserved across layouts with a shared scale") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<float> w(50 + rng.below(200));
      std::vector<double> x(w.size());
      for (auto& v : w) v = static_cast<float>(rng.gaussian());
      for (auto& v : x) v = rng.gaussian();
      // Power-of-two scale keeps every product exact in double.
      const auto rule = ScaleRule::fixed(1.0 / 64);
      const CrossbarGeometry g{8, 10, 2};
      auto dot = [&](SectionOrder order) {
        const auto plan = build_plan(w, g.capacity(), order);
        double sum = 0.0;
        for (const auto& s : materialize(plan, w, g, rule)) {
          for (double p : apply_index_matching(s, x)) sum += p;
        }
        return sum;
      };
      // Summation order differs, so allow a few ulps of the magnitude sum.
      double mag = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) mag += std::fabs(w[i] * x[i]);
      CHECK(std::fabs(dot(SectionOrder::sorted) - dot(SectionOrder::original)) <= mag * 1e-14);
    }
  }

  TEST_CASE("dot product with per-section scales stays within quantization bounds") {
    Rng rng(37);
    std::vector<float> w(1000);
    std::vector<double> x(w.size());
    for (auto& v : w) v = static_cast<float>(rng.gaussian());
    for (auto& v : x) v = rng.gaussian();
    const CrossbarGeometry g{64, 10, 1};
    double exact = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) exact += w[i] * x[i];
    for (auto order : {SectionOrder::sorted, SectionOrder::original}) {
      const auto plan = build_plan(w, g.capacity(), order);
      double sum = 0.0;
      double bound = 0.0;
      for (const auto& s : materialize(plan, w, g, ScaleRule::per_section())) {
        for (double p : apply_index_matching(s, x)) sum += p;
        for (std::size_t k = 0; k < s.used_slots(); ++k) bound += s.scale / 2 * std::fabs(x[s.index_map[k]]);
      }
      CHECK(std::fabs(sum - exact) <= bound + 1e-9);
    }
  }

  TEST_CASE("assemble_weights inverts the permutation") {
    const std::vector<float> w{0.5f, -0.3f, 1.5f, 0.0f, 0.9f};
    const auto plan = build_plan(w, 2, SectionOrder::sorted);
    const auto s = materialize(plan, w, {2, 12, 1}, ScaleRule::per_section());
    const auto back = assemble_weights(s, w.size());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(back[i] == doctest::Approx(w[i]).epsilon(1e-3));
  }

  TEST_CASE("materialize checks section size against capacity") {
    const std::vector<float> w(10, 1.0f);
    const auto plan = build_plan(w, 5, SectionOrder::sorted);
    CHECK_THROWS_AS(materialize(plan, w, {2, 4, 2}, ScaleRule::per_section()), CapacityError);
  }

  TEST_CASE("global scale rule shares one scale across sections") {
    const std::vector<float> w{0.1f, 0.2f, 3.0f, 0.4f};
    const auto plan = build_plan(w, 2, SectionOrder::sorted);
    const auto s = materialize(plan, w, {2, 8, 1}, ScaleRule::global());
    CHECK(s[0].scale == s[1].scale);
    CHECK(s[0].scale == doctest::Approx(3.0 / 255));
  }
}
