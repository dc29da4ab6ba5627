#include <doctest.h>

#include "oracles.hpp"
#include "xbar/cost_model.hpp"
#include "xbar/error.hpp"
#include "xbar/rng.hpp"
#include "xbar/sws.hpp"

using namespace xbar;

namespace {

SlicedSection section_with(BitMatrix bits, std::size_t bit_width) {
  SlicedSection s;
  s.geometry = {bits.rows(), bit_width, bits.cols() / bit_width};
  s.bits = std::move(bits);
  s.signs.assign(s.geometry.capacity(), 1);
  s.index_map.assign(s.geometry.capacity(), 0);
  return s;
}

BitMatrix ones_prefix(std::size_t rows, std::size_t cols, std::size_t count) {
  BitMatrix m(rows, cols);
  for (std::size_t i = 0; i < count; ++i) m.cells()[i] = 1;
  return m;
}

}  // namespace

TEST_SUITE("cost_model") {
  TEST_CASE("Hamming count of the 2x2 example") {
    const auto a = bit_matrix({{0, 1}, {1, 0}});
    const auto b = bit_matrix({{1, 1}, {0, 0}});
    const auto c = reprogram_cost(a, b);
    CHECK(c.total == 2);
    CHECK(c.per_column == std::vector<std::uint64_t>{2, 0});
  }

  TEST_CASE("identical and complementary matrices") {
    std::uint64_t st = 1;
    const auto a = oracle::random_matrix(5, 6, st);
    CHECK(reprogram_cost(a, a).total == 0);
    const BitMatrix zeros(5, 6, 0);
    const BitMatrix ones(5, 6, 1);
    CHECK(reprogram_cost(zeros, ones).total == 30);
  }

  TEST_CASE("per-column aggregation by bit significance") {
    // two slots of 3 bits: physical columns 0..2 and 3..5
    const auto a = bit_matrix({{0, 0, 0, 0, 0, 0}});
    const auto b = bit_matrix({{1, 0, 1, 1, 1, 0}});
    const auto c = reprogram_cost(a, b, 3);
    CHECK(c.per_column == std::vector<std::uint64_t>{2, 1, 1});
    CHECK(c.total == 4);
    CHECK_THROWS_AS(reprogram_cost(a, b, 4), ValidationError);
  }

  TEST_CASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(reprogram_cost(BitMatrix(2, 2), BitMatrix(2, 3)), ValidationError);
  }

  TEST_CASE("matches the packed-popcount oracle and metric axioms") {
    std::uint64_t st = 99;
    for (int i = 0; i < 300; ++i) {
      const auto a = oracle::random_matrix(8, 4, st);
      const auto b = oracle::random_matrix(8, 4, st);
      const auto c = oracle::random_matrix(8, 4, st);
      const auto ab = reprogram_cost(a, b).total;
      REQUIRE(ab == oracle::bit_diff(a, b));
      CHECK(ab == reprogram_cost(b, a).total);
      CHECK((ab == 0) == (a == b));
      CHECK(reprogram_cost(a, c).total <= ab + reprogram_cost(b, c).total);
    }
  }

  TEST_CASE("best_next_section picks the zero-cost self") {
    std::uint64_t st = 5;
    std::vector<SlicedSection> cands;
    for (int i = 0; i < 4; ++i) cands.push_back(section_with(oracle::random_matrix(4, 4, st), 4));
    const auto r = best_next_section(cands[2].bits, cands);
    CHECK(r.index == 2);
    CHECK(r.cost == 0);
  }

  TEST_CASE("best_next_section breaks ties by lowest index") {
    const BitMatrix current(1, 8);
    std::vector<SlicedSection> cands{section_with(ones_prefix(1, 8, 5), 8), section_with(ones_prefix(1, 8, 3), 8)};
    auto third = BitMatrix(1, 8);
    third.cells()[7] = third.cells()[6] = third.cells()[5] = 1;
    cands.push_back(section_with(third, 8));
    const auto r = best_next_section(current, cands);
    CHECK(r.index == 1);
    CHECK(r.cost == 3);

    const std::vector<SlicedSection> single{cands[0]};
    CHECK(best_next_section(current, single).cost == 5);
    CHECK_THROWS_AS(best_next_section(current, std::vector<SlicedSection>{}), ValidationError);
  }

  TEST_CASE("sequence_cost of a repeated section") {
    const std::vector<float> w{0.5f, -0.3f, 1.5f, 0.0f};
    const std::vector<SlicedSection> s{slice_section(w, {2, 4, 2}, ScaleRule::per_section())};
    const std::vector<std::size_t> visit{0, 0, 0};
    const auto ledger = sequence_cost(s, visit);
    REQUIRE(ledger.per_step.size() == 3);
    CHECK(ledger.per_step[0].switches == 8);  // 1010 1100 1111 0000
    CHECK(ledger.per_step[1].switches == 0);
    CHECK(ledger.per_step[2].switches == 0);
    CHECK(ledger.total_switches == 8);
    CHECK(ledger.per_column == std::vector<std::uint64_t>{3, 2, 2, 1});

    const auto excluded = sequence_cost(s, visit, nullptr, {false});
    CHECK(excluded.total_switches == 0);
    CHECK(excluded.excluded_initial == 8);
  }

  TEST_CASE("sequence_cost of an empty visit") {
    const std::vector<float> w{1.0f};
    const std::vector<SlicedSection> s{slice_section(w, {1, 4, 1}, ScaleRule::per_section())};
    const auto ledger = sequence_cost(s, std::vector<std::size_t>{});
    CHECK(ledger.total_switches == 0);
    CHECK(ledger.per_step.empty());
  }

  TEST_CASE("sequence_cost equals an oracle over random sequences") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<SlicedSection> sections;
      for (int i = 0; i < 6; ++i) {
        std::vector<float> w(8);
        for (auto& v : w) v = static_cast<float>(rng.gaussian());
        sections.push_back(slice_section(w, {8, 4, 1}, ScaleRule::per_section()));
      }
      std::vector<std::size_t> visit(10);
      for (auto& v : visit) v = rng.below(sections.size());
      const auto ledger = sequence_cost(sections, visit);

      std::uint64_t expect = 0;
      BitMatrix prev(8, 4);
      for (auto v : visit) {
        expect += oracle::bit_diff(prev, sections[v].bits);
        prev = sections[v].bits;
      }
      CHECK(ledger.total_switches == expect);
      std::uint64_t steps = 0;
      for (const auto& st : ledger.per_step) steps += st.switches;
      std::uint64_t cols = 0;
      for (auto c : ledger.per_column) cols += c;
      CHECK(steps == expect);
      CHECK(cols == expect);
    }
  }

  TEST_CASE("sequence_cost geometry errors") {
    const std::vector<float> w{1.0f};
    const std::vector<SlicedSection> s{slice_section(w, {1, 4, 1}, ScaleRule::per_section()),
                                       slice_section(w, {1, 5, 1}, ScaleRule::per_section())};
    const std::vector<std::size_t> visit{0, 1};
    CHECK_THROWS_AS(sequence_cost(s, visit), ValidationError);
    const std::vector<std::size_t> missing{3};
    CHECK_THROWS_AS(sequence_cost(s, missing), ValidationError);
    const BitMatrix wrong(2, 2);
    const std::vector<std::size_t> first{0};
    CHECK_THROWS_AS(sequence_cost(s, first, &wrong), ValidationError);
  }

  TEST_CASE("exhaustive next-section search lower-bounds the sorted successor") {
    const auto w = gaussian_weights(128 * 40, 8);
    const auto plan = build_plan(w, 128, SectionOrder::sorted);
    const auto sections = materialize(plan, w, {128, 10, 1}, ScaleRule::per_section());
    for (std::size_t i = 0; i + 1 < sections.size(); ++i) {
      const std::span<const SlicedSection> remaining(sections.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                                     sections.end());
      const auto best = best_next_section(sections[i].bits, remaining);
      CHECK(best.cost <= reprogram_cost(sections[i].bits, sections[i + 1].bits).total);
    }
  }

  TEST_CASE("nearest-neighbor order visits every section once") {
    const auto w = gaussian_weights(64 * 12, 4);
    const auto plan = build_plan(w, 64, SectionOrder::original);
    const auto sections = materialize(plan, w, {64, 8, 1}, ScaleRule::per_section());
    auto order = nearest_neighbor_order(sections);
    REQUIRE(order.size() == sections.size());
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
  }
}
