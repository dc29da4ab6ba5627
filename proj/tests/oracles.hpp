// Brute-force reference computations for tests. Nothing here calls into the
// code paths it is used to check.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "xbar/bitslice.hpp"

namespace oracle {

/// Hamming distance by packing each row into 64-bit words and popcounting XOR.
inline std::uint64_t bit_diff(const xbar::BitMatrix& a, const xbar::BitMatrix& b) {
  std::uint64_t total = 0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t base = 0; base < a.cols(); base += 64) {
      std::uint64_t wa = 0;
      std::uint64_t wb = 0;
      for (std::size_t c = base; c < std::min(a.cols(), base + 64); ++c) {
        wa |= std::uint64_t{a.at(r, c)} << (c - base);
        wb |= std::uint64_t{b.at(r, c)} << (c - base);
      }
      total += static_cast<std::uint64_t>(std::popcount(wa ^ wb));
    }
  }
  return total;
}

/// Binary expansion, least significant digit first, by repeated halving.
inline std::string lsb_first(std::uint32_t m, std::size_t bits) {
  std::string s;
  for (std::size_t j = 0; j < bits; ++j) {
    s.push_back(m % 2 ? '1' : '0');
    m /= 2;
  }
  return s;
}

/// Row of bits of one slot as a string, read directly off the matrix.
inline std::string slot_bits(const xbar::SlicedSection& s, std::size_t slot) {
  std::string out;
  const auto& g = s.geometry;
  for (std::size_t j = 0; j < g.bits; ++j) {
    out.push_back(s.bits.at(slot / g.slots_per_row, (slot % g.slots_per_row) * g.bits + j) ? '1' : '0');
  }
  return out;
}

/// Minimum sum of group maxima over every partition into groups of at most
/// `lanes` jobs (exhaustive set-partition search).
inline std::uint64_t min_round_makespan(const std::vector<std::uint64_t>& costs, std::size_t lanes) {
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::vector<std::uint64_t>> groups;
  std::function<void(std::size_t)> place = [&](std::size_t i) {
    if (i == costs.size()) {
      std::uint64_t sum = 0;
      for (const auto& g : groups) sum += *std::max_element(g.begin(), g.end());
      best = std::min(best, sum);
      return;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].size() < lanes) {
        groups[g].push_back(costs[i]);
        place(i + 1);
        groups[g].pop_back();
      }
    }
    groups.push_back({costs[i]});
    place(i + 1);
    groups.pop_back();
  };
  place(0);
  return best;
}

inline xbar::BitMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t& state) {
  xbar::BitMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      m.set(r, c, static_cast<std::uint8_t>(state >> 63));
    }
  }
  return m;
}

}  // namespace oracle
