#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "maple/sketch.hpp"

using namespace maple;

namespace {

// Plain recursive definition of edit distance, exponential but obviously
// correct; serves as the oracle for the DP implementation.
int edit_distance_recursive(const std::vector<SketchToken>& a, size_t i,
                            const std::vector<SketchToken>& b, size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int del = 1 + edit_distance_recursive(a, i + 1, b, j);
  int ins = 1 + edit_distance_recursive(a, i, b, j + 1);
  int sub = (a[i] == b[j] ? 0 : 1) + edit_distance_recursive(a, i + 1, b, j + 1);
  return std::min({del, ins, sub});
}

int edit_distance_recursive(const std::vector<SketchToken>& a,
                            const std::vector<SketchToken>& b) {
  return edit_distance_recursive(a, 0, b, 0);
}

// Enumerates every sequence of length `len` over the given symbols.
void enumerate_sequences(const std::vector<PrimitiveId>& symbols, int len,
                         std::vector<std::vector<PrimitiveId>>& out) {
  std::vector<PrimitiveId> cur(static_cast<size_t>(len), symbols[0]);
  std::vector<int> idx(static_cast<size_t>(len), 0);
  while (true) {
    for (int i = 0; i < len; ++i)
      cur[static_cast<size_t>(i)] = symbols[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    out.push_back(cur);
    int pos = len - 1;
    while (pos >= 0) {
      idx[static_cast<size_t>(pos)] += 1;
      if (idx[static_cast<size_t>(pos)] < static_cast<int>(symbols.size())) break;
      idx[static_cast<size_t>(pos)] = 0;
      pos -= 1;
    }
    if (pos < 0) break;
  }
}

std::vector<SketchToken> random_tokens(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len_d(0, max_len);
  std::uniform_int_distribution<int> sym_d(0, 4);
  std::uniform_int_distribution<int> id_d(0, 3);
  int len = len_d(rng);
  std::vector<PrimitiveId> types;
  types.reserve(static_cast<size_t>(len));
  for (int i = 0; i < len; ++i)
    types.push_back(static_cast<PrimitiveId>(sym_d(rng)));
  return tokenize_sketch(types, id_d(rng));
}

}  // namespace

TEST_CASE("atomic tokens never match across sketches or positions") {
  auto a = tokenize_sketch({PrimitiveId::Atomic, PrimitiveId::Atomic}, 0);
  auto b = tokenize_sketch({PrimitiveId::Atomic}, 1);
  CHECK(a[0] == a[0]);
  CHECK_FALSE(a[0] == a[1]);  // different occurrence, same sketch
  CHECK_FALSE(a[0] == b[0]);  // different sketch
  auto g0 = tokenize_sketch({PrimitiveId::Grasp}, 0);
  auto g1 = tokenize_sketch({PrimitiveId::Grasp}, 1);
  CHECK(g0[0] == g1[0]);  // non-atomic types match across sketches
  CHECK_FALSE(g0[0] == a[0]);
}

TEST_CASE("levenshtein matches the recursive definition exhaustively") {
  // Every pair of sequences up to length 3 over three distinguishable
  // symbols (two primitive types plus atomic, which under per-occurrence
  // identity exercises the never-equal branch).
  std::vector<PrimitiveId> symbols = {PrimitiveId::Grasp, PrimitiveId::Reach,
                                      PrimitiveId::Atomic};
  std::vector<std::vector<PrimitiveId>> seqs;
  for (int len = 0; len <= 3; ++len) enumerate_sequences(symbols, len, seqs);
  REQUIRE(seqs.size() == 1 + 3 + 9 + 27);
  long checked = 0;
  for (size_t i = 0; i < seqs.size(); ++i) {
    for (size_t j = 0; j < seqs.size(); ++j) {
      auto a = tokenize_sketch(seqs[i], 0);
      auto b = tokenize_sketch(seqs[j], 1);
      int fast = levenshtein(a, b);
      int slow = edit_distance_recursive(a, b);
      if (fast != slow) {
        CAPTURE(i);
        CAPTURE(j);
        REQUIRE(fast == slow);
      }
      ++checked;
    }
  }
  CHECK(checked == 1600);

  // Spot-check longer sequences against the oracle.
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    auto a = random_tokens(rng, 5);
    auto b = random_tokens(rng, 5);
    CHECK(levenshtein(a, b) == edit_distance_recursive(a, b));
  }
}

TEST_CASE("levenshtein satisfies the metric axioms") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10000; ++t) {
    auto a = random_tokens(rng, 6);
    auto b = random_tokens(rng, 6);
    auto c = random_tokens(rng, 6);
    int dab = levenshtein(a, b);
    int dba = levenshtein(b, a);
    int dac = levenshtein(a, c);
    int dcb = levenshtein(c, b);
    CHECK(dab == dba);
    CHECK(dab >= 0);
    CHECK(dab <= dac + dcb);
    CHECK(levenshtein(a, a) == 0);
    // Distance is bounded by the longer length and at least the length gap.
    CHECK(dab <= static_cast<int>(std::max(a.size(), b.size())));
    CHECK(dab >= std::abs(static_cast<int>(a.size()) - static_cast<int>(b.size())));
  }
}

TEST_CASE("similarity normalises by the longer sketch") {
  auto g = tokenize_sketch({PrimitiveId::Grasp}, 0);
  auto gr = tokenize_sketch({PrimitiveId::Grasp, PrimitiveId::Reach}, 1);
  CHECK(sketch_similarity(g, g) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sketch_similarity(g, gr) == doctest::Approx(0.5).epsilon(1e-12));
  std::vector<SketchToken> empty;
  CHECK(sketch_similarity(empty, empty) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sketch_similarity(empty, g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("compositionality fixtures") {
  using P = PrimitiveId;

  SUBCASE("identical sketches score 1") {
    std::vector<TaskSketch> recs(4);
    for (auto& r : recs) r.tokens = {P::Grasp, P::Reach, P::Release};
    double f = compositionality(tokenize_all(recs));
    CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("one insertion against a length-3 sketch scores 2/3") {
    std::vector<TaskSketch> recs(2);
    recs[0].tokens = {P::Grasp, P::Reach, P::Release};
    recs[1].tokens = {P::Grasp, P::Reach};
    double f = compositionality(tokenize_all(recs));
    CHECK(f == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("equal-length all-atomic sketches share nothing") {
    std::vector<TaskSketch> recs(3);
    for (auto& r : recs) r.tokens = std::vector<P>(5, P::Atomic);
    double f = compositionality(tokenize_all(recs));
    CHECK(f == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("mean over distinct pairs") {
    // Three sketches with hand-computed pairwise similarities:
    //   s0 = [G, R], s1 = [G], s2 = [P, P]
    //   sim(s0,s1) = 1 - 1/2 = 0.5
    //   sim(s0,s2) = 1 - 2/2 = 0.0
    //   sim(s1,s2) = 1 - 2/2 = 0.0
    std::vector<TaskSketch> recs(3);
    recs[0].tokens = {P::Grasp, P::Reach};
    recs[1].tokens = {P::Grasp};
    recs[2].tokens = {P::Push, P::Push};
    double f = compositionality(tokenize_all(recs));
    CHECK(f == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
  }

  SUBCASE("fewer than two sketches is an error") {
    std::vector<std::vector<SketchToken>> one(1);
    CHECK_THROWS_AS(compositionality(one), std::invalid_argument);
    CHECK_THROWS_AS(compositionality({}), std::invalid_argument);
  }

  SUBCASE("bounded in [0, 1] on random corpora") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
      std::vector<std::vector<SketchToken>> sketches;
      for (int i = 0; i < 6; ++i) sketches.push_back(random_tokens(rng, 8));
      double f = compositionality(sketches);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("medoid picks the sketch closest to all others") {
  using P = PrimitiveId;

  SUBCASE("clear winner") {
    // s1 is one edit from each flank, the flanks are two apart.
    std::vector<TaskSketch> recs(3);
    recs[0].tokens = {P::Grasp, P::Reach};
    recs[1].tokens = {P::Grasp, P::Reach, P::Release};
    recs[2].tokens = {P::Grasp, P::Reach, P::Release, P::Push};
    CHECK(medoid_index(tokenize_all(recs)) == 1);
  }

  SUBCASE("tie breaks towards the shorter sketch") {
    // Both candidates sum to the same distance; the shorter one wins even
    // though it appears later.
    std::vector<TaskSketch> recs(2);
    recs[0].tokens = {P::Grasp, P::Reach};
    recs[1].tokens = {P::Grasp};
    CHECK(medoid_index(tokenize_all(recs)) == 1);
  }

  SUBCASE("remaining ties keep the earliest index") {
    std::vector<TaskSketch> recs(3);
    recs[0].tokens = {P::Grasp};
    recs[1].tokens = {P::Grasp};
    recs[2].tokens = {P::Grasp};
    CHECK(medoid_index(tokenize_all(recs)) == 0);
  }

  SUBCASE("empty corpus is an error") {
    CHECK_THROWS_AS(medoid_index({}), std::invalid_argument);
  }

  SUBCASE("matches exhaustive search on random corpora") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
      std::vector<std::vector<SketchToken>> sketches;
      for (int i = 0; i < 5; ++i) sketches.push_back(random_tokens(rng, 5));
      int got = medoid_index(sketches);
      long got_sum = 0;
      for (size_t j = 0; j < sketches.size(); ++j)
        if (static_cast<int>(j) != got)
          got_sum += levenshtein(sketches[static_cast<size_t>(got)], sketches[j]);
      for (size_t i = 0; i < sketches.size(); ++i) {
        long sum = 0;
        for (size_t j = 0; j < sketches.size(); ++j)
          if (i != j) sum += levenshtein(sketches[i], sketches[j]);
        CHECK(sum >= got_sum);
      }
    }
  }
}
