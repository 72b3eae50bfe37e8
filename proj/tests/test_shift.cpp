#include <doctest.h>

#include "oracles.hpp"
#include "thermoshift/shift.hpp"

using namespace thermoshift;

TEST_CASE("identity truncation of the full 2-shift") {
  auto spec = ShiftSpec::full_shift(2);
  auto t = build_truncation(spec, TruncationRule::first_k(2));
  REQUIRE(t.size() == 2);
  CHECK(t.letters == std::vector<Letter>{0, 1});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(t.allowed(i, j));
}

TEST_CASE("full countable shift restricted to 100 letters") {
  auto spec = ShiftSpec::full_countable();
  auto t = build_truncation(spec, TruncationRule::first_k(100));
  REQUIRE(t.size() == 100);
  CHECK(t.letters.front() == 1);
  CHECK(t.letters.back() == 100);
  CHECK(t.transition.is_full());
}

TEST_CASE("no-aa rule evaluates directly") {
  auto spec = ShiftSpec::no_aa();
  auto t = build_truncation(spec, TruncationRule::first_k(2));
  CHECK(!t.allowed(0, 0));
  CHECK(t.allowed(0, 1));
  CHECK(t.allowed(1, 0));
  CHECK(t.allowed(1, 1));
}

TEST_CASE("empty truncation is rejected") {
  auto spec = ShiftSpec::full_shift(2);
  CHECK_THROWS_AS(build_truncation(spec, TruncationRule::first_k(0)), EmptyTruncation);
}

TEST_CASE("weight_below truncation follows the letter hint") {
  auto spec = ShiftSpec::full_countable();  // default hint is the letter id
  auto t = build_truncation(spec, TruncationRule::weight_below(10.0));
  REQUIRE(t.size() == 10);
  CHECK(t.letters.back() == 10);

  spec.letter_weight_hint = [](Letter a) { return 2.0 * static_cast<double>(a); };
  auto t2 = build_truncation(spec, TruncationRule::weight_below(10.0));
  CHECK(t2.size() == 5);
}

TEST_CASE("truncations survive their spec going out of scope") {
  TruncatedShift t;
  {
    auto spec = ShiftSpec::no_aa();
    t = build_truncation(spec, TruncationRule::first_k(2));
  }
  CHECK(t.spec->name == "no_aa");
  CHECK(!t.allowed(0, 0));
}

TEST_CASE("dead letters are pruned and recorded") {
  // letter 2 has no outgoing edges; pruning it leaves the no-aa core.
  auto spec = ShiftSpec::from_matrix({{0, 1, 1}, {1, 1, 1}, {0, 0, 0}});
  auto t = build_truncation(spec, TruncationRule::first_k(3));
  CHECK(t.size() == 2);
  CHECK(t.dropped == std::vector<Letter>{2});
}

TEST_CASE("enumerate_fix on the full 2-shift") {
  auto t = build_truncation(ShiftSpec::full_shift(2), TruncationRule::first_k(2));
  auto words = enumerate_fix(t, 2);
  REQUIRE(words.size() == 4);  // aa ab ba bb
  CHECK(words[0].idx == std::vector<std::int32_t>{0, 0});
  CHECK(words[3].idx == std::vector<std::int32_t>{1, 1});
}

TEST_CASE("enumerate_fix on no-aa with first letter a") {
  auto t = build_truncation(ShiftSpec::no_aa(), TruncationRule::first_k(2));
  auto words = enumerate_fix(t, 3, std::size_t{0});
  // brute force over 2^3 candidates: aaa/aab contain aa, aba wraps a->a,
  // so only abb closes up admissibly (trace(T^3) = 4 splits as abb + two
  // rotations + bbb)
  REQUIRE(words.size() == 1);
  CHECK(words[0].idx == std::vector<std::int32_t>{0, 1, 1});
  std::int64_t total = 0;
  for_each_fix(t, 3, [&](std::span<const std::int32_t>) { ++total; });
  CHECK(total == 4);
}

TEST_CASE("fixed points of length one are the self-loops") {
  auto t = build_truncation(ShiftSpec::no_aa(), TruncationRule::first_k(2));
  auto words = enumerate_fix(t, 1);
  REQUIRE(words.size() == 1);
  CHECK(words[0].idx == std::vector<std::int32_t>{1});
}

TEST_CASE("fix counts match k^n on full shifts") {
  for (std::int64_t k = 2; k <= 4; ++k) {
    auto t = build_truncation(ShiftSpec::full_shift(k), TruncationRule::first_k(k));
    for (std::size_t n = 1; n <= 12; ++n) {
      if (k == 4 && n > 10) break;  // keep runtime modest
      std::int64_t count = 0;
      for_each_fix(t, n, [&](std::span<const std::int32_t>) { ++count; });
      std::int64_t expect = 1;
      for (std::size_t i = 0; i < n; ++i) expect *= k;
      CHECK(count == expect);
    }
  }
}

TEST_CASE("fix counts equal trace of matrix powers") {
  std::vector<std::vector<int>> m{{0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
  auto spec = ShiftSpec::from_matrix(m);
  auto t = build_truncation(spec, TruncationRule::first_k(3));
  std::vector<std::vector<std::int64_t>> mi{{0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
  for (std::size_t n = 1; n <= 12; ++n) {
    std::int64_t count = 0;
    for_each_fix(t, n, [&](std::span<const std::int32_t>) { ++count; });
    CHECK(count == oracles::trace_power(mi, n));
  }
}

TEST_CASE("canonical rotation is idempotent and minimal") {
  Word w;
  w.idx = {2, 0, 1, 0};
  auto c = canonical_rotation(w);
  CHECK(c.idx == std::vector<std::int32_t>{0, 1, 0, 2});
  CHECK(canonical_rotation(c) == c);
}

TEST_CASE("Moebius inversion recovers primitive counts on full shifts") {
  auto t = build_truncation(ShiftSpec::full_shift(3), TruncationRule::first_k(3));
  for (std::size_t n = 1; n <= 9; ++n) {
    std::int64_t prim = 0;
    for_each_fix(t, n, [&](std::span<const std::int32_t> w) {
      Word word;
      word.idx.assign(w.begin(), w.end());
      if (is_primitive(word)) ++prim;
    });
    CHECK(prim == oracles::primitive_words(3, static_cast<std::int64_t>(n)));
  }
}

TEST_CASE("orbit representative marks primitivity") {
  Word w;
  w.idx = {0, 1, 0, 1};
  auto orbit = PeriodicOrbit::from_word(w);
  CHECK(orbit.period == 4);
  CHECK(!orbit.primitive);
  w.idx = {0, 1, 1, 0};
  CHECK(PeriodicOrbit::from_word(w).primitive);
}

TEST_CASE("bip and mixing reports") {
  auto full = build_truncation(ShiftSpec::full_shift(2), TruncationRule::first_k(2));
  auto r1 = check_bip_mixing(full);
  CHECK(r1.mixing);
  CHECK(r1.period == 1);
  CHECK(r1.has_witness);
  CHECK(r1.bip_witness.size() == 1);

  auto cyc = build_truncation(ShiftSpec::from_matrix({{0, 1}, {1, 0}}),
                              TruncationRule::first_k(2));
  auto r2 = check_bip_mixing(cyc);
  CHECK(!r2.mixing);
  CHECK(r2.period == 2);

  auto noaa = build_truncation(ShiftSpec::no_aa(), TruncationRule::first_k(2));
  auto r3 = check_bip_mixing(noaa);
  CHECK(r3.mixing);
  CHECK(r3.period == 1);
}

TEST_CASE("pinned extension is admissible and lexicographically least") {
  auto t = build_truncation(ShiftSpec::no_aa(), TruncationRule::first_k(2));
  std::vector<std::int32_t> p{0};
  auto ext = pinned_extension(t, p, 6);
  CHECK(ext == std::vector<std::int32_t>{0, 1, 0, 1, 0, 1});
}

TEST_CASE("aperiodic extension stays in the cylinder and is not periodic") {
  auto t = build_truncation(ShiftSpec::no_aa(), TruncationRule::first_k(2));
  for (std::vector<std::int32_t> p :
       {std::vector<std::int32_t>{0}, {1}, {0, 1}, {1, 1}, {0, 1, 0, 1}}) {
    auto z = aperiodic_extension(t, p);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(z.at(i) == p[i]);
    CHECK(!z.is_periodic_word());
    for (std::size_t i = 0; i + 1 < 40; ++i)
      CHECK(t.allowed(static_cast<std::size_t>(z.at(i)), static_cast<std::size_t>(z.at(i + 1))));
  }
}
