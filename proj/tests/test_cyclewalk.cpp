#include <random>
#include <sstream>

#include "doctest.h"
#include "utsp/cyclewalk.hpp"
#include "utsp/error.hpp"

using namespace utsp;

namespace {

// Quadratic reference classification straight from the definition.
std::vector<Oscillation> classify_slow(const CycleWalk& w, int delta) {
  std::vector<Oscillation> out(w.size(), Oscillation::none);
  for (std::size_t i = 0; i < w.size(); ++i) {
    int far = 0;
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      if (w[j] == w[i]) {
        out[i] = far > delta ? Oscillation::large : Oscillation::small;
        break;
      }
      far = std::max(far, cycle_distance(w[i], w[j], w.modulus()));
    }
  }
  return out;
}

CycleWalk random_walk(std::mt19937_64& rng, int m, std::size_t n) {
  std::vector<int> v{static_cast<int>(rng() % m)};
  while (v.size() < n) v.push_back(((v.back() + ((rng() & 1) ? 1 : -1)) % m + m) % m);
  return CycleWalk(m, v);
}

}  // namespace

TEST_CASE("cycle metric and helpers") {
  CHECK(cycle_distance(1, 9, 10) == 2);
  CHECK(cycle_distance(3, 3, 10) == 0);
  CHECK(cycle_distance(0, 5, 10) == 5);
  CHECK(cycle_diameter({1, 2, 9}, 10) == 3);
  CHECK(cycle_diameter({0, 5}, 10) == 5);
  CHECK(integer_cube_root(1000) == 10);
  CHECK(integer_cube_root(999) == 9);
  CHECK(integer_cube_root(64) == 4);
}

TEST_CASE("walk validation") {
  CHECK_THROWS_AS(CycleWalk(10, {0, 2}), Error);
  CHECK_THROWS_AS(CycleWalk(10, {0, 10}), Error);
  CHECK_NOTHROW(CycleWalk(10, {0, 9, 0, 1}));
  CHECK_THROWS_AS(make_walk(WalkKind::tight, 27, 4, 0), Error);
  CHECK_THROWS_AS(parse_walk_kind("spiral"), Error);
}

TEST_CASE("generators") {
  auto wind = make_walk(WalkKind::winding, 20, 2, 0);
  CHECK(wind.size() == 400);
  for (std::size_t j = 0; j < wind.size(); ++j) CHECK(wind[j] == static_cast<int>(j % 20));

  auto cons = make_walk(WalkKind::constant, 20, 2, 0);
  for (std::size_t j = 0; j + 1 < cons.size(); ++j) {
    int step = (cons[j + 1] - cons[j] + 20) % 20;
    CHECK(step == (j % 2 == 0 ? 1 : 19));
  }

  // One revolution: the unwrapped displacement over M^2 steps is about M.
  const int m = 50;
  auto rev = make_walk(WalkKind::revolution, m, 3, 0);
  long long disp = 0;
  for (std::size_t j = 0; j + 1 < rev.size(); ++j) {
    disp += (rev[j + 1] - rev[j] + m) % m == 1 ? 1 : -1;
  }
  CHECK(std::abs(disp - m) <= 1);

  auto r1 = make_walk(WalkKind::random, 64, 4, 17);
  auto r2 = make_walk(WalkKind::random, 64, 4, 17);
  CHECK(r1.values() == r2.values());
  CHECK(r1.values() != make_walk(WalkKind::random, 64, 4, 18).values());
}

TEST_CASE("classification matches the definition") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    int m = 8 + static_cast<int>(rng() % 30);
    auto w = random_walk(rng, m, 300);
    int delta = 1 + static_cast<int>(rng() % 6);
    auto fast = classify_times(w, delta);
    auto slow = classify_slow(w, delta);
    std::size_t nones = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(fast[i].tag == slow[i]);
      nones += fast[i].tag == Oscillation::none ? 1 : 0;
    }
    CHECK(nones <= static_cast<std::size_t>(m));
  }
  // Each value visited once: nothing ever returns.
  auto once = CycleWalk(12, {0, 1, 2, 3, 4, 5, 6});
  for (const auto& tag : classify_times(once, 2)) CHECK(tag.tag == Oscillation::none);
}

TEST_CASE("the two scenarios on the illustrating walks") {
  auto wind = make_walk(WalkKind::winding, 1000, 10, 0);
  auto out = dichotomy(wind, 10);
  REQUIRE(std::holds_alternative<ZigZag>(out));
  CHECK(std::get<ZigZag>(out).m() > 100);

  auto cons = make_walk(WalkKind::constant, 1000, 10, 0);
  out = dichotomy(cons, 10);
  REQUIRE(std::holds_alternative<Confined>(out));
  CHECK(std::get<Confined>(out).m() >= 2);

  auto rev = make_walk(WalkKind::revolution, 1000, 10, 0);
  CHECK(std::holds_alternative<Confined>(dichotomy(rev, 10)));
}

TEST_CASE("witnesses validate and the confined window stays narrow") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    int m = 64;
    auto w = make_walk(WalkKind::random, m, 4, rng());
    auto out = dichotomy(w, 4);
    CHECK_FALSE(check_outcome(w, 4, out));
    if (const auto* c = std::get_if<Confined>(&out)) {
      std::vector<int> seen(w.values().begin() + static_cast<long>(c->first),
                            w.values().begin() + static_cast<long>(c->last) + 1);
      CHECK(cycle_diameter(seen, m) <= 6 * 16 + 2);
    }
  }
  auto tight = make_walk(WalkKind::tight, 125, 5, 0);
  CHECK_FALSE(check_outcome(tight, 5, dichotomy(tight, 5)));
}

TEST_CASE("the validator rejects broken witnesses") {
  auto wind = make_walk(WalkKind::winding, 1000, 10, 0);
  auto out = dichotomy(wind, 10);
  auto z = std::get<ZigZag>(out);
  z.j[0] += 1;
  CHECK(check_outcome(wind, 10, z));

  auto cons = make_walk(WalkKind::constant, 1000, 10, 0);
  auto c = std::get<Confined>(dichotomy(cons, 10));
  c.visits[0] += 1;
  CHECK(check_outcome(cons, 10, c));
}

TEST_CASE("dichotomy preconditions") {
  auto w = make_walk(WalkKind::winding, 64, 4, 0);
  CHECK_THROWS_AS(dichotomy(w, 0), Error);
  CHECK_THROWS_AS(dichotomy(w, 5), Error);
  auto shortw = make_walk(WalkKind::winding, 64, 4, 0, 10);
  CHECK_THROWS_AS(dichotomy(shortw, 4), Error);
}

TEST_CASE("walk files round trip") {
  auto w = make_walk(WalkKind::random, 27, 3, 5, 100);
  std::stringstream buf;
  write_walk(buf, w);
  CHECK(buf.str().rfind("M=27 N=100\n", 0) == 0);
  auto back = read_walk(buf);
  CHECK(back.values() == w.values());
  CHECK(back.modulus() == 27);

  std::istringstream bad("M=27 N=3\n0\n+1\n+2\n");
  CHECK_THROWS_AS(read_walk(bad), Error);
}
