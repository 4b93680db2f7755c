#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "acer/curriculum.hpp"
#include "acer/replay_buffer.hpp"
#include "acer/rng.hpp"

using namespace acer;

TEST_CASE("priority peaks at exactly 1 when |delta| = c") {
  for (double c : {0.5, 1.0, 10.0, 123.0}) {
    CHECK(curriculum::priority(c, c, 0.01, 0.005) == 1.0);
    CHECK(curriculum::priority(-c, c, 0.01, 0.005) == 1.0);
  }
}

TEST_CASE("priority: direct substitutions") {
  CHECK(curriculum::priority(0.0, 10.0, 0.01, 0.005) ==
        doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
  CHECK(curriculum::priority(20.0, 10.0, 0.01, 0.005) ==
        doctest::Approx(std::exp(-0.05)).epsilon(1e-12));
}

TEST_CASE("priority is symmetric in the sign of delta") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double d = rng.uniform(-1e4, 1e4);
    const double c = rng.uniform(1e-3, 1e3);
    CHECK(curriculum::priority(d, c, 0.01, 0.005) ==
          curriculum::priority(-d, c, 0.01, 0.005));
  }
}

TEST_CASE("priority stays in (0,1] over wide random ranges") {
  Rng rng(6);
  for (int i = 0; i < 100000; ++i) {
    const double d = rng.uniform(-1e6, 1e6);
    const double c = std::exp(rng.uniform(std::log(1e-6), std::log(1e6)));
    const double p = curriculum::priority(d, c, 0.01, 0.005);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("priority is unimodal: rising to c, falling after") {
  const double c = 7.5, k1 = 0.02, k2 = 0.004;
  double prev = curriculum::priority(0.0, c, k1, k2);
  for (int i = 1; i <= 1000; ++i) {
    const double d = c * i / 1000.0;
    const double p = curriculum::priority(d, c, k1, k2);
    CHECK(p >= prev);
    prev = p;
  }
  CHECK(prev == 1.0);
  for (int i = 1; i <= 1000; ++i) {
    const double d = c + (3.0 * c) * i / 1000.0;
    const double p = curriculum::priority(d, c, k1, k2);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("priority branches agree at the boundary") {
  for (double c : {0.1, 1.0, 10.0}) {
    const double left = std::exp(0.01 * (c - c));
    const double right = std::exp(0.005 * (c - c));
    CHECK(left == right);
    CHECK(curriculum::priority(c, c, 0.01, 0.005) == 1.0);
  }
}

TEST_CASE("no clipping: distinct errors above c keep distinct priorities") {
  // the clipped baseline maps both to the same value
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double c = rng.uniform(0.5, 20.0);
    const double d1 = c + rng.uniform(0.01, 100.0);
    const double d2 = d1 + rng.uniform(0.01, 100.0);
    CHECK(curriculum::priority(d1, c, 0.01, 0.005) !=
          curriculum::priority(d2, c, 0.01, 0.005));
    if (d1 > 1.0 && d2 > 1.0) CHECK(per_priority(d1) == per_priority(d2));
  }
}

TEST_CASE("advance_episode bumps c only on period multiples") {
  CurriculumConfig cfg;
  cfg.c_init = 10.0;
  cfg.c_incr = 1.0;
  cfg.update_period = 100;
  CurriculumState st = curriculum::initial_state(cfg);
  for (int ep = 1; ep <= 99; ++ep) {
    st = curriculum::advance_episode(st, cfg);
    CHECK(st.c == 10.0);
  }
  st = curriculum::advance_episode(st, cfg);
  CHECK(st.episodes_seen == 100);
  CHECK(st.c == 11.0);
  while (st.episodes_seen < 500) st = curriculum::advance_episode(st, cfg);
  CHECK(st.c == 15.0);
}

TEST_CASE("state invariant: c tracks the episode count") {
  CurriculumConfig cfg;
  cfg.c_init = 2.0;
  cfg.c_incr = 0.5;
  cfg.update_period = 7;
  CurriculumState st = curriculum::initial_state(cfg);
  for (int ep = 1; ep <= 200; ++ep) {
    st = curriculum::advance_episode(st, cfg);
    const double expect = cfg.c_init + cfg.c_incr * std::floor(st.episodes_seen / 7.0);
    CHECK(st.c == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("config validation enforces k1 > k2 > 0") {
  CurriculumConfig bad;
  bad.k1 = 0.005;
  bad.k2 = 0.01;
  CHECK_THROWS(bad.validate());
  bad.k1 = 0.01;
  bad.k2 = 0.0;
  CHECK_THROWS(bad.validate());
  bad.k2 = 0.005;
  CHECK_NOTHROW(bad.validate());
  bad.c_init = 0.0;
  CHECK_THROWS(bad.validate());
}
