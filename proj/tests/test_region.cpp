// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "spikecount/region.hpp"

using namespace spikecount;

namespace {

std::vector<QuadLin> pt(std::initializer_list<Rat> xs) {
  std::vector<QuadLin> v;
  for (const Rat& x : xs) v.emplace_back(x);
  return v;
}

}  // namespace

TEST_CASE("membership basics") {
  SpikeParams p = SpikeParams::scalar(2, 1, Rat(1), Rat(1), Rat(1));
  REQUIRE(contains(p, pt({0, 0, 0})));
  // product exactly 1 is not < 1
  REQUIRE(!contains(p, pt({1, 1, 0})));

  SpikeParams p3 = SpikeParams::scalar(2, 1, Rat(3, 10), Rat(1), Rat(1));
  REQUIRE(contains(p3, pt({Rat(1, 2), Rat(1, 10), Rat(1)})));
  // y out of range
  REQUIRE(!contains(p3, pt({Rat(1, 2), Rat(1, 10), Rat(2)})));
  // x out of the box even though the product is small
  REQUIRE(!contains(p3, pt({Rat(3, 2), Rat(1, 100), 0})));
}

TEST_CASE("membership boundary cases are exact") {
  // product hits eps^B exactly: (1/2)(1/2) = 1/4 = eps^2 at eps = 1/2
  SpikeParams p = SpikeParams::scalar(2, 1, Rat(1, 2), Rat(1), Rat(1));
  REQUIRE(!contains(p, pt({Rat(1, 2), Rat(1, 2), 0})));
  // nudging one factor down makes it a member
  REQUIRE(contains(p, pt({Rat(1, 2), Rat(49, 100), 0})));
  // box boundary |x| = T is closed
  REQUIRE(contains(p, pt({1, Rat(1, 10), 0})));
  // y boundary closed as well
  REQUIRE(contains(p, pt({Rat(1, 10), Rat(1, 10), 1})));
  // a zero coordinate makes the product condition vacuous
  REQUIRE(contains(p, pt({0, 1, 1})));
}

TEST_CASE("membership with euclidean blocks") {
  // one x-block of dimension 2: |x|_2 <= T with T = 1
  SpikeParams p;
  p.bs.m = {2};
  p.bs.n = {1};
  p.w.beta = {Rat(1)};
  p.w.gamma = {Rat(1)};
  p.eps = Rat(2);
  p.T = Rat(1);
  p.Qs = {Rat(1)};
  p.flavor = RegionFlavor::euclidean;
  // (3/5, 4/5) has norm exactly 1: on the closed boundary
  REQUIRE(contains(p, pt({Rat(3, 5), Rat(4, 5), 0})));
  REQUIRE(!contains(p, pt({Rat(3, 5), Rat(9, 10), 0})));
  // sup-norm flavor would admit it
  p.flavor = RegionFlavor::supnorm;
  REQUIRE(contains(p, pt({Rat(3, 5), Rat(9, 10), 0})));
}

TEST_CASE("membership with fractional weights") {
  SpikeParams p = SpikeParams::scalar(2, 1, Rat(1, 2), Rat(1), Rat(1));
  p.w.beta = {Rat(1, 2), Rat(3, 2)};
  REQUIRE(contains(p, pt({Rat(1, 4), Rat(1, 4), 0})));
  REQUIRE(!contains(p, pt({1, 1, 0})));
}

TEST_CASE("membership monotone in the parameters") {
  std::mt19937_64 rng(7);
  auto coord = [&] { return Rat(static_cast<long>(rng() % 401) - 200, 100); };
  for (int it = 0; it < 200; ++it) {
    std::vector<QuadLin> x = pt({coord(), coord(), coord()});
    bool prev = false;
    for (int level = 0; level < 3; ++level) {
      Rat eps = Rat(1, 10) * pow_rat(Rat(4), level);
      Rat T = Rat(1, 2) * pow_rat(Rat(2), level);
      Rat Q = Rat(1) * pow_rat(Rat(2), level);
      SpikeParams p = SpikeParams::scalar(2, 1, eps, T, Q);
      bool now = contains(p, x);
      if (prev) REQUIRE(now);
      prev = now;
    }
  }
}

TEST_CASE("closed-form volume") {
  // M = 1 collapses to an interval: 2^{1+N} Q^N eps
  REQUIRE(volume_closed_form(1, 1, Rat(1, 4), Rat(1), Rat(1)).to_double() ==
          Catch::Approx(4.0 * 0.25).epsilon(1e-15));
  REQUIRE(volume_closed_form(1, 2, Rat(1, 4), Rat(1), Rat(3)).to_double() ==
          Catch::Approx(8.0 * 9 * 0.25).epsilon(1e-15));
  // degenerate eps = T^M: the full box
  REQUIRE(volume_closed_form(2, 1, Rat(1), Rat(1), Rat(1)).to_double() ==
          Catch::Approx(8.0).epsilon(1e-15));
  // M = 2 reference value 8 (0.1 ln 10 + 0.1) = 2.642068...
  REQUIRE(volume_closed_form(2, 1, Rat(1, 10), Rat(1), Rat(1)).to_double() ==
          Catch::Approx(0.8 * (std::log(10.0) + 1)).epsilon(1e-14));
  REQUIRE_THROWS_AS(volume_closed_form(2, 1, Rat(2), Rat(1), Rat(1)), DomainError);
  REQUIRE_THROWS_AS(volume_closed_form(0, 1, Rat(1), Rat(1), Rat(1)), DomainError);
}

TEST_CASE("closed-form volume against quadrature") {
  for (Rat eps : {Rat(1, 20), Rat(1, 10), Rat(1, 2)})
    for (Rat T : {Rat(1, 2), Rat(1), Rat(2)}) {
      if (eps > T * T) continue;
      double want = oracles::quadrature_volume_m2(static_cast<double>(eps),
                                                  static_cast<double>(T), 1, 1.0, 2'000'000);
      double got = volume_closed_form(2, 1, eps, T, Rat(1)).to_double();
      REQUIRE(got == Catch::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("monte carlo volume") {
  SpikeParams p = SpikeParams::scalar(2, 1, Rat(1, 10), Rat(1), Rat(1));

  SECTION("agrees with the closed form") {
    // SpikeParams eps is the normalized bound Nm^{1/B} < eps; the closed form
    // takes the plain product bound, eps^M for scalar unit-weight blocks
    SpikeParams half = SpikeParams::scalar(2, 1, Rat(1, 2), Rat(1), Rat(1));
    MonteCarloVolume mc = volume_monte_carlo(half, 200'000, 12345);
    double want = volume_closed_form(2, 1, Rat(1, 4), Rat(1), Rat(1)).to_double();
    REQUIRE(std::fabs(mc.estimate - want) <= 4 * mc.stderror);
  }

  SECTION("vacuous product fills the box") {
    SpikeParams big = SpikeParams::scalar(2, 1, Rat(100), Rat(1), Rat(1));
    MonteCarloVolume mc = volume_monte_carlo(big, 10'000, 1);
    REQUIRE(mc.estimate == 8.0);
    REQUIRE(mc.stderror == 0.0);
  }

  SECTION("tiny eps gives a tiny estimate") {
    SpikeParams tiny = SpikeParams::scalar(2, 1, Rat(1, 1000000000000LL), Rat(1), Rat(1));
    MonteCarloVolume mc = volume_monte_carlo(tiny, 100'000, 7);
    REQUIRE(mc.estimate < 0.01);
  }

  SECTION("deterministic across runs and worker counts") {
    MonteCarloVolume a = volume_monte_carlo(p, 50'000, 99, 1);
    MonteCarloVolume b = volume_monte_carlo(p, 50'000, 99, 1);
    MonteCarloVolume c = volume_monte_carlo(p, 50'000, 99, 8);
    REQUIRE(a.estimate == b.estimate);
    REQUIRE(a.estimate == c.estimate);
    REQUIRE(a.stderror == c.stderror);
  }

  SECTION("euclidean three-block region") {
    SpikeParams e;
    e.bs.m = {1, 1};
    e.bs.n = {2};
    e.w.beta = {Rat(1), Rat(1)};
    e.w.gamma = {Rat(2)};
    e.eps = Rat(1, 2);
    e.T = Rat(1);
    e.Qs = {Rat(1)};
    e.flavor = RegionFlavor::euclidean;
    MonteCarloVolume mc = volume_monte_carlo(e, 100'000, 5);
    // sanity: inside the box, nonzero, and below the box volume 16
    REQUIRE(mc.estimate > 0);
    REQUIRE(mc.estimate < 16.0);
  }
}

TEST_CASE("diameters") {
  SpikeParams p11 = SpikeParams::scalar(1, 1, Rat(1, 10), Rat(1), Rat(1));
  REQUIRE(diameter(p11).to_double() == Catch::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  SpikeParams p21 = SpikeParams::scalar(2, 1, Rat(1, 10), Rat(1), Rat(3));
  REQUIRE(diameter(p21).to_double() == Catch::Approx(2 * std::sqrt(11.0)).epsilon(1e-15));

  SubspaceC cy = SubspaceC::y_zero(p21.bs);
  REQUIRE(diameter_cap_C(p21, cy).to_double() == Catch::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  SubspaceC cx;
  cx.zero_x = {0, 1};
  cx.zero_y = {0};
  REQUIRE(diameter_cap_C(p21, cx).to_double() == 0.0);
}

TEST_CASE("parameter validation") {
  SpikeParams p = SpikeParams::scalar(2, 1, Rat(1, 10), Rat(1), Rat(1));
  p.Qs.clear();
  REQUIRE_THROWS_AS(p.validate(), ValidationError);
  SpikeParams q = SpikeParams::scalar(2, 1, Rat(0), Rat(1), Rat(1));
  REQUIRE_THROWS_AS(q.validate(), ValidationError);
  SpikeParams r = SpikeParams::scalar(2, 1, Rat(1), Rat(1), Rat(1));
  r.w.beta = {Rat(1)};
  REQUIRE_THROWS_AS(r.validate(), ValidationError);
  REQUIRE_THROWS_AS(contains(p, pt({0, 0, 0})), ValidationError);
  REQUIRE_THROWS_AS(volume_monte_carlo(p, 10, 1), ValidationError);
}
