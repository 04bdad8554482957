#include <doctest.h>

#include <cmath>

#include "stabcap/estimation.hpp"

using namespace stabcap;

namespace {

SystemModel doubling(const Distribution& noise, const Distribution& init) {
  return make_scalar_additive(scalar_gain_drift(2.0), noise, init);
}

ZoomPolicyConfig policy_bits(int bits) {
  ZoomPolicyConfig cfg;
  cfg.rate_bits = bits;
  cfg.gain = 2.0;
  cfg.range0 = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("conditioned set on the noise-free doubling map") {
  const SystemModel model = doubling(Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  {
    // T=1: the only constraint is |x| <= 1.
    const std::vector<double> u, w;
    const ConditionedSet set = conditioned_set(model, u, w, 1.0, 0.0, 1, 1e-4, 2.0);
    REQUIRE_FALSE(set.empty);
    CHECK(set.lo == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(set.hi == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(set.midpoint) < 1e-4);
  }
  {
    // T=3: the binding constraint is |4x| <= 1.
    const std::vector<double> u(2, 0.0), w(2, 0.0);
    const ConditionedSet set = conditioned_set(model, u, w, 1.0, 0.0, 3, 1e-5, 2.0);
    REQUIRE_FALSE(set.empty);
    CHECK(set.lo == doctest::Approx(-0.25).epsilon(1e-3));
    CHECK(set.hi == doctest::Approx(0.25).epsilon(1e-3));
  }
  {
    // b = 0 cannot be met once noise pushes the state away.
    const std::vector<double> u(2, 0.0), w(2, 0.4);
    const ConditionedSet set = conditioned_set(model, u, w, 0.0, 0.0, 3, 1e-6, 2.0);
    CHECK(set.empty);
  }
}

TEST_CASE("conditioned set honors the resolution precondition") {
  const SystemModel model = doubling(Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  const std::vector<double> u(9, 0.0), w(9, 0.0);
  CHECK_THROWS_AS(conditioned_set(model, u, w, 1.0, 0.1, 10, 0.01, 2.0), InputError);
}

TEST_CASE("conditioned set contracts at the advertised scale") {
  const SystemModel model = doubling(Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  const double b = 1.0, r_star = 0.1, c = 2.0;
  for (int horizon : {10, 15}) {
    const double resolution = 0.5 * b * std::pow(c, -horizon);
    const double target = 2.0 * b * std::pow(c, -(1.0 - 3.0 * r_star) * horizon) + resolution;
    // Zero controls and a few policy-like control patterns.
    std::vector<std::vector<double>> control_sets{std::vector<double>(horizon, 0.0)};
    Rng rng(7);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> u(horizon);
      for (double& v : u) v = rng.uniform(-1.0, 1.0);
      control_sets.push_back(u);
    }
    for (const auto& u : control_sets) {
      const ConditionedSet set =
          conditioned_set(model, u, std::vector<double>(horizon, 0.0), b, r_star, horizon, resolution, c);
      if (!set.empty) CHECK(set.diameter() <= target);
    }
  }
}

TEST_CASE("bin pipeline on a single center") {
  const BinPipelineResult r = bin_pipeline({0.0}, 0.1, 1, Interval{-1.0, 1.0}, 0.5, 0.5);
  CHECK(r.n1 == 1);
  CHECK(r.n2 == 1);
  CHECK(r.n3 == 2);  // floor(1/1) + 1, the last group is empty padding
  CHECK(r.m_mt == doctest::Approx(0.2));
  CHECK(r.m_mtbar == doctest::Approx(r.m_mt));
  CHECK(r.e_measures[0] == doctest::Approx(0.2));
  CHECK(r.group_masses[0] == doctest::Approx(0.1));  // uniform on [-1,1]
}

TEST_CASE("bin pipeline executes the worked example") {
  // Bins at {0, 0.1, 0.3, 0.5} with radius 0.05: [-.05,.05],[.05,.15],[.25,.35],[.45,.55].
  // Touching at 0.05 intersects, so the disjoint extraction keeps indices {0,2,3}.
  const BinPipelineResult r =
      bin_pipeline({0.0, 0.1, 0.3, 0.5}, 0.05, 2, Interval{-0.2, 0.7}, 1.0, 1.2);
  CHECK(r.n1 == 4);
  CHECK(r.n2 == 3);
  CHECK(r.c_indices == std::vector<int>{0, 2, 3});
  CHECK(r.n3 == 2);  // floor(3/2) + 1
  CHECK(r.rho == doctest::Approx(0.1));
  // M_T: union measure = 0.1 + 0.1 (merged first two) wait, [-.05,.05] and [.05,.15] touch -> merge to 0.2
  CHECK(r.m_mt == doctest::Approx(0.2 + 0.1 + 0.1));
  CHECK(r.m_mt <= 2.0 * r.n2 * r.rho + 1e-12);
}

TEST_CASE("bin pipeline drops bins outside the support and validates") {
  const BinPipelineResult r = bin_pipeline({0.0, 0.95}, 0.1, 1, Interval{-1.0, 1.0}, 0.5, 0.5);
  CHECK(r.n1 == 1);
  CHECK(r.dropped == 1);
  CHECK_THROWS_AS(bin_pipeline({0.0}, 0.1, 1, Interval{-1, 1}, 0.0, 0.5), InputError);
  CHECK_THROWS_AS(bin_pipeline({0.0}, 0.1, 1, Interval{-1, 1}, 0.6, 0.5), InputError);
  CHECK_THROWS_AS(bin_pipeline({5.0}, 0.1, 1, Interval{-1, 1}, 0.5, 0.5), InputError);
}

TEST_CASE("bin pipeline invariants on random centers") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> centers;
    const int n = 5 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < n; ++i) centers.push_back(rng.uniform(-0.8, 0.8));
    const double radius = 0.01 + 0.05 * rng.next_double();
    const int group = 1 + static_cast<int>(rng.next_below(4));
    const BinPipelineResult r = bin_pipeline(centers, radius, group, Interval{-1.0, 1.0}, 0.4, 0.6);

    CHECK(r.n3 == r.n2 / group + 1);
    CHECK(r.m_mt <= 2.0 * r.n2 * r.rho + 1e-12);
    CHECK(r.m_mt <= 2.0 * r.n3 * group * r.rho + 1e-12);
    // Counting bound from the half-measure lemma.
    CHECK(r.n2 >= 0.5 * r.m_mt / r.rho - 1.0 - 1e-9);

    // D sets pairwise disjoint, each leftover bounded by one bin measure.
    for (int k = 0; k + 1 < r.n2; ++k) {
      const auto& cur = r.d_sets[static_cast<std::size_t>(k)];
      const auto& next = r.d_sets[static_cast<std::size_t>(k + 1)];
      for (const Interval& x : cur) {
        for (const Interval& y : next) CHECK(x.hi <= y.lo + 1e-12);
      }
      const Interval c_bin = r.b_bins[static_cast<std::size_t>(r.c_indices[static_cast<std::size_t>(k)])];
      CHECK(union_measure(interval_difference(cur, {c_bin})) <= r.rho + 1e-12);
    }
    // Full groups have measure at least L * rho.
    for (int g = 0; g + 1 < r.n3; ++g) {
      CHECK(r.e_measures[static_cast<std::size_t>(g)] >= group * r.rho - 1e-12);
    }
    // Mbar removes at most the leftovers of the group-closing D sets.
    CHECK(r.m_mtbar <= r.m_mt + 1e-12);
    CHECK(r.pi0_mt_lo <= r.pi0_mt_hi);
  }
}

TEST_CASE("coupling against the uniform law") {
  CHECK(coupling_tv({0.25, 0.25, 0.25, 0.25}, 4) == doctest::Approx(0.0));
  CHECK(coupling_tv({0.75, 0.25}, 2) == doctest::Approx(0.25));  // half the l1 distance
  CHECK(coupling_tv({1.0, 0.0}, 2) == doctest::Approx(0.5));
  CHECK_THROWS_AS(coupling_tv({-0.1, 1.1}, 2), InputError);
  CHECK_THROWS_AS(coupling_tv({0.9, 0.9}, 2), InputError);
}

TEST_CASE("coupling equals half the l1 distance on random distributions") {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(20));
    std::vector<double> p(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& v : p) {
      v = rng.next_double();
      total += v;
    }
    for (double& v : p) v /= total;
    double l1 = 0.0;
    for (double v : p) l1 += std::abs(v - 1.0 / n);
    CHECK(coupling_tv(p, n) == doctest::Approx(0.5 * l1).epsilon(1e-12));
  }
}

TEST_CASE("step5 feasibility on the worked settings") {
  // Direct arithmetic oracle, written out term by term.
  auto oracle = [](double p_min, double p_max, double r, double a, double l) {
    return 1.0 - 0.5 * (p_min / p_max) * (r - a) / r + (p_max / p_min) * (p_max / p_min) / (2.0 * l) +
           2.0 * (p_max / p_min) * a / (r - a);
  };
  {
    const FeasibilityResult f = step5_feasibility(1.0, 1.0, 0.1, 0.001, 100);
    CHECK(f.value == doctest::Approx(oracle(1, 1, 0.1, 0.001, 100)).epsilon(1e-12));
    CHECK(f.value < 1.0);
    CHECK(f.contradiction);
  }
  {
    // alpha -> 0 and L -> infinity leave 1 - p_min/(2 p_max) = 0.5.
    const FeasibilityResult f = step5_feasibility(1.0, 1.0, 0.1, 1e-12, 1000000000);
    CHECK(f.value == doctest::Approx(0.5).epsilon(1e-9));
  }
  {
    const FeasibilityResult f = step5_feasibility(0.1, 1.0, 0.1, 0.001, 2);
    CHECK(f.value == doctest::Approx(oracle(0.1, 1.0, 0.1, 0.001, 2)).epsilon(1e-12));
    CHECK(f.value > 1.0);
    CHECK_FALSE(f.contradiction);
  }
  CHECK_THROWS_AS(step5_feasibility(1.0, 1.0, 0.4, 0.001, 10), InputError);
  CHECK_THROWS_AS(step5_feasibility(1.0, 1.0, 0.1, 0.2, 10), InputError);
}

TEST_CASE("tail ratios distinguish gaussian, laplace, and compact support") {
  const std::vector<double> eps{0.1, 0.01, 0.001};
  const auto gaussian = tail_ratio(TailDensity::gaussian(0.0, 1.0), eps);
  CHECK(gaussian[0].ratio > gaussian[1].ratio);
  CHECK(gaussian[1].ratio > gaussian[2].ratio);

  const auto laplace = tail_ratio(TailDensity::laplace(0.0, 1.5), eps);
  for (const TailRatioPoint& pt : laplace) {
    CHECK(pt.ratio == doctest::Approx(2.0 * 1.5).epsilon(1e-9));  // constant 2*scale
  }

  const auto uniform = tail_ratio(TailDensity::uniform(-2.0, 2.0), eps);
  for (const TailRatioPoint& pt : uniform) CHECK(pt.ratio == 0.0);

  CHECK_THROWS_AS(tail_ratio(TailDensity::gaussian(0, 1), {1.5}), InputError);
}

TEST_CASE("estimation experiment converges with enough rate and fails with none") {
  const SystemModel model = doubling(Distribution::zero(), Distribution::uniform(-0.9, 0.9));
  const ChannelModel channel = ChannelModel::noiseless(4);
  // 2 bits/step exceed log2 c = 1, so the exceedance frequency must die out.
  const EstimationResult good =
      estimation_experiment(model, channel, policy_bits(2), 1.0, 0.1, {4, 8, 12}, 40, 2.0, 19);
  REQUIRE(good.per_horizon.size() == 3);
  CHECK(good.per_horizon.back().exceed_frequency <= 0.1);
  CHECK(good.per_horizon.back().exceed_frequency <= good.per_horizon.front().exceed_frequency + 1e-9);
  CHECK(good.per_horizon.back().control_rate > 0.0);

  // Zero rate: a single realizable control sequence, estimator cannot cover pi0.
  const EstimationResult bad =
      estimation_experiment(model, ChannelModel::noiseless(1), policy_bits(0), 1.0, 0.1, {10}, 40, 2.0, 19);
  CHECK(bad.per_horizon[0].distinct_controls == 1);
  CHECK(bad.per_horizon[0].control_rate == 0.0);
  CHECK(bad.per_horizon[0].exceed_frequency >= 0.9);

  const EstimationResult again =
      estimation_experiment(model, channel, policy_bits(2), 1.0, 0.1, {4, 8, 12}, 40, 2.0, 19);
  for (std::size_t i = 0; i < good.per_horizon.size(); ++i) {
    CHECK(good.per_horizon[i].exceed_frequency == again.per_horizon[i].exceed_frequency);
  }
}
