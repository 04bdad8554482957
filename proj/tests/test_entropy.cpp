#include <doctest.h>

#include <cmath>

#include "stabcap/entropy.hpp"

using namespace stabcap;

namespace {

SystemModel affine(double gain, const Distribution& noise, const Distribution& init) {
  return make_scalar_additive(scalar_gain_drift(gain), noise, init);
}

SpanningParams base_params(int horizon, int samples) {
  SpanningParams p;
  p.target = Box::interval(-1.0, 1.0);
  p.horizon = horizon;
  p.samples = samples;
  p.source = CandidateSource::policy;
  p.policy.rate_bits = 3;
  p.policy.gain = 2.0;
  p.policy.range0 = 1.0;
  return p;
}

}  // namespace

TEST_CASE("affine spanning oracle") {
  CHECK(spanning_count_oracle_affine(2.0, 1.0, 1) == 1);
  CHECK(spanning_count_oracle_affine(2.0, 1.0, 4) == 8);
  CHECK(spanning_count_oracle_affine(3.0, 1.0, 3) == 9);
  CHECK(spanning_count_oracle_affine(-2.0, 0.5, 4) == 8);
  CHECK_THROWS_AS(spanning_count_oracle_affine(1.0, 1.0, 4), InputError);
  CHECK_THROWS_AS(spanning_count_oracle_affine(2.0, 1.0, 100), CapabilityError);
}

TEST_CASE("greedy estimate sits in the set-cover sandwich at T=4") {
  const SystemModel model = affine(2.0, Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  const int n = 1000;
  const SpanningParams params = base_params(4, n);
  const SpanningEstimate estimate = greedy_spanning_estimate(model, params, 17);
  REQUIRE(estimate.feasible);
  const long long oracle = spanning_count_oracle_affine(2.0, 1.0, 4);
  CHECK(estimate.count >= oracle);
  CHECK(estimate.count <= static_cast<long long>(std::ceil(oracle * (1.0 + std::log(n)))));
  CHECK(validate_spanning(model, estimate, 17));
}

TEST_CASE("stable dynamics need a single zero sequence") {
  const SystemModel model = affine(0.5, Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  SpanningParams params = base_params(6, 200);
  params.source = CandidateSource::lattice;
  params.lattice_bits = 0;  // single constant-zero candidate
  const SpanningEstimate estimate = greedy_spanning_estimate(model, params, 5);
  REQUIRE(estimate.feasible);
  CHECK(estimate.count == 1);
  CHECK(estimate.set.covered_fraction == doctest::Approx(1.0));
}

TEST_CASE("rho close to 1 needs to cover a single sample") {
  const SystemModel model = affine(2.0, Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  SpanningParams params = base_params(5, 100);
  params.rho = 0.99;
  const SpanningEstimate estimate = greedy_spanning_estimate(model, params, 23);
  REQUIRE(estimate.feasible);
  CHECK(estimate.count == 1);
}

TEST_CASE("counts are monotone in the tolerances") {
  const SystemModel model = affine(2.0, Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  long long prev = std::numeric_limits<long long>::max();
  for (double rho : {0.0, 0.2, 0.5, 0.9}) {
    SpanningParams params = base_params(5, 400);
    params.rho = rho;
    const SpanningEstimate estimate = greedy_spanning_estimate(model, params, 29);
    REQUIRE(estimate.feasible);
    CHECK(estimate.count <= prev);
    prev = estimate.count;
  }
  prev = std::numeric_limits<long long>::max();
  for (double r : {0.0, 0.2, 0.4}) {
    SpanningParams params = base_params(5, 400);
    params.r = r;
    const SpanningEstimate estimate = greedy_spanning_estimate(model, params, 29);
    REQUIRE(estimate.feasible);
    CHECK(estimate.count <= prev);
    prev = estimate.count;
  }
}

TEST_CASE("infeasible coverage is reported, not forced") {
  const SystemModel model = affine(4.0, Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  SpanningParams params = base_params(8, 300);
  params.source = CandidateSource::lattice;
  params.lattice_bits = 1;  // two constant candidates cannot cover fast doubling
  const SpanningEstimate estimate = greedy_spanning_estimate(model, params, 31);
  CHECK_FALSE(estimate.feasible);
  CHECK(estimate.max_achievable_coverage < 1.0);
}

TEST_CASE("entropy rate fit") {
  std::vector<std::pair<int, long long>> geometric;
  for (int t = 2; t <= 10; ++t) geometric.emplace_back(t, 1LL << (t - 1));
  const RateFit fit = entropy_rate_fit(geometric);
  CHECK(fit.slope_bits_per_step == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.max_abs_residual < 1e-12);

  std::vector<std::pair<int, long long>> constant{{2, 7}, {4, 7}, {6, 7}};
  CHECK(entropy_rate_fit(constant).slope_bits_per_step == doctest::Approx(0.0));

  std::vector<std::pair<int, long long>> quad;
  for (int t = 1; t <= 5; ++t) quad.emplace_back(t, 1LL << (2 * t));
  CHECK(entropy_rate_fit(quad).slope_bits_per_step == doctest::Approx(2.0));

  CHECK_THROWS_AS(entropy_rate_fit({{1, 2}, {2, 4}}), InputError);
}
