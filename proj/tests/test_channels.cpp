#include <doctest.h>

#include <cmath>

#include "stabcap/channels.hpp"
#include "stabcap/combinatorics.hpp"

using namespace stabcap;

TEST_CASE("transmit: identity and degenerate dmc") {
  Rng rng(1);
  const ChannelModel noiseless = ChannelModel::noiseless(8);
  CHECK(transmit(noiseless, 3, rng) == 3);
  const ChannelModel perfect = ChannelModel::bsc(0.0);
  CHECK(transmit(perfect, 1, rng) == 1);
  CHECK_THROWS_AS(transmit(noiseless, 9, rng), InputError);
}

TEST_CASE("transmit: BSC crossover concentration") {
  const ChannelModel bsc = ChannelModel::bsc(0.5);
  Rng rng(77);
  int flips = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) flips += transmit(bsc, 0, rng);
  CHECK(std::abs(static_cast<double>(flips) / n - 0.5) < 0.01);
}

TEST_CASE("channel validation") {
  MatrixXd bad(2, 2);
  bad << 0.5, 0.4, 0.5, 0.5;
  CHECK_THROWS_AS(ChannelModel::dmc(bad), InputError);
  CHECK_THROWS_AS(ChannelModel::bsc(1.5), InputError);
}

TEST_CASE("dmc capacity on binary symmetric channels") {
  CHECK(dmc_capacity(ChannelModel::bsc(0.0), 1e-9).capacity == doctest::Approx(1.0));
  CHECK(dmc_capacity(ChannelModel::bsc(0.5), 1e-9).capacity == doctest::Approx(0.0));
  // Closed-form oracle: 1 - H(p).
  const double expected = 1.0 - binary_entropy(0.11);
  const CapacityEstimate est = dmc_capacity(ChannelModel::bsc(0.11), 1e-6);
  CHECK(std::abs(est.capacity - expected) < 1e-6);
  CHECK(est.lower <= est.upper);
  CHECK(est.upper - est.lower <= 1e-6);
}

TEST_CASE("dmc capacity is invariant under input relabeling") {
  MatrixXd p(3, 4);
  p << 0.6, 0.2, 0.1, 0.1,
       0.1, 0.7, 0.1, 0.1,
       0.25, 0.25, 0.25, 0.25;
  const double c0 = dmc_capacity(ChannelModel::dmc(p), 1e-9).capacity;
  MatrixXd permuted(3, 4);
  permuted.row(0) = p.row(2);
  permuted.row(1) = p.row(0);
  permuted.row(2) = p.row(1);
  const double c1 = dmc_capacity(ChannelModel::dmc(permuted), 1e-9).capacity;
  CHECK(std::abs(c0 - c1) < 1e-8);
}

TEST_CASE("random coding on a noiseless binary channel decodes perfectly") {
  const ChannelModel ch = ChannelModel::noiseless(2);
  const RandomCodeResult r = random_code_experiment(ch, 0.5, 8, 200, 5);
  CHECK(r.explicit_codebook);
  CHECK(r.error_frequency == 0.0);
}

TEST_CASE("random coding strong-converse and achievability regimes") {
  const ChannelModel bsc = ChannelModel::bsc(0.11);
  const RandomCodeResult above = random_code_experiment(bsc, 0.9, 200, 500, 11);
  CHECK_FALSE(above.explicit_codebook);
  CHECK(above.error_frequency >= 0.9);
  const RandomCodeResult below = random_code_experiment(bsc, 0.25, 200, 500, 11);
  CHECK(below.error_frequency <= 0.1);
}

TEST_CASE("random coding error is monotone in rate up to sampling noise") {
  const ChannelModel bsc = ChannelModel::bsc(0.11);
  const int trials = 400;
  double prev = -1.0;
  const double slack = 2.0 / std::sqrt(static_cast<double>(trials));
  for (double rate : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const double err = random_code_experiment(bsc, rate, 150, trials, 21).error_frequency;
    CHECK(err >= prev - slack);
    prev = err;
  }
}

TEST_CASE("explicit and ensemble paths agree through the blocklength crossover") {
  // Below capacity the error must fall as n grows, across the path switch.
  const ChannelModel bsc = ChannelModel::bsc(0.05);
  const double e_small = random_code_experiment(bsc, 0.4, 20, 300, 3).error_frequency;   // 256 words, explicit
  const double e_large = random_code_experiment(bsc, 0.4, 120, 300, 3).error_frequency;  // 2^48 words, ensemble
  CHECK(e_large <= e_small + 0.05);
}

TEST_CASE("random coding input validation and caps") {
  const ChannelModel bsc = ChannelModel::bsc(0.11);
  CHECK_THROWS_AS(random_code_experiment(bsc, 0.0, 8, 10, 1), InputError);
  CHECK_THROWS_AS(random_code_experiment(bsc, 10.0, 200, 10, 1), CapabilityError);
  CHECK(random_code_experiment(bsc, 0.9, 200, 5, 1).log2_codewords == doctest::Approx(180.0));
}

TEST_CASE("same seed reproduces the experiment") {
  const ChannelModel bsc = ChannelModel::bsc(0.11);
  const double a = random_code_experiment(bsc, 0.5, 100, 50, 9).error_frequency;
  const double b = random_code_experiment(bsc, 0.5, 100, 50, 9).error_frequency;
  CHECK(a == b);
}
