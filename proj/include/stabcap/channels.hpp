#ifndef STABCAP_CHANNELS_HPP
#define STABCAP_CHANNELS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stabcap/errors.hpp"
#include "stabcap/rng.hpp"

namespace stabcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Noiseless finite-alphabet channel or discrete memoryless channel given by a
// row-stochastic transition matrix (rows = inputs). Memoryless across uses;
// feedback is realized by the closed-loop driver, not the channel.
struct ChannelModel {
  enum class Kind { noiseless, dmc };

  Kind kind = Kind::noiseless;
  int input_size = 2;
  int output_size = 2;
  MatrixXd transition;  // row-stochastic, input_size x output_size

  static ChannelModel noiseless(int alphabet_size);
  static ChannelModel dmc(const MatrixXd& transition);
  // Binary symmetric channel with the given crossover probability.
  static ChannelModel bsc(double crossover);

  double capacity_noiseless() const;  // log2 #alphabet, noiseless kind only
};

// One channel use. Noiseless: identity. DMC: output drawn from the input row.
int transmit(const ChannelModel& channel, int input, Rng& rng);

struct CapacityEstimate {
  double capacity = 0.0;  // midpoint of the final bracket, bits/use
  double lower = 0.0;     // achievable-rate bracket
  double upper = 0.0;     // converse bracket
  int iterations = 0;
  VectorXd input_distribution;
};

// Capacity of a DMC by alternating maximization. Stops when the standard
// max-min bracket gap falls below tol; errors out after 1e5 iterations.
CapacityEstimate dmc_capacity(const ChannelModel& channel, double tol);

struct RandomCodeResult {
  double error_frequency = 0.0;
  double rate = 0.0;           // bits per channel use
  int blocklength = 0;
  int trials = 0;
  double log2_codewords = 0.0;
  bool explicit_codebook = false;  // false: codebook-ensemble path for large message counts
};

// Block error frequency of random coding at the given rate: a uniformly random
// codebook of 2^(rate*n) words, a uniform message, maximum-likelihood decoding
// with uniform tie-breaking. Small codebooks (at most 2^12 words) are
// materialized with distinct codewords; beyond that the per-trial error is
// drawn from its exact conditional probability given the transmitted and
// received words, with the competitor codewords integrated out analytically.
RandomCodeResult random_code_experiment(const ChannelModel& channel, double rate, int blocklength, int trials,
                                        std::uint64_t seed);

}  // namespace stabcap

#endif
