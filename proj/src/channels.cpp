#include "stabcap/channels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace stabcap {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr int kMaxBlahutArimotoIters = 100000;
constexpr long long kMaxExplicitCodewords = 1 << 12;
constexpr double kMaxLog2Codewords = 900.0;  // keeps 2^(rate*n) inside double range
constexpr double kScoreGrid = 1e-9;          // lattice for merging competitor log-likelihood sums

void validate_transition(const MatrixXd& p) {
  if (p.rows() < 1 || p.cols() < 1) throw InputError("channel: transition matrix must be nonempty");
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) < 0.0) throw InputError("channel: negative transition probability");
      row_sum += p(i, j);
    }
    if (std::abs(row_sum - 1.0) > kRowSumTol) {
      throw InputError("channel: transition row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
    }
  }
}

}  // namespace

ChannelModel ChannelModel::noiseless(int alphabet_size) {
  if (alphabet_size < 1) throw InputError("noiseless channel: alphabet must be nonempty");
  ChannelModel c;
  c.kind = Kind::noiseless;
  c.input_size = alphabet_size;
  c.output_size = alphabet_size;
  c.transition = MatrixXd::Identity(alphabet_size, alphabet_size);
  return c;
}

ChannelModel ChannelModel::dmc(const MatrixXd& transition) {
  validate_transition(transition);
  ChannelModel c;
  c.kind = Kind::dmc;
  c.input_size = static_cast<int>(transition.rows());
  c.output_size = static_cast<int>(transition.cols());
  c.transition = transition;
  return c;
}

ChannelModel ChannelModel::bsc(double crossover) {
  if (crossover < 0.0 || crossover > 1.0) throw InputError("bsc: crossover must lie in [0,1]");
  MatrixXd p(2, 2);
  p << 1.0 - crossover, crossover, crossover, 1.0 - crossover;
  return dmc(p);
}

double ChannelModel::capacity_noiseless() const {
  if (kind != Kind::noiseless) throw InputError("capacity_noiseless: channel is not noiseless");
  return std::log2(static_cast<double>(input_size));
}

int transmit(const ChannelModel& channel, int input, Rng& rng) {
  if (input < 0 || input >= channel.input_size) {
    throw InputError("transmit: symbol " + std::to_string(input) + " outside input alphabet of size " +
                     std::to_string(channel.input_size));
  }
  if (channel.kind == ChannelModel::Kind::noiseless) return input;
  const double u = rng.next_double();
  double cdf = 0.0;
  for (int j = 0; j < channel.output_size; ++j) {
    cdf += channel.transition(input, j);
    if (u < cdf) return j;
  }
  return channel.output_size - 1;
}

CapacityEstimate dmc_capacity(const ChannelModel& channel, double tol) {
  if (channel.kind != ChannelModel::Kind::dmc) throw InputError("dmc_capacity: channel is not a dmc");
  if (!(tol > 0.0)) throw InputError("dmc_capacity: tol must be positive");
  validate_transition(channel.transition);

  const int m = channel.input_size;
  const int k = channel.output_size;
  const MatrixXd& p = channel.transition;
  VectorXd input_dist = VectorXd::Constant(m, 1.0 / m);
  VectorXd divergence(m);

  CapacityEstimate est;
  for (int iter = 1; iter <= kMaxBlahutArimotoIters; ++iter) {
    const VectorXd output_dist = p.transpose() * input_dist;
    for (int j = 0; j < m; ++j) {
      double d = 0.0;
      for (int c = 0; c < k; ++c) {
        if (p(j, c) > 0.0) d += p(j, c) * std::log2(p(j, c) / output_dist[c]);
      }
      divergence[j] = d;
    }
    const double lower = input_dist.dot(divergence);
    const double upper = divergence.maxCoeff();
    est.lower = lower;
    est.upper = upper;
    est.capacity = 0.5 * (lower + upper);
    est.iterations = iter;
    est.input_distribution = input_dist;
    if (upper - lower <= tol) return est;
    for (int j = 0; j < m; ++j) input_dist[j] *= std::exp2(divergence[j]);
    input_dist /= input_dist.sum();
  }
  throw NumericError("dmc_capacity: bracket gap above tol after " + std::to_string(kMaxBlahutArimotoIters) +
                     " iterations");
}

namespace {

double log2_prob(double p) { return p > 0.0 ? std::log2(p) : -std::numeric_limits<double>::infinity(); }

// Distribution of the log-likelihood score of one uniformly random codeword
// against the received word, as a lattice map (score key -> probability) plus
// the probability of an impossible (zero-likelihood) word.
struct ScoreDistribution {
  std::map<long long, double> mass;
  double impossible = 0.0;
};

ScoreDistribution competitor_score_distribution(const ChannelModel& channel, const std::vector<int>& received) {
  ScoreDistribution dist;
  dist.mass[0] = 1.0;
  const double inv_m = 1.0 / channel.input_size;
  for (int y : received) {
    std::vector<long long> keys;
    double step_impossible = 0.0;
    for (int x = 0; x < channel.input_size; ++x) {
      const double p = channel.transition(x, y);
      if (p > 0.0) {
        keys.push_back(std::llround(std::log2(p) / kScoreGrid));
      } else {
        step_impossible += inv_m;
      }
    }
    std::map<long long, double> next;
    double finite_mass = 0.0;
    for (const auto& [key, prob] : dist.mass) {
      finite_mass += prob;
      for (long long k : keys) next[key + k] += prob * inv_m;
    }
    dist.impossible += finite_mass * step_impossible;  // impossible mass stays impossible
    dist.mass = std::move(next);
    if (dist.mass.size() > 2000000) {
      throw CapabilityError("random_code_experiment: competitor score lattice too large for this channel; "
                            "reduce the blocklength or the rate");
    }
  }
  return dist;
}

// Exact probability of correct maximum-likelihood decoding given the true
// word's score and M-1 i.i.d. competitors, with uniform tie-breaking:
// [ (1 - q_better)^M - (1 - q_better - q_tie)^M ] / (M q_tie).
// q_better and q_tie are typically tiny, so the logs go through log1p.
double correct_probability(double q_better, double q_tie, double log2_codewords) {
  q_better = std::clamp(q_better, 0.0, 1.0);
  q_tie = std::clamp(q_tie, 0.0, 1.0 - q_better);
  const double m_words = std::exp2(log2_codewords);
  if (q_better >= 1.0) return 0.0;
  if (q_tie <= 0.0) return std::exp((m_words - 1.0) * std::log1p(-q_better));
  const double ma = m_words * std::log1p(-q_better);
  const double mb = m_words * std::log1p(-q_better - q_tie);
  const double gap = ma - mb;  // >= 0
  if (gap > 700.0) return std::exp(ma) / (m_words * q_tie);
  return std::exp(mb) * std::expm1(gap) / (m_words * q_tie);
}

double ensemble_trial_error(const ChannelModel& channel, double log2_codewords, int blocklength, Rng& rng) {
  std::vector<int> sent(blocklength);
  std::vector<int> received(blocklength);
  for (int t = 0; t < blocklength; ++t) {
    sent[t] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(channel.input_size)));
    received[t] = transmit(channel, sent[t], rng);
  }
  double true_score = 0.0;
  for (int t = 0; t < blocklength; ++t) true_score += log2_prob(channel.transition(sent[t], received[t]));
  const ScoreDistribution dist = competitor_score_distribution(channel, received);
  const long long true_key = std::llround(true_score / kScoreGrid);
  double q_worse = dist.impossible;
  double q_tie = 0.0;
  for (const auto& [key, prob] : dist.mass) {
    if (key < true_key) {
      q_worse += prob;
    } else if (key == true_key) {
      q_tie += prob;
    }
  }
  const double p_correct = correct_probability(q_worse, q_tie, log2_codewords);
  return rng.next_double() < (1.0 - p_correct) ? 1.0 : 0.0;
}

double explicit_trial_error(const ChannelModel& channel, long long codewords, int blocklength, Rng& rng) {
  // Distinct codewords drawn uniformly; rejection on duplicates.
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> codebook;
  codebook.reserve(static_cast<std::size_t>(codewords));
  int rejects = 0;
  while (static_cast<long long>(codebook.size()) < codewords) {
    std::vector<int> word(blocklength);
    for (int t = 0; t < blocklength; ++t) {
      word[t] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(channel.input_size)));
    }
    if (seen.insert(word).second) {
      codebook.push_back(std::move(word));
    } else if (++rejects > 1000000) {
      throw CapabilityError("random_code_experiment: cannot draw distinct codewords; alphabet^n too small "
                            "for the requested codebook");
    }
  }
  const auto message = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(codewords)));
  std::vector<int> received(blocklength);
  for (int t = 0; t < blocklength; ++t) received[t] = transmit(channel, codebook[message][t], rng);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> argmax;
  for (std::size_t j = 0; j < codebook.size(); ++j) {
    double score = 0.0;
    for (int t = 0; t < blocklength; ++t) score += log2_prob(channel.transition(codebook[j][t], received[t]));
    if (score > best) {
      best = score;
      argmax.assign(1, j);
    } else if (score == best) {
      argmax.push_back(j);
    }
  }
  const std::size_t decoded = argmax[rng.next_below(argmax.size())];
  return decoded == message ? 0.0 : 1.0;
}

}  // namespace

RandomCodeResult random_code_experiment(const ChannelModel& channel, double rate, int blocklength, int trials,
                                        std::uint64_t seed) {
  if (!(rate > 0.0)) throw InputError("random_code_experiment: rate must be positive");
  if (blocklength < 1) throw InputError("random_code_experiment: blocklength must be >= 1");
  if (trials < 1) throw InputError("random_code_experiment: trials must be >= 1");
  validate_transition(channel.transition);

  RandomCodeResult result;
  result.rate = rate;
  result.blocklength = blocklength;
  result.trials = trials;
  result.log2_codewords = rate * blocklength;
  if (result.log2_codewords > kMaxLog2Codewords) {
    throw CapabilityError("random_code_experiment: 2^(rate*n) = 2^" + std::to_string(result.log2_codewords) +
                          " codewords not representable; reduce n*rate below " +
                          std::to_string(kMaxLog2Codewords) + " bits");
  }
  const long long codewords = static_cast<long long>(std::llround(std::exp2(std::min(result.log2_codewords, 62.0))));
  result.explicit_codebook =
      result.log2_codewords <= 62.0 && codewords <= kMaxExplicitCodewords;

  double errors = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(substream(seed, static_cast<std::uint64_t>(trial)));
    if (result.explicit_codebook) {
      errors += codewords <= 1 ? 0.0 : explicit_trial_error(channel, codewords, blocklength, rng);
    } else {
      errors += ensemble_trial_error(channel, result.log2_codewords, blocklength, rng);
    }
  }
  result.error_frequency = errors / trials;
  return result;
}

}  // namespace stabcap
