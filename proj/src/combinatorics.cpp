#include "stabcap/combinatorics.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numeric>

namespace stabcap {

namespace {

using boost::multiprecision::cpp_int;

constexpr int kExactBinomialMaxT = 10000;

// log2 of a positive big integer to double precision.
double log2_big(const cpp_int& x) {
  const unsigned bits = msb(x);
  if (bits < 900) return std::log2(x.convert_to<double>());
  const cpp_int top = x >> (bits - 64);
  return static_cast<double>(bits - 64) + std::log2(top.convert_to<double>());
}

double log_sum_exp2(const std::vector<double>& log_terms) {
  const double m = *std::max_element(log_terms.begin(), log_terms.end());
  double acc = 0.0;
  for (double v : log_terms) acc += std::exp2(v - m);
  return m + std::log2(acc);
}

void check_tail_args(int t_horizon, double r, double alpha, double beta) {
  if (t_horizon < 1) throw InputError("binomial tail rate: horizon must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    throw InputError("binomial tail rate: alpha and beta must lie in (0,1)");
  }
  if (std::abs(alpha + beta - 1.0) > 1e-12) throw InputError("binomial tail rate: alpha + beta must equal 1");
  if (!(r > 0.0 && r <= 1.0)) throw InputError("binomial tail rate: r must lie in (0,1]");
}

}  // namespace

double binary_entropy(double r) {
  if (r < 0.0 || r > 1.0) throw InputError("binary entropy: argument must lie in [0,1]");
  if (r == 0.0 || r == 1.0) return 0.0;
  return -r * std::log2(r) - (1.0 - r) * std::log2(1.0 - r);
}

double binomial_tail_rate(int t_horizon, double r, double alpha, double beta) {
  check_tail_args(t_horizon, r, alpha, beta);
  const int t_lo = static_cast<int>(std::ceil((1.0 - r) * t_horizon - 1e-12));
  const double la = std::log2(alpha);
  const double lb = std::log2(beta);

  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(t_horizon - t_lo + 1));
  if (t_horizon <= kExactBinomialMaxT) {
    cpp_int binom = 1;  // C(T, t), updated multiplicatively; exact integers throughout
    for (int t = 1; t <= t_lo; ++t) {
      binom *= t_horizon - t + 1;
      binom /= t;
    }
    for (int t = t_lo; t <= t_horizon; ++t) {
      log_terms.push_back(log2_big(binom) + t * la + (t_horizon - t) * lb);
      binom *= t_horizon - t;
      binom /= t + 1;
    }
  } else {
    for (int t = t_lo; t <= t_horizon; ++t) {
      const double log2_binom =
          (std::lgamma(t_horizon + 1.0) - std::lgamma(t + 1.0) - std::lgamma(t_horizon - t + 1.0)) / M_LN2;
      log_terms.push_back(log2_binom + t * la + (t_horizon - t) * lb);
    }
  }
  return log_sum_exp2(log_terms) / t_horizon;
}

double sanov_rate(double r, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    throw InputError("sanov rate: alpha and beta must lie in (0,1)");
  }
  if (std::abs(alpha + beta - 1.0) > 1e-12) throw InputError("sanov rate: alpha + beta must equal 1");
  if (!(r > 0.0 && r < 1.0)) throw InputError("sanov rate: r must lie in (0,1)");
  if (beta <= r) return 0.0;
  return binary_entropy(r) + r * std::log2(beta) + (1.0 - r) * std::log2(alpha);
}

double subset_count_rate(int t_horizon, double r) {
  // sum C(T,t) = 2^T sum C(T,t) (1/2)^T, so the count rate is the weighted
  // rate at alpha = beta = 1/2 plus one bit.
  return binomial_tail_rate(t_horizon, r, 0.5, 0.5) + 1.0;
}

double subset_count_rate_limit(double r) {
  if (!(r > 0.0 && r < 1.0)) throw InputError("subset count rate: r must lie in (0,1)");
  if (r >= 0.5) return 1.0;
  return binary_entropy(r);
}

IntervalCollection make_interval_collection(const std::vector<Interval>& intervals) {
  if (intervals.empty()) throw InputError("interval collection: must be nonempty");
  const double l = intervals.front().length();
  for (const Interval& iv : intervals) {
    if (!(iv.hi >= iv.lo)) throw InputError("interval collection: interval with hi < lo");
    if (std::abs(iv.length() - l) > 1e-12) {
      throw InputError("interval collection: intervals must share one common length");
    }
  }
  return IntervalCollection{intervals, l};
}

std::vector<Interval> normalize_union(std::vector<Interval> intervals) {
  if (intervals.empty()) return intervals;
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  merged.push_back(intervals.front());
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, intervals[i].hi);
    } else {
      merged.push_back(intervals[i]);
    }
  }
  return merged;
}

double union_measure(const std::vector<Interval>& intervals) {
  double total = 0.0;
  for (const Interval& iv : normalize_union(intervals)) total += iv.length();
  return total;
}

std::vector<Interval> interval_difference(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::vector<Interval> result;
  const std::vector<Interval> cut = normalize_union(b);
  for (const Interval& piece : normalize_union(a)) {
    Interval cur = piece;
    bool alive = true;
    for (const Interval& c : cut) {
      if (c.hi <= cur.lo || c.lo >= cur.hi) continue;
      if (c.lo > cur.lo) result.push_back(Interval{cur.lo, c.lo});
      if (c.hi < cur.hi) {
        cur = Interval{c.hi, cur.hi};
      } else {
        alive = false;
        break;
      }
    }
    if (alive) result.push_back(cur);
  }
  return result;
}

namespace {

// Pieces of the normalized union strictly inside (lo, hi).
std::vector<Interval> clip_open(const std::vector<Interval>& normalized, double lo, double hi) {
  std::vector<Interval> out;
  for (const Interval& iv : normalized) {
    const double a = std::max(iv.lo, lo);
    const double b = std::min(iv.hi, hi);
    if (b > a) out.push_back(Interval{a, b});
  }
  return out;
}

}  // namespace

DisjointSelection disjoint_subcollection(const IntervalCollection& collection) {
  const auto& intervals = collection.intervals;
  std::vector<int> order(intervals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&intervals](int a, int b) { return intervals[a].lo < intervals[b].lo; });

  DisjointSelection result;
  result.selected.push_back(order.front());
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!intervals[order[i]].intersects(intervals[result.selected.back()])) {
      result.selected.push_back(order[i]);
    }
  }

  const std::vector<Interval> full = normalize_union(intervals);
  result.union_measure = 0.0;
  for (const Interval& iv : full) result.union_measure += iv.length();
  result.selected_measure = static_cast<double>(result.selected.size()) * collection.common_length;

  for (std::size_t k = 0; k + 1 < result.selected.size(); ++k) {
    const double gap_lo = intervals[result.selected[k]].hi;
    const double gap_hi = intervals[result.selected[k + 1]].lo;
    result.leftovers.push_back(clip_open(full, gap_lo, gap_hi));
  }
  return result;
}

}  // namespace stabcap
