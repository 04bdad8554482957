#ifndef STABCAP_COMBINATORICS_HPP
#define STABCAP_COMBINATORICS_HPP

#include <vector>

#include "stabcap/errors.hpp"

namespace stabcap {

// Binary entropy in bits, H(0) = H(1) = 0.
double binary_entropy(double r);

// Exact finite-T rate (1/T) log2 sum_{t=ceil((1-r)T)}^{T} C(T,t) alpha^t beta^(T-t).
// Binomials are exact integers for T <= 10^4; larger T falls back to lgamma.
// Requires alpha + beta = 1, alpha, beta in (0,1) and 0 < r <= 1.
double binomial_tail_rate(int t_horizon, double r, double alpha, double beta);

// Asymptotic limit of the rate above: H(r) + r log2 beta + (1-r) log2 alpha
// when beta > r, and 0 when beta <= r.
double sanov_rate(double r, double alpha, double beta);

// Count-only variants (alpha = beta = 1/2 weights removed):
// exact (1/T) log2 sum_{t=ceil((1-r)T)}^{T} C(T,t), and its limit H(r) for
// 0 < r < 1/2 (saturating at 1 for r >= 1/2).
double subset_count_rate(int t_horizon, double r);
double subset_count_rate_limit(double r);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  // Closed-interval semantics: touching endpoints intersect.
  bool intersects(const Interval& other) const { return lo <= other.hi && other.lo <= hi; }
};

// Finite collection of closed intervals of one common length.
struct IntervalCollection {
  std::vector<Interval> intervals;
  double common_length = 0.0;
};

// Validates non-emptiness and equal lengths (within 1e-12).
IntervalCollection make_interval_collection(const std::vector<Interval>& intervals);

// Sort + merge into a minimal list of disjoint intervals (closed semantics:
// touching pieces merge).
std::vector<Interval> normalize_union(std::vector<Interval> intervals);
double union_measure(const std::vector<Interval>& intervals);

// Set difference A \ B of interval unions (up to null sets).
std::vector<Interval> interval_difference(const std::vector<Interval>& a, const std::vector<Interval>& b);

struct DisjointSelection {
  std::vector<int> selected;                      // indices into the input, sorted by left endpoint
  std::vector<std::vector<Interval>> leftovers;   // leftover set between selected k and k+1
  double selected_measure = 0.0;
  double union_measure = 0.0;
};

// Greedy extraction of a pairwise disjoint subcollection covering at least
// half the measure of the union: scan by left endpoint, keep the first
// interval, then always the next one not intersecting the last kept. The
// leftover set between kept intervals k and k+1 is the part of the union
// strictly between them and has measure <= the common length.
DisjointSelection disjoint_subcollection(const IntervalCollection& collection);

}  // namespace stabcap

#endif
