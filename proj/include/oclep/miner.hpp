#pragma once

#include <limits>
#include <span>
#include <vector>

#include "oclep/itemset.hpp"

namespace oclep {

// Length statistic reported when an instance admits no jumping emerging
// pattern at all (it is indistinguishable from some background instance).
inline constexpr double kNoJepLength = std::numeric_limits<double>::infinity();

// Per-background-instance difference edges, minimized to an antichain.
// A pattern is a JEP of t versus the background exactly when it intersects
// every edge, so the minimal JEPs are the minimal transversals of this family.
struct DiffFamily {
  std::vector<ItemSet> edges;
  bool has_empty_edge = false;  // some background instance covers all of t
};

// items(t) \ items(s).
ItemSet diff_edge(const ItemSet& t, const ItemSet& s);

// Removes duplicate edges and edges that contain another edge. An empty edge
// swallows the family and sets has_empty_edge.
DiffFamily minimize_family(std::vector<ItemSet> edges);

// The complete set of minimal jumping emerging patterns of one instance
// versus a background sample.
struct JepSet {
  std::vector<Pattern> patterns;  // sorted by length, then lexicographically
  double min_length = kNoJepLength;
  bool empty() const { return patterns.empty(); }
};

// All minimal-by-containment patterns P with P subset of items(t) such that no
// background instance matches P, i.e. the minimal transversals of the
// minimized diff family. Empty JepSet (min_length sentinel) when some
// background instance contains every item of t.
JepSet border_diff(const ItemSet& t, std::span<const ItemSet> background);

// Exact minimal JEP length of t versus the background, without enumerating the
// pattern set. Returns the true minimum when it is below `cap`, otherwise some
// value >= cap (so a running minimum over several calls stays exact).
double minimal_jep_length(const ItemSet& t, std::span<const ItemSet> background,
                          double cap = kNoJepLength);

// Same operations against dataset[indices] without materializing the sample.
JepSet border_diff_sample(const ItemSet& t, std::span<const ItemSet> dataset,
                          std::span<const std::uint32_t> indices);
double minimal_jep_length_sample(const ItemSet& t, std::span<const ItemSet> dataset,
                                 std::span<const std::uint32_t> indices,
                                 double cap = kNoJepLength);

enum class LengthStatistic { kMin, kMean };

// Pools the patterns of all given JepSets as a union (duplicates across sets
// collapse) and returns the minimum or mean pattern length; the sentinel when
// the pool is empty.
double length_statistic(std::span<const JepSet> sets, LengthStatistic mode);

}  // namespace oclep
