#include "oclep/miner.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <unordered_set>

#include "oclep/errors.hpp"

namespace oclep {

ItemSet diff_edge(const ItemSet& t, const ItemSet& s) { return set_difference(t, s); }

DiffFamily minimize_family(std::vector<ItemSet> edges) {
  DiffFamily family;
  for (const auto& e : edges) {
    if (e.empty()) {
      family.has_empty_edge = true;
      family.edges.assign(1, ItemSet{});
      return family;
    }
  }
  std::sort(edges.begin(), edges.end(), [](const ItemSet& a, const ItemSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  for (auto& e : edges) {
    bool dominated = false;
    for (const auto& kept : family.edges) {
      if (kept.is_subset_of(e)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) family.edges.push_back(std::move(e));
  }
  return family;
}

namespace {

// Bit mask over the positions of t's items. W machine words cover up to
// 64*W items per instance.
template <std::size_t W>
struct Mask {
  std::array<std::uint64_t, W> w{};

  void set(unsigned i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }

  bool any() const {
    for (auto x : w)
      if (x) return true;
    return false;
  }

  int popcount() const {
    int n = 0;
    for (auto x : w) n += std::popcount(x);
    return n;
  }

  bool subset_of(const Mask& o) const {
    for (std::size_t i = 0; i < W; ++i)
      if (w[i] & ~o.w[i]) return false;
    return true;
  }

  bool intersects(const Mask& o) const {
    for (std::size_t i = 0; i < W; ++i)
      if (w[i] & o.w[i]) return true;
    return false;
  }

  Mask with(unsigned i) const {
    Mask m = *this;
    m.set(i);
    return m;
  }

  bool operator==(const Mask&) const = default;

  bool operator<(const Mask& o) const { return w < o.w; }

  template <class Fn>
  void for_each_bit(Fn&& fn) const {
    for (std::size_t word = 0; word < W; ++word) {
      std::uint64_t x = w[word];
      while (x) {
        fn(static_cast<unsigned>(word * 64 + std::countr_zero(x)));
        x &= x - 1;
      }
    }
  }
};

template <std::size_t W>
struct MaskHash {
  std::size_t operator()(const Mask<W>& m) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto x : m.w) {
      h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

template <std::size_t W>
void sort_by_popcount(std::vector<Mask<W>>& masks) {
  std::sort(masks.begin(), masks.end(), [](const Mask<W>& a, const Mask<W>& b) {
    const int pa = a.popcount(), pb = b.popcount();
    return pa != pb ? pa < pb : a < b;
  });
}

// Deduplicates and removes supersets; input sorted by popcount afterwards.
template <std::size_t W>
std::vector<Mask<W>> minimize_masks(std::vector<Mask<W>> masks) {
  sort_by_popcount(masks);
  std::vector<Mask<W>> kept;
  kept.reserve(masks.size());
  for (const auto& m : masks) {
    bool dominated = false;
    for (const auto& k : kept) {
      if (k.subset_of(m)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(m);
  }
  return kept;
}

// Incremental minimal-transversal expansion. `edges` must be a nonempty
// antichain of nonempty edges, sorted small-first.
template <std::size_t W>
std::vector<Mask<W>> minimal_transversals(const std::vector<Mask<W>>& edges) {
  std::vector<Mask<W>> trans;
  edges.front().for_each_bit([&](unsigned i) { trans.push_back(Mask<W>{}.with(i)); });

  std::vector<Mask<W>> keep, miss, cands;
  for (std::size_t ei = 1; ei < edges.size(); ++ei) {
    const Mask<W>& edge = edges[ei];
    keep.clear();
    miss.clear();
    for (const auto& t : trans) {
      (t.intersects(edge) ? keep : miss).push_back(t);
    }
    if (miss.empty()) continue;

    // Extend every missing transversal by one item of the edge; a candidate
    // that contains a kept transversal is not minimal.
    cands.clear();
    for (const auto& t : miss) {
      edge.for_each_bit([&](unsigned i) {
        Mask<W> c = t.with(i);
        for (const auto& k : keep) {
          if (k.subset_of(c)) return;
        }
        cands.push_back(c);
      });
    }
    sort_by_popcount(cands);
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    trans = std::move(keep);
    const std::size_t kept_count = trans.size();
    for (const auto& c : cands) {
      bool dominated = false;
      for (std::size_t i = kept_count; i < trans.size(); ++i) {
        if (trans[i].subset_of(c)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) trans.push_back(c);
    }
  }
  return trans;
}

// Exact minimum transversal size via depth-first branch and bound, bounded
// above by `cap` (sizes >= cap are not distinguished). `edges` as above.
template <std::size_t W>
int min_transversal_size(const std::vector<Mask<W>>& edges, int item_count, int cap) {
  const std::size_t edge_count = edges.size();
  const std::size_t dw = (edge_count + 63) / 64;

  // item_cover[item] = bitmask over edges containing the item.
  std::vector<std::uint64_t> item_cover(static_cast<std::size_t>(item_count) * dw, 0);
  for (std::size_t e = 0; e < edge_count; ++e) {
    edges[e].for_each_bit([&](unsigned item) {
      item_cover[item * dw + (e >> 6)] |= std::uint64_t{1} << (e & 63);
    });
  }
  std::vector<std::uint64_t> all(dw, 0);
  for (std::size_t e = 0; e < edge_count; ++e) all[e >> 6] |= std::uint64_t{1} << (e & 63);

  const auto none_left = [&](const std::uint64_t* u) {
    for (std::size_t i = 0; i < dw; ++i)
      if (u[i]) return false;
    return true;
  };

  // Greedy cover gives the initial upper bound; it is attainable.
  {
    std::vector<std::uint64_t> uncovered = all;
    int greedy = 0;
    while (!none_left(uncovered.data())) {
      int best_item = 0;
      int best_gain = -1;
      for (int item = 0; item < item_count; ++item) {
        const std::uint64_t* cover = &item_cover[static_cast<std::size_t>(item) * dw];
        int gain = 0;
        for (std::size_t i = 0; i < dw; ++i) gain += std::popcount(cover[i] & uncovered[i]);
        if (gain > best_gain) {
          best_gain = gain;
          best_item = item;
        }
      }
      const std::uint64_t* cover = &item_cover[static_cast<std::size_t>(best_item) * dw];
      for (std::size_t i = 0; i < dw; ++i) uncovered[i] &= ~cover[i];
      ++greedy;
    }
    if (greedy < cap) cap = greedy;
    if (cap <= 1) return cap;
  }

  int best = cap;
  // Per-depth scratch for the uncovered-edge mask; edges are sorted
  // small-first, so the first uncovered edge has the fewest branches.
  std::vector<std::vector<std::uint64_t>> levels(static_cast<std::size_t>(best) + 1,
                                                 std::vector<std::uint64_t>(dw));
  levels[0] = all;

  const auto dfs = [&](auto&& self, int depth) -> void {
    const std::uint64_t* uncovered = levels[depth].data();
    if (none_left(uncovered)) {
      if (depth < best) best = depth;
      return;
    }
    if (depth + 1 >= best) return;
    std::size_t first = 0;
    while (!uncovered[first]) ++first;
    const auto branch =
        static_cast<std::size_t>(first * 64 + std::countr_zero(uncovered[first]));
    edges[branch].for_each_bit([&](unsigned item) {
      if (depth + 1 >= best) return;
      const std::uint64_t* cover = &item_cover[static_cast<std::size_t>(item) * dw];
      auto& next = levels[depth + 1];
      for (std::size_t i = 0; i < dw; ++i) next[i] = uncovered[i] & ~cover[i];
      self(self, depth + 1);
    });
  };
  dfs(dfs, 0);
  return best;
}

struct LocalEdges {
  std::vector<ItemId> t_ids;  // local bit -> global item id
  bool has_empty_edge = false;
};

// Builds the t-local minimized edge family for any Mask width. `get(i)` yields
// the i-th background instance.
template <std::size_t W, class GetFn>
std::vector<Mask<W>> build_edges(std::size_t count, const GetFn& get, LocalEdges& info) {
  std::unordered_set<Mask<W>, MaskHash<W>> distinct;
  distinct.reserve(count * 2);
  for (std::size_t bi = 0; bi < count; ++bi) {
    const ItemSet& s = get(bi);
    Mask<W> edge{};
    // merge walk: bit i set when t_ids[i] is absent from s
    const auto& sv = s.ids();
    std::size_t si = 0;
    for (std::size_t i = 0; i < info.t_ids.size(); ++i) {
      const ItemId id = info.t_ids[i];
      while (si < sv.size() && sv[si] < id) ++si;
      if (si == sv.size() || sv[si] != id) edge.set(static_cast<unsigned>(i));
    }
    if (!edge.any()) {
      info.has_empty_edge = true;
      return {};
    }
    distinct.insert(edge);
  }
  return minimize_masks(std::vector<Mask<W>>(distinct.begin(), distinct.end()));
}

template <std::size_t W, class GetFn>
JepSet border_diff_impl(const ItemSet& t, std::size_t count, const GetFn& get) {
  LocalEdges info{t.ids(), false};
  const auto edges = build_edges<W>(count, get, info);
  JepSet result;
  if (info.has_empty_edge) return result;

  auto transversals = minimal_transversals<W>(edges);
  result.patterns.reserve(transversals.size());
  for (const auto& m : transversals) {
    std::vector<ItemId> ids;
    ids.reserve(static_cast<std::size_t>(m.popcount()));
    m.for_each_bit([&](unsigned i) { ids.push_back(info.t_ids[i]); });
    result.patterns.push_back(ItemSet::from_sorted(std::move(ids)));
  }
  std::sort(result.patterns.begin(), result.patterns.end(),
            [](const Pattern& a, const Pattern& b) {
              return a.size() != b.size() ? a.size() < b.size() : a < b;
            });
  if (!result.patterns.empty()) {
    result.min_length = static_cast<double>(result.patterns.front().size());
  }
  return result;
}

template <std::size_t W, class GetFn>
double minimal_jep_length_impl(const ItemSet& t, std::size_t count, const GetFn& get,
                               double cap) {
  LocalEdges info{t.ids(), false};
  const auto edges = build_edges<W>(count, get, info);
  if (info.has_empty_edge) return kNoJepLength;
  const int n = static_cast<int>(t.size());
  // Any transversal has size <= |t|, so n+1 acts as "unbounded".
  const int int_cap = cap > static_cast<double>(n) ? n + 1 : static_cast<int>(cap);
  if (int_cap <= 1) return kNoJepLength;  // every pattern has length >= 1
  const int size = min_transversal_size<W>(edges, n, int_cap);
  if (size >= int_cap) return kNoJepLength;  // only "at least cap" is known
  return static_cast<double>(size);
}

constexpr std::size_t kMaxWords = 8;  // up to 512 items per instance

template <class GetFn>
JepSet border_diff_dispatch(const ItemSet& t, std::size_t count, const GetFn& get) {
  if (count == 0) throw UsageError("border_diff: background sample is empty");
  const std::size_t words = (t.size() + 63) / 64;
  if (words <= 1) return border_diff_impl<1>(t, count, get);
  if (words <= 2) return border_diff_impl<2>(t, count, get);
  if (words <= 4) return border_diff_impl<4>(t, count, get);
  if (words <= kMaxWords) return border_diff_impl<8>(t, count, get);
  throw UsageError("border_diff: instances with more than 512 items are not supported");
}

template <class GetFn>
double minimal_jep_length_dispatch(const ItemSet& t, std::size_t count, const GetFn& get,
                                   double cap) {
  if (count == 0) throw UsageError("border_diff: background sample is empty");
  const std::size_t words = (t.size() + 63) / 64;
  if (words <= 1) return minimal_jep_length_impl<1>(t, count, get, cap);
  if (words <= 2) return minimal_jep_length_impl<2>(t, count, get, cap);
  if (words <= 4) return minimal_jep_length_impl<4>(t, count, get, cap);
  if (words <= kMaxWords) return minimal_jep_length_impl<8>(t, count, get, cap);
  throw UsageError("border_diff: instances with more than 512 items are not supported");
}

}  // namespace

JepSet border_diff(const ItemSet& t, std::span<const ItemSet> background) {
  return border_diff_dispatch(t, background.size(),
                              [&](std::size_t i) -> const ItemSet& { return background[i]; });
}

double minimal_jep_length(const ItemSet& t, std::span<const ItemSet> background,
                          double cap) {
  return minimal_jep_length_dispatch(
      t, background.size(), [&](std::size_t i) -> const ItemSet& { return background[i]; },
      cap);
}

JepSet border_diff_sample(const ItemSet& t, std::span<const ItemSet> dataset,
                          std::span<const std::uint32_t> indices) {
  return border_diff_dispatch(
      t, indices.size(), [&](std::size_t i) -> const ItemSet& { return dataset[indices[i]]; });
}

double minimal_jep_length_sample(const ItemSet& t, std::span<const ItemSet> dataset,
                                 std::span<const std::uint32_t> indices, double cap) {
  return minimal_jep_length_dispatch(
      t, indices.size(), [&](std::size_t i) -> const ItemSet& { return dataset[indices[i]]; },
      cap);
}

double length_statistic(std::span<const JepSet> sets, LengthStatistic mode) {
  if (mode == LengthStatistic::kMin) {
    double best = kNoJepLength;
    for (const auto& s : sets) best = std::min(best, s.min_length);
    return best;
  }
  std::vector<const Pattern*> pooled;
  for (const auto& s : sets) {
    for (const auto& p : s.patterns) pooled.push_back(&p);
  }
  if (pooled.empty()) return kNoJepLength;
  std::sort(pooled.begin(), pooled.end(),
            [](const Pattern* a, const Pattern* b) { return *a < *b; });
  pooled.erase(std::unique(pooled.begin(), pooled.end(),
                           [](const Pattern* a, const Pattern* b) { return *a == *b; }),
               pooled.end());
  double total = 0.0;
  for (const auto* p : pooled) total += static_cast<double>(p->size());
  return total / static_cast<double>(pooled.size());
}

}  // namespace oclep
