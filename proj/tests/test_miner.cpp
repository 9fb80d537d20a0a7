#include "oclep/miner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "oclep/dataset.hpp"
#include "oclep/errors.hpp"
#include "oracle.hpp"

using namespace oclep;

namespace {

std::vector<Pattern> sorted_patterns(std::vector<Pattern> ps) {
  std::sort(ps.begin(), ps.end(), [](const Pattern& a, const Pattern& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return ps;
}

// Random instance over a small universe; may repeat items across instances.
ItemSet random_set(std::mt19937& gen, std::uint32_t universe, std::uint32_t size) {
  std::vector<ItemId> ids;
  for (std::uint32_t i = 0; i < size; ++i) {
    ids.push_back(gen() % universe);
  }
  return ItemSet(std::move(ids));
}

}  // namespace

TEST_CASE("diff_edge is plain set difference") {
  CHECK(diff_edge(ItemSet{1, 2, 3, 4}, ItemSet{3, 4, 5, 6}) == ItemSet{1, 2});
  CHECK(diff_edge(ItemSet{1, 2, 3, 4}, ItemSet{2, 4, 7, 9}) == ItemSet{1, 3});
  CHECK(diff_edge(ItemSet{1, 2, 3, 4}, ItemSet{1, 2, 3, 4}) == ItemSet{});
}

TEST_CASE("minimize_family removes duplicates and supersets") {
  const auto fam = minimize_family({ItemSet{1, 2}, ItemSet{1}, ItemSet{3, 4}});
  CHECK_FALSE(fam.has_empty_edge);
  REQUIRE(fam.edges.size() == 2);
  CHECK(fam.edges[0] == ItemSet{1});
  CHECK(fam.edges[1] == ItemSet{3, 4});

  const auto dup = minimize_family({ItemSet{1, 2}, ItemSet{1, 2}});
  CHECK(dup.edges.size() == 1);
  CHECK(dup.edges[0] == ItemSet{1, 2});

  const auto empty = minimize_family({ItemSet{}, ItemSet{1}});
  CHECK(empty.has_empty_edge);
  REQUIRE(empty.edges.size() == 1);
  CHECK(empty.edges[0].empty());
}

TEST_CASE("border_diff on the worked example") {
  const ItemSet t{1, 2, 3, 4};
  const std::vector<ItemSet> background{ItemSet{3, 4, 5, 6}, ItemSet{2, 4, 7, 9},
                                        ItemSet{2, 3, 5, 8}};
  const JepSet jeps = border_diff(t, background);
  REQUIRE(jeps.patterns.size() == 2);
  CHECK(jeps.patterns[0] == ItemSet{1});
  CHECK(jeps.patterns[1] == ItemSet{2, 3, 4});
  CHECK(jeps.min_length == 1.0);
}

TEST_CASE("border_diff when the instance is covered by the background") {
  const JepSet jeps = border_diff(ItemSet{1, 2}, std::vector<ItemSet>{ItemSet{1, 2, 3}});
  CHECK(jeps.empty());
  CHECK(std::isinf(jeps.min_length));
}

TEST_CASE("border_diff rejects an empty background") {
  CHECK_THROWS_AS(border_diff(ItemSet{1}, std::vector<ItemSet>{}), UsageError);
  CHECK_THROWS_AS(minimal_jep_length(ItemSet{1}, std::vector<ItemSet>{}), UsageError);
}

TEST_CASE("border_diff equals brute-force enumeration on random cases") {
  std::mt19937 gen(20240401);
  for (int round = 0; round < 300; ++round) {
    const std::uint32_t universe = 8 + gen() % 16;
    const std::uint32_t t_size = 1 + gen() % 12;
    const std::uint32_t m_count = 1 + gen() % 20;
    const ItemSet t = random_set(gen, universe, t_size);
    std::vector<ItemSet> background;
    for (std::uint32_t i = 0; i < m_count; ++i) {
      background.push_back(random_set(gen, universe, 1 + gen() % 12));
    }
    const auto expected = sorted_patterns(testing::brute_force_minimal_jeps(t, background));
    const JepSet got = border_diff(t, background);
    REQUIRE(got.patterns == expected);
    if (expected.empty()) {
      CHECK(std::isinf(got.min_length));
    } else {
      CHECK(got.min_length == static_cast<double>(expected.front().size()));
      // the fast path agrees with the full enumeration
      CHECK(minimal_jep_length(t, background) == got.min_length);
    }
  }
}

TEST_CASE("border_diff soundness and minimality on random cases") {
  std::mt19937 gen(987123);
  for (int round = 0; round < 100; ++round) {
    const std::uint32_t universe = 10 + gen() % 20;
    const ItemSet t = random_set(gen, universe, 1 + gen() % 14);
    std::vector<ItemSet> background;
    const std::uint32_t m_count = 1 + gen() % 15;
    for (std::uint32_t i = 0; i < m_count; ++i) {
      background.push_back(random_set(gen, universe, 1 + gen() % 14));
    }
    const JepSet jeps = border_diff(t, background);
    for (const auto& p : jeps.patterns) {
      CHECK(matches(t, p));
      CHECK(support(p, background) == 0.0);
      CHECK(std::isinf(growth_rate(p, std::vector<ItemSet>{t}, background)));
      // removing any single item breaks the zero support
      for (const ItemId drop : p) {
        std::vector<ItemId> rest;
        for (const ItemId id : p) {
          if (id != drop) rest.push_back(id);
        }
        if (rest.empty()) continue;  // empty pattern matches everything anyway
        CHECK(support(ItemSet(std::move(rest)), background) > 0.0);
      }
      CHECK(p.size() >= 1);
      CHECK(p.size() <= t.size());
    }
    if (!jeps.empty()) {
      CHECK(jeps.min_length >= 1.0);
      CHECK(jeps.min_length <= static_cast<double>(t.size()));
    }
  }
}

TEST_CASE("border_diff is order independent") {
  std::mt19937 gen(5150);
  const ItemSet t = random_set(gen, 14, 8);
  std::vector<ItemSet> background;
  for (int i = 0; i < 12; ++i) background.push_back(random_set(gen, 14, 6));
  const auto base = border_diff(t, background);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(background.begin(), background.end(), gen);
    const auto shuffled = border_diff(t, background);
    CHECK(shuffled.patterns == base.patterns);
    CHECK(shuffled.min_length == base.min_length);
  }
}

TEST_CASE("border_diff equals the minimal transversals of the minimized diff family") {
  std::mt19937 gen(777);
  for (int round = 0; round < 50; ++round) {
    const std::uint32_t universe = 8 + gen() % 8;
    const ItemSet t = random_set(gen, universe, 1 + gen() % 10);
    std::vector<ItemSet> background;
    const std::uint32_t m_count = 1 + gen() % 10;
    for (std::uint32_t i = 0; i < m_count; ++i) {
      background.push_back(random_set(gen, universe, 1 + gen() % 10));
    }
    std::vector<ItemSet> edges;
    for (const auto& s : background) edges.push_back(diff_edge(t, s));
    const DiffFamily family = minimize_family(edges);

    std::vector<Pattern> expected;
    if (!family.has_empty_edge) {
      expected = sorted_patterns(testing::brute_force_minimal_transversals(family.edges));
    }
    const JepSet got = border_diff(t, background);
    CHECK(got.patterns == expected);
  }
}

TEST_CASE("minimal_jep_length honors the cap contract") {
  std::mt19937 gen(31337);
  for (int round = 0; round < 100; ++round) {
    const std::uint32_t universe = 8 + gen() % 10;
    const ItemSet t = random_set(gen, universe, 1 + gen() % 10);
    std::vector<ItemSet> background;
    const std::uint32_t m_count = 1 + gen() % 12;
    for (std::uint32_t i = 0; i < m_count; ++i) {
      background.push_back(random_set(gen, universe, 1 + gen() % 10));
    }
    const double truth = border_diff(t, background).min_length;
    const double uncapped = minimal_jep_length(t, background);
    CHECK(uncapped == truth);
    for (double cap = 1.0; cap <= 5.0; cap += 1.0) {
      const double capped = minimal_jep_length(t, background, cap);
      if (truth < cap) {
        CHECK(capped == truth);
      } else {
        CHECK(capped >= cap);
      }
    }
  }
}

TEST_CASE("border_diff on instances wider than one mask word") {
  // Wide instances whose diff edges stay inside a small pool of removable
  // items, so the expected answer is still enumerable: each background
  // instance is t minus a few pool items plus some filler outside t.
  std::mt19937 gen(271828);
  for (const std::uint32_t width : {100u, 200u, 450u}) {
    std::vector<ItemId> t_ids;
    for (std::uint32_t i = 0; i < width; ++i) t_ids.push_back(2 * i);  // even ids
    const ItemSet t = ItemSet::from_sorted(std::vector<ItemId>(t_ids));

    std::vector<ItemId> pool;  // removable items, all inside t
    for (int i = 0; i < 12; ++i) pool.push_back(t_ids[gen() % t_ids.size()]);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    std::vector<ItemSet> background;
    std::vector<ItemSet> edges;
    for (int s = 0; s < 15; ++s) {
      std::vector<ItemId> removed;
      const std::size_t remove_count = 1 + gen() % 3;
      for (std::size_t i = 0; i < remove_count; ++i) removed.push_back(pool[gen() % pool.size()]);
      ItemSet removal(std::move(removed));
      std::vector<ItemId> ids;
      for (const ItemId id : t) {
        if (!removal.contains(id)) ids.push_back(id);
      }
      ids.push_back(2 * width + 1 + static_cast<ItemId>(s));  // filler outside t
      background.push_back(ItemSet(std::move(ids)));
      edges.push_back(removal);
    }

    auto expected = sorted_patterns(testing::brute_force_minimal_transversals(edges));
    const JepSet got = border_diff(t, background);
    REQUIRE(got.patterns == expected);
    CHECK(minimal_jep_length(t, background) == got.min_length);
    for (const auto& p : got.patterns) {
      CHECK(matches(t, p));
      CHECK(support(p, background) == 0.0);
    }

    // a background instance covering all of t still yields the empty JepSet
    auto covered = background;
    covered.push_back(t);
    CHECK(border_diff(t, covered).empty());
    CHECK(std::isinf(minimal_jep_length(t, covered)));
  }
}

TEST_CASE("length_statistic pools pattern lengths") {
  JepSet a;
  a.patterns = {ItemSet{1}, ItemSet{2, 3, 4}};
  a.min_length = 1.0;
  CHECK(length_statistic(std::vector<JepSet>{a}, LengthStatistic::kMin) == 1.0);
  CHECK(length_statistic(std::vector<JepSet>{a}, LengthStatistic::kMean) == 2.0);

  const std::vector<JepSet> none{JepSet{}, JepSet{}};
  CHECK(std::isinf(length_statistic(none, LengthStatistic::kMin)));
  CHECK(std::isinf(length_statistic(none, LengthStatistic::kMean)));

  // union semantics: a pattern appearing in two sets counts once
  JepSet b;
  b.patterns = {ItemSet{1}, ItemSet{5, 6}};
  b.min_length = 1.0;
  const std::vector<JepSet> both{a, b};
  CHECK(length_statistic(both, LengthStatistic::kMean) ==
        doctest::Approx((1.0 + 3.0 + 2.0) / 3.0));
  CHECK(length_statistic(both, LengthStatistic::kMin) == 1.0);
}
