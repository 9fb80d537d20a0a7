#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oclep/dataset.hpp"
#include "oclep/itemset.hpp"
#include "oclep/miner.hpp"
#include "oclep/rng.hpp"

namespace oclep {

enum class CutoffRule { kInclusive, kStrict };

struct HyperParams {
  std::uint32_t probe_count = 800;      // k: training probes
  std::uint32_t sample_size = 400;      // m: background sample per mining call
  std::uint32_t samples_per_probe = 7;  // r: mining calls per instance
  double percentile = 0.95;             // p in (0, 1]
  LengthStatistic statistic = LengthStatistic::kMin;
  CutoffRule rule = CutoffRule::kStrict;
  std::uint64_t seed = 1;
};

struct DetectorModel {
  double cutoff = 0.0;  // an element of training_lengths
  HyperParams params;   // effective values (sample_size may have been lowered)
  AttributeSchema schema;
  std::vector<double> training_lengths;  // decreasing; sentinels first
};

enum class Classification { kNormal, kIntruder };

struct Verdict {
  Classification label = Classification::kNormal;
  double length_stat = kNoJepLength;
};

inline constexpr std::uint32_t kNoExclusion = 0xffffffffu;

// Length statistic of x versus r random size-m samples of `normals`
// (excluding index `exclude` when x sits inside the dataset). Sample i uses
// the generator seeded by derive_seed(params.seed, stream, task_id, i), so a
// fixed task id reproduces the draws exactly.
double score_instance(const ItemSet& x, std::span<const ItemSet> normals,
                      std::uint32_t exclude, const HyperParams& params,
                      rng::Stream stream, std::uint64_t task_id);

// Same draws as score_instance, keeping the full pooled pattern sets.
std::vector<JepSet> mine_instance(const ItemSet& x, std::span<const ItemSet> normals,
                                  std::uint32_t exclude, const HyperParams& params,
                                  rng::Stream stream, std::uint64_t task_id);

// One length statistic per training probe, in probe order.
std::vector<double> training_length_statistics(std::span<const ItemSet> normals,
                                               const HyperParams& params, int threads);

// Element at 1-based position ceil(p * n) of the decreasing-sorted lengths.
double cutoff_from_lengths(std::span<const double> sorted_decreasing, double percentile);

// Full training pass: probe sampling, mining, cutoff selection. Lowers
// sample_size to |normals|-1 (with a note to `log`) when necessary.
DetectorModel train(std::span<const ItemSet> normals, const AttributeSchema& schema,
                    HyperParams params, int threads, std::ostream* log = nullptr);

// Sentinel statistics always classify as normal.
Classification classify(double length_stat, double cutoff, CutoffRule rule);

Verdict score_and_classify(const ItemSet& x, std::span<const ItemSet> normals,
                           const DetectorModel& model, std::uint64_t task_id);

struct Explanation {
  double length_stat = kNoJepLength;
  std::vector<Pattern> patterns;  // pooled minimal JEPs achieving length_stat
  bool indistinguishable = false;
};

// The pooled minimal JEPs achieving the instance's minimal length, under the
// same draws as scoring would use for this task id.
Explanation explain_instance(const ItemSet& x, std::span<const ItemSet> normals,
                             std::uint32_t exclude, const HyperParams& params,
                             rng::Stream stream, std::uint64_t task_id);

// "[cond] [cond] ..." with conditions rendered by the schema.
std::string render_pattern(const Pattern& pattern, const AttributeSchema& schema);

// Model file (structured text). Write-then-read round-trips to identical
// bytes; sentinel lengths are encoded as the string "inf".
std::string model_to_json(const DetectorModel& model);
DetectorModel model_from_json(const std::string& text);
void save_model(const DetectorModel& model, const std::string& path);
DetectorModel load_model(const std::string& path);

}  // namespace oclep
