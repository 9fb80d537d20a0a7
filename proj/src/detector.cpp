#include "oclep/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "oclep/errors.hpp"
#include "oclep/parallel.hpp"
#include "schema_json.hpp"

namespace oclep {

namespace {

void check_params(const HyperParams& p) {
  if (p.probe_count < 1) throw UsageError("probe count k must be at least 1");
  if (p.sample_size < 1) throw UsageError("sample size m must be at least 1");
  if (p.samples_per_probe < 1) throw UsageError("sample count r must be at least 1");
  if (!(p.percentile > 0.0) || p.percentile > 1.0) {
    throw UsageError("percentile p must be in (0, 1]");
  }
}

std::vector<std::uint32_t> draw_sample(std::span<const ItemSet> normals,
                                       std::uint32_t exclude, std::uint32_t size,
                                       std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto population = static_cast<std::uint32_t>(normals.size());
  if (exclude == kNoExclusion) return rng::sample_without_replacement(gen, population, size);
  return rng::sample_excluding(gen, population, size, exclude);
}

void check_sample_space(std::span<const ItemSet> normals, std::uint32_t exclude,
                        std::uint32_t sample_size) {
  const std::size_t space = normals.size() - (exclude == kNoExclusion ? 0 : 1);
  if (sample_size > space) {
    throw UsageError("sample size " + std::to_string(sample_size) +
                     " exceeds the available normal instances (" + std::to_string(space) +
                     ")");
  }
}

}  // namespace

double score_instance(const ItemSet& x, std::span<const ItemSet> normals,
                      std::uint32_t exclude, const HyperParams& params,
                      rng::Stream stream, std::uint64_t task_id) {
  check_params(params);
  check_sample_space(normals, exclude, params.sample_size);
  if (params.statistic == LengthStatistic::kMean) {
    const auto sets = mine_instance(x, normals, exclude, params, stream, task_id);
    return length_statistic(sets, LengthStatistic::kMean);
  }
  double best = kNoJepLength;
  for (std::uint32_t i = 0; i < params.samples_per_probe; ++i) {
    const auto indices = draw_sample(normals, exclude, params.sample_size,
                                     rng::derive_seed(params.seed, stream, task_id, i));
    best = std::min(best, minimal_jep_length_sample(x, normals, indices, best));
    if (best == 1.0) break;  // no pattern can be shorter
  }
  return best;
}

std::vector<JepSet> mine_instance(const ItemSet& x, std::span<const ItemSet> normals,
                                  std::uint32_t exclude, const HyperParams& params,
                                  rng::Stream stream, std::uint64_t task_id) {
  check_params(params);
  check_sample_space(normals, exclude, params.sample_size);
  std::vector<JepSet> sets;
  sets.reserve(params.samples_per_probe);
  for (std::uint32_t i = 0; i < params.samples_per_probe; ++i) {
    const auto indices = draw_sample(normals, exclude, params.sample_size,
                                     rng::derive_seed(params.seed, stream, task_id, i));
    sets.push_back(border_diff_sample(x, normals, indices));
  }
  return sets;
}

std::vector<double> training_length_statistics(std::span<const ItemSet> normals,
                                               const HyperParams& params, int threads) {
  check_params(params);
  if (normals.size() < 2) throw UsageError("training needs at least 2 normal instances");
  if (params.probe_count > normals.size()) {
    throw UsageError("probe count k=" + std::to_string(params.probe_count) +
                     " exceeds the normal dataset size " + std::to_string(normals.size()));
  }
  if (params.sample_size > normals.size() - 1) {
    throw UsageError("sample size m=" + std::to_string(params.sample_size) +
                     " exceeds |N|-1=" + std::to_string(normals.size() - 1));
  }
  std::mt19937_64 probe_gen(rng::derive_seed(params.seed, rng::Stream::kTrainProbes));
  const auto probes = rng::sample_without_replacement(
      probe_gen, static_cast<std::uint32_t>(normals.size()), params.probe_count);

  std::vector<double> lengths(probes.size());
  parallel_for(probes.size(), threads, [&](std::size_t j) {
    lengths[j] = score_instance(normals[probes[j]], normals, probes[j], params,
                                rng::Stream::kTrainMining, j);
  });
  return lengths;
}

double cutoff_from_lengths(std::span<const double> sorted_decreasing, double percentile) {
  if (sorted_decreasing.empty()) throw UsageError("no training lengths");
  if (!(percentile > 0.0) || percentile > 1.0) {
    throw UsageError("percentile p must be in (0, 1]");
  }
  const auto n = sorted_decreasing.size();
  // 1-based index ceil(p*n); the epsilon guards against 0.95*800 -> 760.0000…1.
  auto index = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(n) - 1e-9));
  index = std::clamp<std::size_t>(index, 1, n);
  return sorted_decreasing[index - 1];
}

DetectorModel train(std::span<const ItemSet> normals, const AttributeSchema& schema,
                    HyperParams params, int threads, std::ostream* log) {
  if (normals.size() < 2) throw UsageError("training needs at least 2 normal instances");
  if (params.sample_size > normals.size() - 1) {
    const auto lowered = static_cast<std::uint32_t>(normals.size() - 1);
    if (log) {
      *log << "note: lowering sample size m from " << params.sample_size << " to "
           << lowered << " (|N|-1)\n";
    }
    params.sample_size = lowered;
  }
  auto lengths = training_length_statistics(normals, params, threads);
  std::sort(lengths.begin(), lengths.end(), std::greater<double>());
  DetectorModel model;
  model.cutoff = cutoff_from_lengths(lengths, params.percentile);
  model.params = params;
  model.schema = schema;
  model.training_lengths = std::move(lengths);
  return model;
}

Classification classify(double length_stat, double cutoff, CutoffRule rule) {
  if (std::isinf(length_stat)) return Classification::kNormal;
  if (rule == CutoffRule::kInclusive) {
    return length_stat >= cutoff ? Classification::kNormal : Classification::kIntruder;
  }
  return length_stat > cutoff ? Classification::kNormal : Classification::kIntruder;
}

Verdict score_and_classify(const ItemSet& x, std::span<const ItemSet> normals,
                           const DetectorModel& model, std::uint64_t task_id) {
  Verdict v;
  v.length_stat = score_instance(x, normals, kNoExclusion, model.params,
                                 rng::Stream::kScoreMining, task_id);
  v.label = classify(v.length_stat, model.cutoff, model.params.rule);
  return v;
}

Explanation explain_instance(const ItemSet& x, std::span<const ItemSet> normals,
                             std::uint32_t exclude, const HyperParams& params,
                             rng::Stream stream, std::uint64_t task_id) {
  const auto sets = mine_instance(x, normals, exclude, params, stream, task_id);
  Explanation out;
  out.length_stat = length_statistic(sets, params.statistic);

  std::size_t min_len = 0;
  for (const auto& s : sets) {
    for (const auto& p : s.patterns) {
      if (min_len == 0 || p.size() < min_len) min_len = p.size();
    }
  }
  if (min_len == 0) {
    out.indistinguishable = true;
    return out;
  }
  for (const auto& s : sets) {
    for (const auto& p : s.patterns) {
      if (p.size() == min_len) out.patterns.push_back(p);
    }
  }
  std::sort(out.patterns.begin(), out.patterns.end());
  out.patterns.erase(std::unique(out.patterns.begin(), out.patterns.end()),
                     out.patterns.end());
  return out;
}

std::string render_pattern(const Pattern& pattern, const AttributeSchema& schema) {
  std::string out;
  for (const ItemId id : pattern) {
    if (!out.empty()) out += " ";
    out += "[" + schema.describe_item(id) + "]";
  }
  return out;
}

namespace {

nlohmann::json length_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double length_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kNoJepLength;
    throw DataError("model file: bad length value '" + j.get<std::string>() + "'");
  }
  return j.get<double>();
}

}  // namespace

std::string model_to_json(const DetectorModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["cutoff"] = length_to_json(model.cutoff);
  nlohmann::json params;
  params["k"] = model.params.probe_count;
  params["m"] = model.params.sample_size;
  params["r"] = model.params.samples_per_probe;
  params["p"] = model.params.percentile;
  params["statistic"] = model.params.statistic == LengthStatistic::kMin ? "min" : "mean";
  params["rule"] = model.params.rule == CutoffRule::kInclusive ? "inclusive" : "strict";
  params["seed"] = model.params.seed;
  j["params"] = std::move(params);
  j["schema"] = detail::schema_to_json_value(model.schema);
  nlohmann::json lengths = nlohmann::json::array();
  for (const double v : model.training_lengths) lengths.push_back(length_to_json(v));
  j["training_lengths"] = std::move(lengths);
  return j.dump(2) + "\n";
}

DetectorModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw DataError("unsupported model file version");
    DetectorModel model;
    model.cutoff = length_from_json(j.at("cutoff"));
    const auto& params = j.at("params");
    model.params.probe_count = params.at("k").get<std::uint32_t>();
    model.params.sample_size = params.at("m").get<std::uint32_t>();
    model.params.samples_per_probe = params.at("r").get<std::uint32_t>();
    model.params.percentile = params.at("p").get<double>();
    const auto statistic = params.at("statistic").get<std::string>();
    if (statistic == "min") {
      model.params.statistic = LengthStatistic::kMin;
    } else if (statistic == "mean") {
      model.params.statistic = LengthStatistic::kMean;
    } else {
      throw DataError("model file: unknown statistic '" + statistic + "'");
    }
    const auto rule = params.at("rule").get<std::string>();
    if (rule == "inclusive") {
      model.params.rule = CutoffRule::kInclusive;
    } else if (rule == "strict") {
      model.params.rule = CutoffRule::kStrict;
    } else {
      throw DataError("model file: unknown rule '" + rule + "'");
    }
    model.params.seed = params.at("seed").get<std::uint64_t>();
    model.schema = detail::schema_from_json_value(j.at("schema"));
    for (const auto& v : j.at("training_lengths")) {
      model.training_lengths.push_back(length_from_json(v));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is malformed: ") + e.what());
  }
}

void save_model(const DetectorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << model_to_json(model);
  if (!out) throw DataError("failed writing file: " + path);
}

DetectorModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace oclep
