#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oclep/dataset.hpp"
#include "oclep/detector.hpp"

namespace oclep {

// The intruder/anomaly side is the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const Classification> predicted,
                          std::span<const Label> actual);

// precision/recall/fscore/accuracy as percentages, fpr/tpr as rates in [0,1];
// a metric with a zero denominator is absent, never silently zero.
struct MetricsReport {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fscore;
  std::optional<double> accuracy;
  std::optional<double> fpr;
  std::optional<double> tpr;
};

MetricsReport metrics(const ConfusionCounts& counts);

// Round half away from zero.
double round_to(double value, int decimals);

// Fixed-point rendering, or "undefined" for an absent metric.
std::string format_metric(std::optional<double> value, int decimals);

// Scores every test instance against the model; task ids follow test order,
// so a fixed seed reproduces the verdicts bit for bit.
std::vector<Verdict> score_dataset(std::span<const ItemSet> test,
                                   std::span<const ItemSet> normals,
                                   const DetectorModel& model, int threads,
                                   std::ostream* progress = nullptr);

enum class SweepParam { kProbeCount, kSampleSize, kSamplesPerProbe, kPercentile, kBins };

std::optional<SweepParam> parse_sweep_param(std::string_view name);  // k m r p bins
std::string_view sweep_param_name(SweepParam param);

struct SweepRow {
  double value = 0.0;
  ConfusionCounts counts;
  MetricsReport report;
};

// One full train + evaluate cycle per value under the same master seed.
// For the bins parameter the discretizer is refitted per value; otherwise the
// itemized datasets are built once and shared across rows.
std::vector<SweepRow> sweep(SweepParam param, std::span<const double> values,
                            const HyperParams& base, std::uint32_t bins,
                            const AttributeSchema& schema_template,
                            const std::vector<Instance>& train_normals,
                            const std::vector<Instance>& test_instances,
                            const std::vector<Label>& test_labels, int threads,
                            std::ostream* progress = nullptr);

// Column order of the parameter-impact tables:
// value, TP, FP, TN, FN, FPR, TPR, Prec, Reca, Fscore, Accu.
void write_sweep_report(std::ostream& out, std::string_view param_name,
                        std::span<const SweepRow> rows, char delimiter);

}  // namespace oclep
