#include "oclep/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>

#include "oclep/errors.hpp"
#include "oclep/parallel.hpp"

namespace oclep {

ConfusionCounts confusion(std::span<const Classification> predicted,
                          std::span<const Label> actual) {
  if (predicted.size() != actual.size()) {
    throw UsageError("confusion: " + std::to_string(predicted.size()) + " verdicts vs " +
                     std::to_string(actual.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool intruder = predicted[i] == Classification::kIntruder;
    const bool anomaly = actual[i] == Label::kAnomaly;
    if (intruder && anomaly) {
      ++c.tp;
    } else if (intruder && !anomaly) {
      ++c.fp;
    } else if (!intruder && anomaly) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw UsageError("metrics: all confusion counts are zero");
  MetricsReport r;
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);
  if (c.tp + c.fp > 0) r.precision = 100.0 * tp / (tp + fp);
  if (c.tp + c.fn > 0) {
    r.recall = 100.0 * tp / (tp + fn);
    r.tpr = tp / (tp + fn);
  }
  if (r.precision && r.recall && *r.precision + *r.recall > 0.0) {
    r.fscore = 2.0 * (*r.precision) * (*r.recall) / (*r.precision + *r.recall);
  }
  r.accuracy = 100.0 * (tp + tn) / (tp + tn + fp + fn);
  if (c.fp + c.tn > 0) r.fpr = fp / (fp + tn);
  return r;
}

double round_to(double value, int decimals) {
  double scale = 1.0;
  for (int i = 0; i < decimals; ++i) scale *= 10.0;
  return std::round(value * scale) / scale;
}

std::string format_metric(std::optional<double> value, int decimals) {
  if (!value) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, *value);
  return buf;
}

std::vector<Verdict> score_dataset(std::span<const ItemSet> test,
                                   std::span<const ItemSet> normals,
                                   const DetectorModel& model, int threads,
                                   std::ostream* progress) {
  std::vector<Verdict> verdicts(test.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  const std::size_t step = std::max<std::size_t>(1, test.size() / 10);
  parallel_for(test.size(), threads, [&](std::size_t i) {
    verdicts[i] = score_and_classify(test[i], normals, model, i);
    const std::size_t d = done.fetch_add(1, std::memory_order_relaxed) + 1;
    if (progress && d % step == 0) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      *progress << "scored " << d << "/" << test.size() << "\n";
    }
  });
  return verdicts;
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  if (name == "k") return SweepParam::kProbeCount;
  if (name == "m") return SweepParam::kSampleSize;
  if (name == "r") return SweepParam::kSamplesPerProbe;
  if (name == "p") return SweepParam::kPercentile;
  if (name == "bins") return SweepParam::kBins;
  return std::nullopt;
}

std::string_view sweep_param_name(SweepParam param) {
  switch (param) {
    case SweepParam::kProbeCount: return "k";
    case SweepParam::kSampleSize: return "m";
    case SweepParam::kSamplesPerProbe: return "r";
    case SweepParam::kPercentile: return "p";
    case SweepParam::kBins: return "bins";
  }
  return "?";
}

namespace {

std::uint32_t checked_positive_integer(double value, std::string_view what) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 4e9) {
    throw UsageError(std::string(what) + " must be a positive integer");
  }
  return static_cast<std::uint32_t>(value);
}

std::vector<ItemSet> itemize_all(const std::vector<Instance>& instances,
                                 const AttributeSchema& schema) {
  std::vector<ItemSet> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(itemize(inst, schema));
  return out;
}

}  // namespace

std::vector<SweepRow> sweep(SweepParam param, std::span<const double> values,
                            const HyperParams& base, std::uint32_t bins,
                            const AttributeSchema& schema_template,
                            const std::vector<Instance>& train_normals,
                            const std::vector<Instance>& test_instances,
                            const std::vector<Label>& test_labels, int threads,
                            std::ostream* progress) {
  if (values.empty()) throw UsageError("sweep: no parameter values given");
  if (test_instances.size() != test_labels.size()) {
    throw UsageError("sweep: test labels do not match test instances");
  }

  AttributeSchema schema = schema_template;
  std::vector<ItemSet> train_items, test_items;
  if (param != SweepParam::kBins) {
    fit_discretizer(schema, train_normals, bins);
    train_items = itemize_all(train_normals, schema);
    test_items = itemize_all(test_instances, schema);
  }

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (const double value : values) {
    HyperParams params = base;
    std::uint32_t row_bins = bins;
    switch (param) {
      case SweepParam::kProbeCount:
        params.probe_count = checked_positive_integer(value, "k");
        break;
      case SweepParam::kSampleSize:
        params.sample_size = checked_positive_integer(value, "m");
        break;
      case SweepParam::kSamplesPerProbe:
        params.samples_per_probe = checked_positive_integer(value, "r");
        break;
      case SweepParam::kPercentile:
        if (!(value > 0.0) || value > 1.0) throw UsageError("p must be in (0, 1]");
        params.percentile = value;
        break;
      case SweepParam::kBins:
        row_bins = checked_positive_integer(value, "bins");
        break;
    }
    if (param == SweepParam::kBins) {
      schema = schema_template;
      fit_discretizer(schema, train_normals, row_bins);
      train_items = itemize_all(train_normals, schema);
      test_items = itemize_all(test_instances, schema);
    }
    if (progress) {
      *progress << "sweep " << sweep_param_name(param) << "=" << value << ": training\n";
    }
    const DetectorModel model = train(train_items, schema, params, threads, progress);
    if (progress) {
      *progress << "sweep " << sweep_param_name(param) << "=" << value
                << ": cutoff=" << model.cutoff << ", scoring " << test_items.size()
                << " instances\n";
    }
    const auto verdicts = score_dataset(test_items, train_items, model, threads, nullptr);
    std::vector<Classification> predicted;
    predicted.reserve(verdicts.size());
    for (const auto& v : verdicts) predicted.push_back(v.label);
    SweepRow row;
    row.value = value;
    row.counts = confusion(predicted, test_labels);
    row.report = metrics(row.counts);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_report(std::ostream& out, std::string_view param_name,
                        std::span<const SweepRow> rows, char delimiter) {
  const char d = delimiter;
  out << param_name << d << "TP" << d << "FP" << d << "TN" << d << "FN" << d << "FPR" << d
      << "TPR" << d << "Prec" << d << "Reca" << d << "Fscore" << d << "Accu"
      << "\n";
  char buf[64];
  for (const auto& row : rows) {
    if (row.value == std::floor(row.value)) {
      std::snprintf(buf, sizeof(buf), "%.0f", row.value);
    } else {
      std::snprintf(buf, sizeof(buf), "%g", row.value);
    }
    out << buf << d << row.counts.tp << d << row.counts.fp << d << row.counts.tn << d
        << row.counts.fn << d << format_metric(row.report.fpr, 2) << d
        << format_metric(row.report.tpr, 2) << d << format_metric(row.report.precision, 2)
        << d << format_metric(row.report.recall, 2) << d
        << format_metric(row.report.fscore, 2) << d
        << format_metric(row.report.accuracy, 2) << "\n";
  }
}

}  // namespace oclep
