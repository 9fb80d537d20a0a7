// oclep: one-class anomaly detection by minimal length of jumping emerging
// patterns. Subcommands: train, score, evaluate, sweep, explain.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oclep/dataset.hpp"
#include "oclep/detector.hpp"
#include "oclep/errors.hpp"
#include "oclep/eval.hpp"
#include "oclep/parallel.hpp"

namespace {

using namespace oclep;

struct Options {
  std::string train_data;
  std::string test_data;
  std::string model_path;
  std::string schema_path;
  std::string out;
  std::uint32_t k = 800;
  std::uint32_t m = 400;
  std::uint32_t r = 7;
  double p = 0.95;
  std::uint32_t bins = 8;
  std::uint64_t seed = 1;
  std::string statistic = "min";
  std::string rule = "strict";
  int threads = default_thread_count();
  bool unlabeled = false;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::vector<std::size_t> rows;
};

HyperParams hyper_params(const Options& opt) {
  HyperParams params;
  params.probe_count = opt.k;
  params.sample_size = opt.m;
  params.samples_per_probe = opt.r;
  params.percentile = opt.p;
  params.statistic = opt.statistic == "mean" ? LengthStatistic::kMean : LengthStatistic::kMin;
  params.rule = opt.rule == "strict" ? CutoffRule::kStrict : CutoffRule::kInclusive;
  params.seed = opt.seed;
  return params;
}

std::string format_length(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct TrainingSet {
  AttributeSchema schema;  // unfitted template (dictionaries + ranges)
  std::vector<Instance> normals;
  std::size_t total_rows = 0;
};

// Loads the training file and keeps the normal class only (every row in
// unlabeled mode). The schema sees just the retained rows, so test-time
// values outside it map to the reserved unknown items.
TrainingSet load_training(const std::string& path, bool unlabeled) {
  const RawTable raw = read_csv(path);
  if (raw.rows.empty()) throw DataError("training file is empty: " + path);
  const KindHints hints = infer_kinds(raw, !unlabeled);

  RawTable kept;
  for (const auto& row : raw.rows) {
    if (unlabeled) {
      kept.rows.push_back(row);
      continue;
    }
    std::size_t label_col = 0;
    for (std::size_t c = 0; c < hints.roles.size(); ++c) {
      if (hints.roles[c] == ColumnRole::kLabel) label_col = c;
    }
    if (parse_label(row[label_col]) == Label::kNormal) kept.rows.push_back(row);
  }
  if (unlabeled) {
    std::cerr << "note: no label column assumed; treating all " << raw.rows.size()
              << " rows as normal\n";
  }
  if (kept.rows.empty()) throw DataError("no normal instances in " + path);

  TrainingSet set;
  set.total_rows = raw.rows.size();
  set.schema = build_schema(kept, hints);
  set.normals = extract_instances(kept, hints);

  auto& attrs = set.schema.mutable_attributes();
  if (!unlabeled && attrs.size() == nsl_kdd_feature_names().size()) {
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      attrs[i].name = nsl_kdd_feature_names()[i];
    }
  }
  return set;
}

std::vector<ItemSet> itemize_all(const std::vector<Instance>& instances,
                                 const AttributeSchema& schema) {
  std::vector<ItemSet> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(itemize(inst, schema));
  return out;
}

// Role layout for scoring-side files: label/difficulty columns by arity, all
// feature kinds taken from the model schema at itemization time.
KindHints scoring_hints(std::size_t columns, bool unlabeled) {
  KindHints hints;
  hints.roles.assign(columns, ColumnRole::kCategorical);
  if (unlabeled) return hints;
  if (columns == 43) {
    hints.roles[41] = ColumnRole::kLabel;
    hints.roles[42] = ColumnRole::kDropped;
  } else if (columns >= 2) {
    hints.roles[columns - 1] = ColumnRole::kLabel;
  } else {
    throw DataError("labeled table needs at least one feature column");
  }
  return hints;
}

struct TestSet {
  std::vector<Instance> instances;
  std::vector<ItemSet> items;
  std::vector<Label> labels;  // empty in unlabeled mode
};

TestSet load_test(const std::string& path, const AttributeSchema& schema, bool unlabeled) {
  const RawTable raw = read_csv(path);
  if (raw.rows.empty()) throw UsageError("test file is empty: " + path);
  std::size_t columns = raw.rows.front().size();
  const KindHints hints = scoring_hints(columns, unlabeled);
  TestSet set;
  set.instances = extract_instances(raw, hints);
  for (const auto& inst : set.instances) {
    if (inst.values.size() != schema.attribute_count()) {
      throw DataError("line " + std::to_string(inst.row) + ": expected " +
                      std::to_string(schema.attribute_count()) +
                      " feature columns per the model schema, found " +
                      std::to_string(inst.values.size()));
    }
  }
  set.items = itemize_all(set.instances, schema);
  if (!unlabeled) {
    set.labels.reserve(set.instances.size());
    for (const auto& inst : set.instances) set.labels.push_back(*inst.label);
  }
  return set;
}

// Lazy scoring re-reads the normal dataset. The file layout (labeled or not)
// is detected against the model schema's attribute count.
std::vector<ItemSet> load_normals_for_scoring(const std::string& path,
                                              const AttributeSchema& schema) {
  try {
    TrainingSet set = load_training(path, /*unlabeled=*/false);
    if (set.normals.front().values.size() == schema.attribute_count()) {
      return itemize_all(set.normals, schema);
    }
  } catch (const DataError&) {
    // fall through to the unlabeled layout
  }
  TrainingSet set = load_training(path, /*unlabeled=*/true);
  if (set.normals.front().values.size() != schema.attribute_count()) {
    throw DataError(path + ": rows have " +
                    std::to_string(set.normals.front().values.size()) +
                    " feature columns but the model schema has " +
                    std::to_string(schema.attribute_count()));
  }
  return itemize_all(set.normals, schema);
}

void print_verdicts(std::ostream& out, const std::vector<Verdict>& verdicts,
                    const std::vector<Instance>& instances,
                    const std::vector<Label>* labels) {
  out << "row\tml\tverdict";
  if (labels) out << "\tlabel";
  out << "\n";
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    out << instances[i].row << "\t" << format_length(verdicts[i].length_stat) << "\t"
        << (verdicts[i].label == Classification::kIntruder ? "intruder" : "normal");
    if (labels) {
      out << "\t" << ((*labels)[i] == Label::kAnomaly ? "anomaly" : "normal");
    }
    out << "\n";
  }
}

void print_metrics_block(std::ostream& out, const ConfusionCounts& c,
                         const MetricsReport& r, char sep) {
  out << "instances" << sep << c.total() << "\n";
  out << "TP" << sep << c.tp << "\n";
  out << "FP" << sep << c.fp << "\n";
  out << "TN" << sep << c.tn << "\n";
  out << "FN" << sep << c.fn << "\n";
  out << "FPR" << sep << format_metric(r.fpr, 2) << "\n";
  out << "TPR" << sep << format_metric(r.tpr, 2) << "\n";
  out << "precision" << sep << format_metric(r.precision, 2) << "\n";
  out << "recall" << sep << format_metric(r.recall, 2) << "\n";
  out << "f-score" << sep << format_metric(r.fscore, 2) << "\n";
  out << "accuracy" << sep << format_metric(r.accuracy, 2) << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

int cmd_train(const Options& opt) {
  TrainingSet set = load_training(opt.train_data, opt.unlabeled);
  std::cerr << "loaded " << set.total_rows << " rows, retained " << set.normals.size()
            << " normal instances\n";
  fit_discretizer(set.schema, set.normals, opt.bins);
  const auto items = itemize_all(set.normals, set.schema);
  std::cerr << "item universe: " << set.schema.item_universe_size() << " items over "
            << set.schema.attribute_count() << " attributes\n";

  const DetectorModel model = train(items, set.schema, hyper_params(opt), opt.threads,
                                    &std::cerr);
  save_model(model, opt.model_path);
  if (!opt.schema_path.empty()) save_schema(model.schema, opt.schema_path);

  std::cout << "kappa: " << format_length(model.cutoff) << "\n";
  std::map<double, std::size_t> histogram;
  for (const double v : model.training_lengths) ++histogram[v];
  std::cout << "training length statistics (k=" << model.training_lengths.size() << "):\n";
  for (const auto& [value, count] : histogram) {
    std::cout << "  " << format_length(value) << ": " << count << "\n";
  }
  std::cerr << "model written to " << opt.model_path << "\n";
  return 0;
}

int cmd_score(const Options& opt) {
  const DetectorModel model = load_model(opt.model_path);
  const auto normals = load_normals_for_scoring(opt.train_data, model.schema);
  const TestSet test = load_test(opt.test_data, model.schema, opt.unlabeled);
  const auto verdicts = score_dataset(test.items, normals, model, opt.threads, &std::cerr);
  if (opt.out.empty()) {
    print_verdicts(std::cout, verdicts, test.instances, nullptr);
  } else {
    auto out = open_out(opt.out);
    print_verdicts(out, verdicts, test.instances, nullptr);
    std::cerr << "verdicts written to " << opt.out << "\n";
  }
  return 0;
}

int cmd_evaluate(const Options& opt) {
  if (opt.unlabeled) {
    throw UsageError("evaluate needs ground-truth labels; use `score` for unlabeled data");
  }
  const DetectorModel model = load_model(opt.model_path);
  const auto normals = load_normals_for_scoring(opt.train_data, model.schema);
  const TestSet test = load_test(opt.test_data, model.schema, false);
  const auto verdicts = score_dataset(test.items, normals, model, opt.threads, &std::cerr);

  std::vector<Classification> predicted;
  predicted.reserve(verdicts.size());
  for (const auto& v : verdicts) predicted.push_back(v.label);
  const ConfusionCounts counts = confusion(predicted, test.labels);
  const MetricsReport report = metrics(counts);

  print_metrics_block(std::cout, counts, report, ' ');
  if (!opt.out.empty()) {
    auto verdict_file = open_out(opt.out + ".verdicts.tsv");
    print_verdicts(verdict_file, verdicts, test.instances, &test.labels);
    auto metrics_file = open_out(opt.out + ".metrics.tsv");
    print_metrics_block(metrics_file, counts, report, '\t');
    std::cerr << "reports written to " << opt.out << ".verdicts.tsv and " << opt.out
              << ".metrics.tsv\n";
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  const auto param = parse_sweep_param(opt.sweep_param);
  if (!param) throw UsageError("unknown sweep parameter '" + opt.sweep_param + "'");
  if (opt.sweep_values.empty()) throw UsageError("sweep needs at least one value");

  TrainingSet set = load_training(opt.train_data, false);
  std::cerr << "loaded " << set.total_rows << " rows, retained " << set.normals.size()
            << " normal instances\n";

  const RawTable test_raw = read_csv(opt.test_data);
  if (test_raw.rows.empty()) throw UsageError("test file is empty: " + opt.test_data);
  const KindHints hints = scoring_hints(test_raw.rows.front().size(), false);
  const auto test_instances = extract_instances(test_raw, hints);
  std::vector<Label> labels;
  labels.reserve(test_instances.size());
  for (const auto& inst : test_instances) labels.push_back(*inst.label);

  const auto rows = sweep(*param, opt.sweep_values, hyper_params(opt), opt.bins,
                          set.schema, set.normals, test_instances, labels, opt.threads,
                          &std::cerr);

  write_sweep_report(std::cout, sweep_param_name(*param), rows, '\t');
  if (!opt.out.empty()) {
    auto tsv = open_out(opt.out + ".tsv");
    write_sweep_report(tsv, sweep_param_name(*param), rows, '\t');
    auto csv = open_out(opt.out + ".csv");
    write_sweep_report(csv, sweep_param_name(*param), rows, ',');
    std::cerr << "reports written to " << opt.out << ".tsv and " << opt.out << ".csv\n";
  }
  return 0;
}

int cmd_explain(const Options& opt) {
  const DetectorModel model = load_model(opt.model_path);
  const auto normals = load_normals_for_scoring(opt.train_data, model.schema);
  const TestSet test = load_test(opt.test_data, model.schema, opt.unlabeled);
  for (const std::size_t row : opt.rows) {
    // rows are named as the verdict reports print them: 1-based source lines
    std::size_t index = test.instances.size();
    for (std::size_t i = 0; i < test.instances.size(); ++i) {
      if (test.instances[i].row == row) {
        index = i;
        break;
      }
    }
    if (index == test.instances.size()) {
      throw UsageError("row " + std::to_string(row) + " not found (test file has lines 1.." +
                       std::to_string(test.instances.empty() ? 0 : test.instances.back().row) +
                       ")");
    }
    const Explanation ex = explain_instance(test.items[index], normals, kNoExclusion,
                                            model.params, rng::Stream::kScoreMining, index);
    const Classification label = classify(ex.length_stat, model.cutoff, model.params.rule);
    std::cout << "row " << row << ": "
              << (label == Classification::kIntruder ? "intruder" : "normal")
              << " (ml=" << format_length(ex.length_stat)
              << ", kappa=" << format_length(model.cutoff) << ")\n";
    if (ex.indistinguishable) {
      std::cout << "  no jumping emerging patterns: indistinguishable from sampled normal"
                   " data\n";
      continue;
    }
    for (const auto& pattern : ex.patterns) {
      std::cout << "  " << render_pattern(pattern, model.schema) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-class anomaly detection by minimal length of jumping emerging patterns"};
  app.require_subcommand(1);
  Options opt;

  const auto add_params = [&](CLI::App* cmd) {
    cmd->add_option("--k", opt.k, "training probe count");
    cmd->add_option("--m", opt.m, "background sample size per mining call");
    cmd->add_option("--r", opt.r, "mining calls per instance");
    cmd->add_option("--p", opt.p, "cutoff percentile in (0,1]");
    cmd->add_option("--bins", opt.bins, "equi-width bins per numerical attribute");
    cmd->add_option("--seed", opt.seed, "master RNG seed");
    cmd->add_option("--statistic", opt.statistic, "length statistic")
        ->check(CLI::IsMember({"min", "mean"}));
    cmd->add_option("--rule", opt.rule, "cutoff comparison at ml == kappa")
        ->check(CLI::IsMember({"inclusive", "strict"}));
  };
  const auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", opt.threads, "worker threads");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "fit discretizer and cutoff");
  train_cmd->add_option("--train-data", opt.train_data, "training file")->required();
  train_cmd->add_option("--model", opt.model_path, "model file to write")->required();
  train_cmd->add_option("--schema", opt.schema_path, "schema sidecar file to write");
  train_cmd->add_flag("--unlabeled", opt.unlabeled, "treat every row as normal");
  add_params(train_cmd);
  add_threads(train_cmd);

  CLI::App* score_cmd = app.add_subcommand("score", "classify unlabeled instances");
  score_cmd->add_option("--model", opt.model_path, "model file")->required();
  score_cmd->add_option("--train-data", opt.train_data, "normal dataset (lazy scoring)")
      ->required();
  score_cmd->add_option("--test-data", opt.test_data, "instances to score")->required();
  score_cmd->add_option("--out", opt.out, "verdicts file (default: stdout)");
  score_cmd->add_flag("--unlabeled", opt.unlabeled, "test file has no label column");
  add_threads(score_cmd);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score labeled data and report metrics");
  eval_cmd->add_option("--model", opt.model_path, "model file")->required();
  eval_cmd->add_option("--train-data", opt.train_data, "normal dataset (lazy scoring)")
      ->required();
  eval_cmd->add_option("--test-data", opt.test_data, "labeled test file")->required();
  eval_cmd->add_option("--out", opt.out, "report file prefix");
  eval_cmd->add_flag("--unlabeled", opt.unlabeled,
                     "(rejected; evaluate needs ground truth)");
  add_threads(eval_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "train+evaluate over parameter values");
  sweep_cmd->add_option("--train-data", opt.train_data, "training file")->required();
  sweep_cmd->add_option("--test-data", opt.test_data, "labeled test file")->required();
  sweep_cmd->add_option("--param", opt.sweep_param, "one of k, m, r, p, bins")->required();
  sweep_cmd->add_option("--values", opt.sweep_values, "parameter values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", opt.out, "report file prefix");
  add_params(sweep_cmd);
  add_threads(sweep_cmd);

  CLI::App* explain_cmd = app.add_subcommand("explain", "show minimal patterns for rows");
  explain_cmd->add_option("--model", opt.model_path, "model file")->required();
  explain_cmd->add_option("--train-data", opt.train_data, "normal dataset (lazy scoring)")
      ->required();
  explain_cmd->add_option("--test-data", opt.test_data, "instances to explain")->required();
  explain_cmd->add_option("--row", opt.rows, "test row as printed in verdict reports (repeatable)")
      ->required()
      ->delimiter(',');
  explain_cmd->add_flag("--unlabeled", opt.unlabeled, "test file has no label column");
  add_threads(explain_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(opt);
    if (score_cmd->parsed()) return cmd_score(opt);
    if (eval_cmd->parsed()) return cmd_evaluate(opt);
    if (sweep_cmd->parsed()) return cmd_sweep(opt);
    if (explain_cmd->parsed()) return cmd_explain(opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
