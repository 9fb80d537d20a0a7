// End-to-end checks of the oclep binary: exit codes, reproducibility, and the
// shapes of the files it writes. Runs the real executable on toy data in a
// scratch directory.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

#define CHECK_MSG(cond, msg)                                                      \
  do {                                                                            \
    if (!(cond)) {                                                                \
      std::cerr << "FAIL at " << __LINE__ << ": " << msg << "\n";                 \
      ++failures;                                                                 \
    }                                                                             \
  } while (0)

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path g_dir;

RunResult run(const std::string& args) {
  const fs::path out_path = g_dir / "stdout.txt";
  const fs::path err_path = g_dir / "stderr.txt";
  const std::string cmd = std::string(OCLEP_BIN) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
#ifdef _WIN32
  r.code = status;
#else
  r.code = WEXITSTATUS(status);
#endif
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  g_dir = fs::temp_directory_path() / "oclep_cli_tests";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  const fs::path train_csv = g_dir / "train.csv";
  write_file(train_csv,
             "tcp,5,normal\n"
             "tcp,5,normal\n"
             "tcp,5,normal\n"
             "tcp,5,normal\n"
             "tcp,5,normal\n"
             "tcp,5,normal\n"
             "udp,9,teardrop\n"
             "udp,9,teardrop\n");
  const fs::path test_csv = g_dir / "test.csv";
  write_file(test_csv,
             "udp,5,anomaly\n"
             "tcp,5,anomaly\n"
             "tcp,5,normal\n");
  const fs::path model = g_dir / "toy.model";
  const fs::path schema = g_dir / "toy.schema";

  // --- train: anomalies filtered, kappa printed, schema sidecar written
  const std::string train_args = "train --train-data " + train_csv.string() + " --model " +
                                 model.string() + " --schema " + schema.string() +
                                 " --k 6 --m 5 --r 2 --p 0.95 --bins 4 --seed 7";
  {
    const RunResult r = run(train_args);
    CHECK_MSG(r.code == 0, "train exit code " << r.code << ": " << r.err);
    CHECK_MSG(r.out.find("kappa: inf") != std::string::npos,
              "expected sentinel cutoff on identical normals, got: " << r.out);
    CHECK_MSG(r.err.find("retained 6 normal instances") != std::string::npos,
              "anomaly rows should be filtered: " << r.err);
    CHECK_MSG(fs::exists(model), "model file missing");
    CHECK_MSG(fs::exists(schema), "schema file missing");
  }

  // --- byte-identical model on retrain
  {
    const std::string first = slurp(model);
    const RunResult r = run(train_args);
    CHECK_MSG(r.code == 0, "retrain failed");
    CHECK_MSG(slurp(model) == first, "model files differ across identical runs");
  }

  // --- evaluate: hand-computed confusion on forced verdicts
  const std::string eval_args = "evaluate --model " + model.string() + " --train-data " +
                                train_csv.string() + " --test-data " + test_csv.string() +
                                " --out " + (g_dir / "report").string();
  {
    const RunResult r = run(eval_args);
    CHECK_MSG(r.code == 0, "evaluate exit code " << r.code << ": " << r.err);
    CHECK_MSG(r.out.find("instances 3") != std::string::npos, "instance count: " << r.out);
    CHECK_MSG(r.out.find("TP 1") != std::string::npos, "TP: " << r.out);
    CHECK_MSG(r.out.find("FP 0") != std::string::npos, "FP: " << r.out);
    CHECK_MSG(r.out.find("TN 1") != std::string::npos, "TN: " << r.out);
    CHECK_MSG(r.out.find("FN 1") != std::string::npos, "FN: " << r.out);
    CHECK_MSG(r.out.find("precision 100.00") != std::string::npos, "precision: " << r.out);
    CHECK_MSG(r.out.find("recall 50.00") != std::string::npos, "recall: " << r.out);
    CHECK_MSG(fs::exists(g_dir / "report.verdicts.tsv"), "verdicts file missing");
    CHECK_MSG(fs::exists(g_dir / "report.metrics.tsv"), "metrics file missing");
    const std::string verdicts = slurp(g_dir / "report.verdicts.tsv");
    CHECK_MSG(verdicts.find("row\tml\tverdict\tlabel") == 0, "verdict header: " << verdicts);
    CHECK_MSG(verdicts.find("intruder") != std::string::npos, "no intruder verdict");

    const RunResult again = run(eval_args);
    CHECK_MSG(again.out == r.out, "evaluate output differs across identical runs");
  }

  // --- explain the unseen-protocol intruder
  {
    const RunResult r = run("explain --model " + model.string() + " --train-data " +
                            train_csv.string() + " --test-data " + test_csv.string() +
                            " --row 1,3");
    CHECK_MSG(r.code == 0, "explain exit code " << r.code << ": " << r.err);
    CHECK_MSG(r.out.find("intruder") != std::string::npos, "explain verdict: " << r.out);
    CHECK_MSG(r.out.find("<unseen>") != std::string::npos,
              "unseen condition not rendered: " << r.out);
    CHECK_MSG(r.out.find("indistinguishable") != std::string::npos,
              "sentinel explanation missing: " << r.out);
  }

  // --- score without labels
  const fs::path raw_csv = g_dir / "raw.csv";
  write_file(raw_csv, "udp,5\ntcp,5\n");
  {
    const RunResult r = run("score --model " + model.string() + " --train-data " +
                            train_csv.string() + " --test-data " + raw_csv.string() +
                            " --unlabeled --out " + (g_dir / "scores.tsv").string());
    CHECK_MSG(r.code == 0, "score exit code " << r.code << ": " << r.err);
    const std::string scores = slurp(g_dir / "scores.tsv");
    CHECK_MSG(scores.find("row\tml\tverdict") == 0, "score header: " << scores);
    CHECK_MSG(scores.find("intruder") != std::string::npos, "no intruder in scores");
  }

  // --- unlabeled training data, and scoring against it
  {
    const fs::path unlabeled_csv = g_dir / "unlabeled.csv";
    write_file(unlabeled_csv, "tcp,5\ntcp,5\ntcp,6\nudp,5\n");
    const RunResult r = run("train --train-data " + unlabeled_csv.string() + " --model " +
                            (g_dir / "u.model").string() +
                            " --unlabeled --k 4 --m 3 --r 1");
    CHECK_MSG(r.code == 0, "unlabeled train exit code " << r.code << ": " << r.err);
    CHECK_MSG(r.err.find("treating all 4 rows as normal") != std::string::npos,
              "unlabeled notice missing: " << r.err);

    const RunResult s = run("score --model " + (g_dir / "u.model").string() +
                            " --train-data " + unlabeled_csv.string() + " --test-data " +
                            raw_csv.string() + " --unlabeled");
    CHECK_MSG(s.code == 0,
              "scoring an unlabeled-trained model failed: " << s.code << ": " << s.err);
    CHECK_MSG(s.out.find("verdict") != std::string::npos, "score output: " << s.out);
  }

  // --- sweep over r
  {
    const RunResult r = run("sweep --train-data " + train_csv.string() + " --test-data " +
                            test_csv.string() +
                            " --param r --values 1,2 --k 6 --m 5 --bins 4 --seed 7" +
                            " --out " + (g_dir / "sweep").string());
    CHECK_MSG(r.code == 0, "sweep exit code " << r.code << ": " << r.err);
    CHECK_MSG(r.out.find("r\tTP\tFP\tTN\tFN\tFPR\tTPR\tPrec\tReca\tFscore\tAccu") == 0,
              "sweep header: " << r.out);
    CHECK_MSG(fs::exists(g_dir / "sweep.tsv"), "sweep tsv missing");
    CHECK_MSG(fs::exists(g_dir / "sweep.csv"), "sweep csv missing");
  }

  // --- exit codes
  {
    CHECK_MSG(run("train --train-data " + (g_dir / "missing.csv").string() + " --model " +
                  (g_dir / "x.model").string())
                      .code == 2,
              "missing training file should be a data error");

    const fs::path all_attacks = g_dir / "attacks.csv";
    write_file(all_attacks, "udp,9,teardrop\nudp,8,teardrop\n");
    CHECK_MSG(run("train --train-data " + all_attacks.string() + " --model " +
                  (g_dir / "x.model").string())
                      .code == 2,
              "zero normal instances should be a data error");

    CHECK_MSG(run("evaluate --model " + model.string() + " --train-data " +
                  train_csv.string() + " --test-data " + test_csv.string() + " --unlabeled")
                      .code == 1,
              "evaluate --unlabeled should be a usage error");

    const fs::path empty_csv = g_dir / "empty.csv";
    write_file(empty_csv, "");
    CHECK_MSG(run("evaluate --model " + model.string() + " --train-data " +
                  train_csv.string() + " --test-data " + empty_csv.string())
                      .code == 1,
              "empty test file should be a usage error");

    CHECK_MSG(run("train --no-such-flag").code == 1, "bad flag should be a usage error");
    CHECK_MSG(run("score --model " + model.string()).code == 1,
              "missing required options should be a usage error");

    const fs::path ragged = g_dir / "ragged.csv";
    write_file(ragged, "tcp,5,normal\ntcp,normal\n");
    CHECK_MSG(run("train --train-data " + ragged.string() + " --model " +
                  (g_dir / "x.model").string())
                      .code == 2,
              "ragged rows should be a data error");
  }

  if (failures == 0) {
    std::cout << "cli_tests: all checks passed\n";
    fs::remove_all(g_dir);
    return 0;
  }
  std::cerr << "cli_tests: " << failures << " failures (scratch kept at " << g_dir << ")\n";
  return 1;
}
