// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// mandatory criteria pass. Thresholds are fixed here and never tuned at run
// time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nctc/cli.hpp"
#include "nctc/data.hpp"
#include "nctc/diagnostics.hpp"
#include "nctc/model_io.hpp"
#include "nctc/optimizer.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace {

using namespace nctc;
using Clock = std::chrono::steady_clock;

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome = Outcome::Fail;
  std::string detail;
};

Verdict verdict(bool ok, std::string detail) {
  return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nctc");
  std::istringstream in;
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str()};
}

std::vector<std::vector<std::string>> tsv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    rows.push_back(split_tokens(line));
  }
  return rows;
}

// ------------------------------------------------------------------ criteria

Verdict oracle_equivalence() {
  const auto start = Clock::now();
  const auto report = diag::check_dp_equivalence(500, 2024);
  const double secs = seconds_since(start);
  return verdict(report.pass && report.max_abs_dev < 1e-9 && secs < 10.0,
                 fmt("500 instances, max |dp - enumeration| = %.3e (< 1e-9), %.2f s (< 10 s), "
                     "worst seed %llu",
                     report.max_abs_dev, secs,
                     static_cast<unsigned long long>(report.worst_seed)));
}

Verdict full_tensor_consistency() {
  Rng rng(77);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto params = init_layer(2, 2, 3, rng);
    std::vector<Eigen::VectorXd> words;
    for (int m = 0; m < 3; ++m) {
      words.emplace_back(Eigen::Vector2d(unit(rng), unit(rng)));
    }
    const auto full = diag::contract(diag::materialize_full_tensor(params), words);
    const auto factored = diag::factored_ngram(params, words);
    worst = std::max(worst, (full - factored).cwiseAbs().maxCoeff());
  }
  return verdict(worst < 1e-12,
                 fmt("50 instances (d=2, h=2, n=3), max |full - factored| = %.3e (< 1e-12)",
                     worst));
}

Verdict gradient_exactness() {
  const auto start = Clock::now();
  const auto r = run_cli({"gradcheck", "--layers", "2", "--order", "3", "--hidden", "5",
                          "--word-dim", "4", "--length", "6", "--epsilon", "1e-5",
                          "--tolerance", "1e-4", "--seed", "1"});
  const double secs = seconds_since(start);
  const auto rows = tsv_rows(r.out);
  // header + 11 tensors + summary
  bool all_below = rows.size() == 13;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double rel = std::stod(rows[i].at(2));
    worst = std::max(worst, rel);
    all_below = all_below && rel < 1e-4;
  }
  return verdict(r.code == 0 && all_below && secs < 30.0,
                 fmt("%zu tensors, max relative error %.3e (< 1e-4, eps 1e-5), %.2f s (< 30 s)",
                     rows.size() >= 2 ? rows.size() - 2 : 0, worst, secs));
}

Verdict overfit_sanity() {
  // 40 sequences of random filler words with balanced random labels: the
  // only way to fit is to memorize.
  Rng rng(40);
  const Index dim = 50;
  const auto table = testing::random_vocabulary(200, dim, rng);
  Dataset ds;
  ds.label_names = {"zero", "one"};
  std::uniform_int_distribution<int> word(0, 199), len(4, 12);
  for (int i = 0; i < 40; ++i) {
    Example ex;
    ex.label = i % 2;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) {
      ex.tokens.push_back("w" + std::to_string(word(rng)));
    }
    ds.examples.push_back(std::move(ex));
  }
  const auto data = encode(ds, table);

  ModelConfig mc;
  mc.layers = 1;
  mc.order = 2;
  mc.hidden = 50;
  mc.decay = 0.3;
  mc.dropout = 0.0;
  mc.word_dim = dim;
  mc.labels = ds.label_names;
  Model model = init_model(mc, rng);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.l2_weight = 1e-5;
  tc.epochs = 300;
  tc.seed = 40;

  int first_perfect = 0;
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochStats& s) {
    if (first_perfect == 0 && s.train_accuracy == 1.0) {
      first_perfect = s.epoch;
    }
  };
  const auto start = Clock::now();
  train(model, data, {}, tc, cb);
  const double secs = seconds_since(start);
  return verdict(first_perfect > 0 && secs < 60.0,
                 fmt("100%% training accuracy first reached at epoch %d (<= 300), %.2f s (< 60 s)",
                     first_perfect, secs));
}

double pair_task_accuracy(double decay) {
  Rng rng(5);
  const Index dim = 20;
  const int filler = 20;
  const Index length = 12;
  const auto table = testing::random_vocabulary(filler, dim, rng, {"A", "B"});
  const auto train_set = encode(testing::gapped_pair_dataset(1000, filler, length, rng), table);
  const auto test_set = encode(testing::gapped_pair_dataset(400, filler, length, rng), table);

  ModelConfig mc;
  mc.layers = 1;
  mc.order = 3;
  mc.hidden = 20;
  mc.decay = decay;
  mc.word_dim = dim;
  mc.labels = {"absent", "present"};
  Model model = init_model(mc, rng);
  TrainConfig tc;
  tc.learning_rate = 0.05;
  tc.l2_weight = 1e-5;
  tc.epochs = 20;
  tc.seed = 3;
  train(model, train_set, {}, tc);
  return evaluate(model, test_set).accuracy;
}

Verdict pattern_separation() {
  const auto start = Clock::now();
  const double gappy = pair_task_accuracy(0.5);
  const double consecutive = pair_task_accuracy(0.0);
  return verdict(gappy >= 0.95 && consecutive <= 0.65,
                 fmt("held-out accuracy: decay 0.5 = %.4f (>= 0.95), decay 0 = %.4f (<= 0.65), "
                     "%.1f s",
                     gappy, consecutive, seconds_since(start)));
}

Verdict linear_scaling() {
  const auto r = run_cli({"bench", "--lengths", "8,16,1000,2000", "--hidden", "100", "--order",
                          "3", "--trials", "7", "--oracle-max", "16"});
  const auto rows = tsv_rows(r.out);
  if (r.code != 0 || rows.size() != 5) {
    return verdict(false, "bench did not produce 4 rows");
  }
  const double oracle8 = std::stod(rows[1][3]);
  const double oracle16 = std::stod(rows[2][3]);
  const double fwd1000 = std::stod(rows[3][1]);
  const double fwd2000 = std::stod(rows[4][1]);
  const double fwd_ratio = fwd2000 / fwd1000;
  const double oracle_ratio = oracle16 / oracle8;
  return verdict(fwd_ratio <= 3.0 && oracle_ratio >= 4.0,
                 fmt("forward L=2000/L=1000 = %.2f (<= 3; %.2f ms vs %.2f ms), enumeration "
                     "L=16/L=8 = %.2f (>= 4)",
                     fwd_ratio, fwd2000, fwd1000, oracle_ratio));
}

Verdict init_statistics() {
  const auto r = diag::check_init_variance(50, 50, 100'000, 9);
  return verdict(r.pass && r.estimate >= 0.9 && r.estimate <= 1.1,
                 fmt("E|P_i x Q_i x R_i x O_i|^2 estimate %.4f +- %.4f over 1e5 slices "
                     "(in [0.9, 1.1])",
                     r.estimate, r.std_error));
}

Verdict determinism_and_persistence() {
  Rng rng(8);
  const auto table = testing::random_vocabulary(15, 8, rng, {"pos", "neg"});
  const auto data = encode(testing::keyword_dataset(60, 15, 7, rng), table);

  auto run = [&] {
    ModelConfig mc;
    mc.layers = 2;
    mc.order = 3;
    mc.hidden = 10;
    mc.decay = 0.5;
    mc.dropout = 0.3;
    mc.word_dim = 8;
    mc.labels = {"zero", "one"};
    Rng init_rng(11);
    Model model = init_model(mc, init_rng);
    TrainConfig tc;
    tc.epochs = 5;
    tc.seed = 12;
    const auto result = train(model, data, {}, tc);
    std::vector<double> losses;
    for (const auto& e : result.epochs) {
      losses.push_back(e.train_loss);
    }
    return std::make_pair(losses, model);
  };
  const auto [loss_a, model_a] = run();
  const auto [loss_b, model_b] = run();
  double loss_dev = 0.0;
  for (std::size_t i = 0; i < loss_a.size(); ++i) {
    loss_dev = std::max(loss_dev, std::abs(loss_a[i] - loss_b[i]));
  }
  const bool same_len = loss_a.size() == 5 && loss_b.size() == 5;

  testing::TempDir dir;
  save_model(model_a, dir / "first.txt");
  save_model(load_model(dir / "first.txt"), dir / "second.txt");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string first = slurp(dir / "first.txt");
  const std::string second = slurp(dir / "second.txt");
  const bool identical = !first.empty() && first == second;
  return verdict(same_len && loss_dev <= 1e-12 && identical,
                 fmt("epoch-loss max deviation across reruns %.3e (<= 1e-12); "
                     "save->load->save %s (%zu bytes)",
                     loss_dev, identical ? "byte-identical" : "DIFFERS", first.size()));
}

// Needs external data: NCTC_SST_DIR with train.tsv/dev.tsv/test.tsv (five
// fine-grained labels 0..4) and NCTC_GLOVE pointing at 300-d GloVe vectors.
Verdict benchmark_reproduction() {
  const char* sst = std::getenv("NCTC_SST_DIR");
  const char* glove = std::getenv("NCTC_GLOVE");
  if (sst == nullptr || glove == nullptr) {
    return {Outcome::Skip, "optional; set NCTC_SST_DIR and NCTC_GLOVE to run"};
  }
  const std::filesystem::path dir(sst);
  const std::vector<std::string> labels{"0", "1", "2", "3", "4"};
  std::ostringstream warn;
  const auto table = load_embeddings(glove, warn);
  const auto train_set = encode(load_dataset(dir / "train.tsv", labels, warn), table);
  const auto dev_set = encode(load_dataset(dir / "dev.tsv", labels, warn), table);
  const auto test_set = encode(load_dataset(dir / "test.tsv", labels, warn), table);

  ModelConfig mc;
  mc.layers = 3;
  mc.order = 3;
  mc.hidden = 200;
  mc.decay = 0.5;
  mc.dropout = 0.5;
  mc.word_dim = table.dim();
  mc.labels = labels;
  Rng rng(1);
  Model model = init_model(mc, rng);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.l2_weight = 1e-5;
  tc.epochs = 10;
  const auto result = train(model, train_set, dev_set, tc);
  const double acc = evaluate(result.best_model, test_set).accuracy;
  const double epoch_secs = result.epochs.front().seconds;
  return verdict(std::abs(acc - 0.506) <= 0.015,
                 fmt("fine-grained test accuracy %.4f (50.6%% +- 1.5), %.0f s per epoch", acc,
                     epoch_secs));
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
    bool optional;
  };
  const std::vector<Criterion> criteria{
      {"oracle-equivalence", oracle_equivalence, false},
      {"full-tensor-consistency", full_tensor_consistency, false},
      {"gradient-exactness", gradient_exactness, false},
      {"overfit-sanity", overfit_sanity, false},
      {"non-consecutive-pattern-separation", pattern_separation, false},
      {"linear-time-scaling", linear_scaling, false},
      {"initialization-statistics", init_statistics, false},
      {"determinism-and-persistence", determinism_and_persistence, false},
      {"benchmark-reproduction", benchmark_reproduction, true},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Skip ? "SKIP"
                                                                                       : "FAIL";
    std::cout << "[" << tag << "] " << c.name << (c.optional ? " (optional)" : "") << ": "
              << v.detail << std::endl;
    if (v.outcome == Outcome::Fail && !c.optional) {
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "acceptance: all mandatory criteria passed"
                              : "acceptance: " + std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
