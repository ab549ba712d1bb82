#include "nctc/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "nctc/bench.hpp"
#include "nctc/data.hpp"
#include "nctc/diagnostics.hpp"
#include "nctc/errors.hpp"
#include "nctc/gradcheck.hpp"
#include "nctc/model_io.hpp"
#include "nctc/optimizer.hpp"

namespace nctc::cli {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    return s;
  }
  std::string q = "\"";
  for (char c : s) {
    q += c;
    if (c == '"') {
      q += '"';
    }
  }
  return q + "\"";
}

EmbeddingTable load_table_for(const Model& model, const std::string& path, std::ostream& err) {
  EmbeddingTable table = load_embeddings(path, err);
  if (table.dim() != model.config.word_dim) {
    throw ShapeError("embedding dimension " + std::to_string(table.dim()) +
                     " does not match the model's word dimension " +
                     std::to_string(model.config.word_dim));
  }
  return table;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string train_path;
  std::string dev_path;
  std::string embeddings_path;
  std::vector<std::string> labels;
  std::string out_path;
  std::string log_path;
  ModelConfig model;
  TrainConfig train;
};

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const EmbeddingTable table = load_embeddings(o.embeddings_path, err);
  const Dataset train_ds = load_dataset(o.train_path, o.labels, err);
  if (train_ds.examples.empty()) {
    throw DataError("training file " + o.train_path + " has no examples");
  }
  Dataset dev_ds;
  if (!o.dev_path.empty()) {
    dev_ds = load_dataset(o.dev_path, o.labels, err);
  }
  const auto train_set = encode(train_ds, table);
  const auto dev_set = encode(dev_ds, table);

  ModelConfig mc = o.model;
  mc.labels = o.labels;
  mc.word_dim = table.dim();
  Rng init_rng(o.train.seed);
  Model model = init_model(mc, init_rng);

  std::ofstream log_file;
  std::ostream* log = &out;
  if (!o.log_path.empty()) {
    log_file.open(o.log_path);
    if (!log_file) {
      throw std::runtime_error("cannot write " + o.log_path);
    }
    log = &log_file;
  }
  *log << "epoch\ttrain_loss\ttrain_acc\tdev_acc\tseconds\n";
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochStats& s) {
    *log << s.epoch << '\t' << full(s.train_loss) << '\t' << fixed(s.train_accuracy, 4) << '\t'
         << (dev_set.empty() ? std::string("nan") : fixed(s.dev_accuracy, 4)) << '\t'
         << fixed(s.seconds, 3) << '\n';
    log->flush();
  };
  const TrainResult result = train(model, train_set, dev_set, o.train, cb);
  save_model(result.best_model, o.out_path);
  err << "saved epoch " << result.best_epoch << " model to " << o.out_path << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

struct ModelInputOptions {
  std::string model_path;
  std::string embeddings_path;
};

int cmd_eval(const ModelInputOptions& mo, const std::string& data_path, std::ostream& out,
             std::ostream& err) {
  const Model model = load_model(mo.model_path);
  const EmbeddingTable table = load_table_for(model, mo.embeddings_path, err);
  const Dataset ds = load_dataset(data_path, model.config.labels, err);
  if (ds.examples.empty()) {
    throw DataError("evaluation file " + data_path + " has no examples");
  }
  const Index m = model.config.label_count();
  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(m, m);
  for (const auto& ex : ds.examples) {
    confusion(ex.label, predict(model, embed(ex.tokens, table))) += 1;
  }
  const double acc = static_cast<double>(confusion.trace()) / static_cast<double>(ds.examples.size());
  out << "examples\t" << ds.examples.size() << '\n';
  out << "accuracy\t" << fixed(acc, 4) << '\n';
  out << "confusion (rows: gold, columns: predicted)\n";
  for (const auto& l : model.config.labels) {
    out << '\t' << l;
  }
  out << '\n';
  for (Index g = 0; g < m; ++g) {
    out << model.config.labels[g];
    for (Index p = 0; p < m; ++p) {
      out << '\t' << confusion(g, p);
    }
    out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- predict

Sequence embed_line(const std::string& line, const EmbeddingTable& table) {
  auto tokens = split_tokens(line);
  if (tokens.empty()) {
    return Sequence::Zero(1, table.dim());
  }
  return embed(tokens, table);
}

int cmd_predict(const ModelInputOptions& mo, std::istream& in, std::ostream& out,
                std::ostream& err) {
  const Model model = load_model(mo.model_path);
  const EmbeddingTable table = load_table_for(model, mo.embeddings_path, err);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    out << model.config.labels[predict(model, embed_line(line, table))] << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- score-positions

int cmd_score_positions(const ModelInputOptions& mo, const std::vector<double>& scores,
                        const std::string& input_path, std::istream& in, std::ostream& out,
                        std::ostream& err) {
  const Model model = load_model(mo.model_path);
  const Index m = model.config.label_count();
  if (static_cast<Index>(scores.size()) != m) {
    throw InvalidArgument("--scores has " + std::to_string(scores.size()) +
                          " values but the model has " + std::to_string(m) + " labels");
  }
  const EmbeddingTable table = load_table_for(model, mo.embeddings_path, err);
  const Eigen::VectorXd score_values =
      Eigen::Map<const Eigen::VectorXd>(scores.data(), static_cast<Index>(scores.size()));

  std::ifstream file;
  std::istream* src = &in;
  if (!input_path.empty()) {
    file.open(input_path);
    if (!file) {
      throw std::runtime_error("cannot open " + input_path);
    }
    src = &file;
  }

  out << "line_id,position,token";
  for (Index l = 1; l <= m; ++l) {
    out << ",p_" << l;
  }
  out << ",expected_score\n";

  std::string line;
  std::size_t line_id = 0;
  while (std::getline(*src, line)) {
    ++line_id;
    const auto tokens = split_tokens(line);
    if (tokens.empty()) {
      continue;
    }
    const Eigen::MatrixXd table_rows =
        per_position_scores(model, embed(tokens, table), score_values);
    for (Index k = 0; k < table_rows.rows(); ++k) {
      out << line_id << ',' << (k + 1) << ',' << csv_field(tokens[k]);
      for (Index c = 0; c <= m; ++c) {
        out << ',' << full(table_rows(k, c));
      }
      out << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradcheckSetup& setup, double epsilon, double tolerance,
                  std::ostream& out) {
  const GradcheckReport report = random_gradient_check(setup, epsilon, tolerance);
  out << "tensor\tcoordinates\tmax_rel_error\tmax_abs_error\tstatus\n";
  for (const auto& t : report.tensors) {
    out << t.name << '\t' << t.coordinates << '\t' << sci(t.max_rel_error) << '\t'
        << sci(t.max_abs_error) << '\t' << (t.max_rel_error < tolerance ? "ok" : "FAIL") << '\n';
  }
  out << "result\t" << (report.pass ? "PASS" : "FAIL") << "\tmax_rel_error "
      << sci(report.max_rel_error()) << " tolerance " << sci(tolerance) << " epsilon "
      << sci(epsilon) << '\n';
  return report.pass ? 0 : 1;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const BenchSetup& setup, std::ostream& out) {
  const auto rows = run_bench(setup);
  out << "length\tforward_ms\tforward_backward_ms\toracle_ms\n";
  for (const auto& r : rows) {
    out << r.length << '\t' << fixed(r.forward_ms, 4) << '\t' << fixed(r.forward_backward_ms, 4)
        << '\t' << (r.oracle_ms ? fixed(*r.oracle_ms, 4) : std::string("-")) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseOptions {
  std::size_t dp_count = 500;
  std::size_t init_samples = 100'000;
  Index init_dim = 50;
  Index init_hidden = 50;
  std::uint64_t seed = 1;
  bool json = false;
};

int cmd_diagnose(const DiagnoseOptions& o, std::ostream& out) {
  const auto dp = diag::check_dp_equivalence(o.dp_count, o.seed);
  const auto init = diag::check_init_variance(o.init_dim, o.init_hidden, o.init_samples, o.seed);
  if (o.json) {
    out << dp.json() << '\n' << init.json() << '\n';
  } else {
    out << dp.text() << '\n' << init.text() << '\n';
  }
  return dp.pass && init.pass ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Non-consecutive n-gram tensor convolution text classifier"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train a model and save the best-dev checkpoint");
  train_cmd->add_option("--train", train_opts.train_path, "Training TSV (label<TAB>tokens)")
      ->required();
  train_cmd->add_option("--dev", train_opts.dev_path, "Dev TSV used for checkpoint selection");
  train_cmd->add_option("--embeddings", train_opts.embeddings_path, "Word vector text file")
      ->required();
  train_cmd->add_option("--labels", train_opts.labels, "Comma-separated label names")
      ->required()
      ->delimiter(',');
  train_cmd->add_option("--layers", train_opts.model.layers, "Stacked feature layers")
      ->default_val(1);
  train_cmd->add_option("--order", train_opts.model.order, "n-gram order")->default_val(3);
  train_cmd->add_option("--hidden", train_opts.model.hidden, "Feature dimension h")
      ->default_val(100);
  train_cmd->add_option("--decay", train_opts.model.decay, "Gap decay in [0,1)")
      ->default_val(0.5);
  train_cmd->add_option("--dropout", train_opts.model.dropout, "Dropout probability")
      ->default_val(0.0);
  train_cmd->add_option("--lr", train_opts.train.learning_rate, "AdaGrad learning rate")
      ->default_val(0.01);
  train_cmd->add_option("--l2", train_opts.train.l2_weight, "L2 weight")->default_val(1e-5);
  train_cmd->add_option("--epochs", train_opts.train.epochs, "Training epochs")->default_val(10);
  train_cmd->add_option("--seed", train_opts.train.seed, "Random seed")->default_val(1);
  train_cmd->add_option("--batch", train_opts.train.batch_size, "Examples per update")
      ->default_val(1);
  train_cmd->add_option("--out", train_opts.out_path, "Model output path")->required();
  train_cmd->add_option("--log", train_opts.log_path, "Epoch log path (default: stdout)");

  ModelInputOptions model_opts;
  std::string data_path;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and confusion matrix on a labeled file");
  eval_cmd->add_option("--model", model_opts.model_path)->required();
  eval_cmd->add_option("--embeddings", model_opts.embeddings_path)->required();
  eval_cmd->add_option("--data", data_path)->required();

  auto* predict_cmd = app.add_subcommand("predict", "Label each pre-tokenized line on stdin");
  predict_cmd->add_option("--model", model_opts.model_path)->required();
  predict_cmd->add_option("--embeddings", model_opts.embeddings_path)->required();

  std::vector<double> scores;
  std::string score_input;
  auto* score_cmd =
      app.add_subcommand("score-positions", "Per-position label probabilities as CSV");
  score_cmd->add_option("--model", model_opts.model_path)->required();
  score_cmd->add_option("--embeddings", model_opts.embeddings_path)->required();
  score_cmd->add_option("--scores", scores, "Comma-separated score per label, e.g. -2,-1,0,1,2")
      ->required()
      ->delimiter(',')
      ->allow_extra_args(false);
  score_cmd->add_option("--input", score_input, "Input file (default: stdin)");

  GradcheckSetup gc;
  double gc_epsilon = 1e-5;
  double gc_tolerance = 1e-4;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  grad_cmd->add_option("--layers", gc.layers)->default_val(2);
  grad_cmd->add_option("--order", gc.order)->default_val(3);
  grad_cmd->add_option("--hidden", gc.hidden)->default_val(5);
  grad_cmd->add_option("--word-dim", gc.word_dim)->default_val(4);
  grad_cmd->add_option("--length", gc.length)->default_val(6);
  grad_cmd->add_option("--labels", gc.labels, "Number of labels")->default_val(3);
  grad_cmd->add_option("--decay", gc.decay)->default_val(0.5);
  grad_cmd->add_option("--dropout", gc.dropout)->default_val(0.0);
  grad_cmd->add_option("--seed", gc.seed)->default_val(1);
  grad_cmd->add_option("--epsilon", gc_epsilon)->default_val(1e-5);
  grad_cmd->add_option("--tolerance", gc_tolerance)->default_val(1e-4);

  BenchSetup bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time forward/backward against sequence length");
  bench_cmd->add_option("--lengths", bench.lengths)->delimiter(',');
  bench_cmd->add_option("--hidden", bench.hidden)->default_val(100);
  bench_cmd->add_option("--word-dim", bench.word_dim)->default_val(50);
  bench_cmd->add_option("--order", bench.order)->default_val(3);
  bench_cmd->add_option("--decay", bench.decay)->default_val(0.5);
  bench_cmd->add_option("--trials", bench.trials)->default_val(5);
  bench_cmd->add_option("--oracle-max", bench.oracle_max_length)->default_val(32);
  bench_cmd->add_option("--seed", bench.seed)->default_val(1);

  DiagnoseOptions diag_opts;
  auto* diag_cmd = app.add_subcommand("diagnose", "DP-vs-enumeration and initialization checks");
  diag_cmd->add_option("--dp-count", diag_opts.dp_count)->default_val(500);
  diag_cmd->add_option("--init-samples", diag_opts.init_samples)->default_val(100000);
  diag_cmd->add_option("--init-dim", diag_opts.init_dim)->default_val(50);
  diag_cmd->add_option("--init-hidden", diag_opts.init_hidden)->default_val(50);
  diag_cmd->add_option("--seed", diag_opts.seed)->default_val(1);
  diag_cmd->add_flag("--json", diag_opts.json, "Emit JSON summaries");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) {
      return cmd_train(train_opts, out, err);
    }
    if (*eval_cmd) {
      return cmd_eval(model_opts, data_path, out, err);
    }
    if (*predict_cmd) {
      return cmd_predict(model_opts, in, out, err);
    }
    if (*score_cmd) {
      return cmd_score_positions(model_opts, scores, score_input, in, out, err);
    }
    if (*grad_cmd) {
      return cmd_gradcheck(gc, gc_epsilon, gc_tolerance, out);
    }
    if (*bench_cmd) {
      return cmd_bench(bench, out);
    }
    if (*diag_cmd) {
      return cmd_diagnose(diag_opts, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace nctc::cli
