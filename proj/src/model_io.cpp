#include "nctc/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nctc/data.hpp"
#include "nctc/errors.hpp"

namespace nctc {

namespace {

constexpr const char* kFormatTag = "NCTC/1";

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_tensor(std::ostream& out, const std::string& name, const double* data, Index rows,
                  Index cols) {
  out << "tensor " << name << ' ' << rows << ' ' << cols << '\n';
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      out << (c ? " " : "") << fmt17(data[r * cols + c]);
    }
    out << '\n';
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) {
      fail("unexpected end of file");
    }
    ++line_no_;
    if (!s.empty() && s.back() == '\r') {
      s.pop_back();
    }
    return s;
  }

  /// Reads "<key> <value...>" and returns the value part.
  std::string field(const std::string& key) {
    const std::string s = line();
    if (s.rfind(key + " ", 0) != 0) {
      fail("expected '" + key + "'");
    }
    return s.substr(key.size() + 1);
  }

  long long integer(const std::string& key) {
    const std::string v = field(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail("bad integer for '" + key + "'");
    }
    return out;
  }

  double real(std::string_view s) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail("bad number '" + std::string(s) + "'");
    }
    return out;
  }

  /// Row-major payload of a "tensor" block with the expected name and shape.
  void tensor(const std::string& name, Index rows, Index cols, double* dst) {
    const auto head = split_tokens(line());
    if (head.size() != 4 || head[0] != "tensor" || head[1] != name) {
      fail("expected tensor '" + name + "'");
    }
    if (head[2] != std::to_string(rows) || head[3] != std::to_string(cols)) {
      fail("tensor '" + name + "' declared " + head[2] + "x" + head[3] + ", expected " +
           std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (Index r = 0; r < rows; ++r) {
      const auto values = split_tokens(line());
      if (static_cast<Index>(values.size()) != cols) {
        fail("tensor '" + name + "' row has " + std::to_string(values.size()) + " values");
      }
      for (Index c = 0; c < cols; ++c) {
        dst[r * cols + c] = real(values[c]);
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model file line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

void write_model(const Model& model, std::ostream& out) {
  model.validate();
  const auto& c = model.config;
  out << kFormatTag << '\n';
  out << "layers " << c.layers << '\n';
  out << "order " << c.order << '\n';
  out << "hidden " << c.hidden << '\n';
  out << "word_dim " << c.word_dim << '\n';
  out << "decay " << fmt17(c.decay) << '\n';
  out << "dropout " << fmt17(c.dropout) << '\n';
  out << "labels " << c.labels.size() << '\n';
  for (const auto& l : c.labels) {
    out << "label " << l << '\n';
  }
  const auto names = tensor_names(c);
  std::size_t k = 0;
  for (const auto& layer : model.layers) {
    for (const auto& u : layer.slots) {
      const RowMajor r = u;
      write_tensor(out, names[k++], r.data(), r.rows(), r.cols());
    }
    const RowMajor o = layer.output;
    write_tensor(out, names[k++], o.data(), o.rows(), o.cols());
    write_tensor(out, names[k++], layer.bias.data(), 1, layer.bias.size());
  }
  const RowMajor w = model.classifier;
  write_tensor(out, names[k++], w.data(), w.rows(), w.cols());
  out << "end\n";
}

Model read_model(std::istream& in) {
  Reader r(in);
  if (r.line() != kFormatTag) {
    r.fail(std::string("missing format tag ") + kFormatTag);
  }
  ModelConfig c;
  c.layers = static_cast<int>(r.integer("layers"));
  c.order = static_cast<int>(r.integer("order"));
  c.hidden = r.integer("hidden");
  c.word_dim = r.integer("word_dim");
  c.decay = r.real(r.field("decay"));
  c.dropout = r.real(r.field("dropout"));
  const long long label_count = r.integer("labels");
  if (label_count < 0 || label_count > 1'000'000) {
    r.fail("implausible label count");
  }
  for (long long i = 0; i < label_count; ++i) {
    c.labels.push_back(r.field("label"));
  }
  try {
    c.validate();
  } catch (const std::exception& e) {
    r.fail(e.what());
  }

  const auto names = tensor_names(c);
  std::size_t k = 0;
  Model model;
  model.config = c;
  for (int t = 0; t < c.layers; ++t) {
    const Index in_dim = t == 0 ? c.word_dim : c.hidden;
    LayerParams p;
    for (int m = 0; m < c.order; ++m) {
      RowMajor u(c.hidden, in_dim);
      r.tensor(names[k++], u.rows(), u.cols(), u.data());
      p.slots.emplace_back(u);
    }
    RowMajor o(c.hidden, c.hidden);
    r.tensor(names[k++], o.rows(), o.cols(), o.data());
    p.output = o;
    p.bias.resize(c.hidden);
    r.tensor(names[k++], 1, c.hidden, p.bias.data());
    model.layers.push_back(std::move(p));
  }
  RowMajor w(c.layers * c.hidden, c.label_count());
  r.tensor(names[k++], w.rows(), w.cols(), w.data());
  model.classifier = w;
  if (r.line() != "end") {
    r.fail("expected 'end'");
  }
  try {
    model.validate();
  } catch (const std::exception& e) {
    r.fail(e.what());
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_model(model, out);
  if (!out) {
    throw std::runtime_error("error writing " + path.string());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return read_model(in);
}

}  // namespace nctc
