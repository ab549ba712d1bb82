#include "nctc/data.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "nctc/errors.hpp"

namespace nctc {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

bool parse_double(std::string_view s, double& value) {
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_integer(std::string_view s) {
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (c < '0' || c > '9') {
      return false;
    }
  }
  return true;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

bool EmbeddingTable::insert(std::string token, const Eigen::Ref<const Eigen::RowVectorXd>& vec) {
  if (vec.size() != dim_) {
    throw ShapeError("embedding for '" + token + "' has dimension " + std::to_string(vec.size()) +
                     ", table expects " + std::to_string(dim_));
  }
  Eigen::RowVectorXd row = vec;
  const double norm = row.norm();
  if (norm > 0.0) {
    row /= norm;
  }
  if (auto it = index_.find(token); it != index_.end()) {
    rows_[it->second] = std::move(row);
    return false;
  }
  index_.emplace(token, size());
  tokens_.push_back(std::move(token));
  rows_.push_back(std::move(row));
  return true;
}

void EmbeddingTable::lookup(std::string_view token, Eigen::Ref<Eigen::RowVectorXd> out) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) {
    out = rows_[it->second];
  } else {
    out.setZero();
  }
}

Eigen::RowVectorXd EmbeddingTable::lookup(std::string_view token) const {
  Eigen::RowVectorXd out(dim_);
  lookup(token, out);
  return out;
}

EmbeddingTable read_embeddings(std::istream& in, std::ostream& warnings) {
  EmbeddingTable table;
  bool have_dim = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    auto fields = split_tokens(line);
    if (fields.empty()) {
      continue;
    }
    if (!have_dim && line_no == 1 && fields.size() == 2 && is_integer(fields[0]) &&
        is_integer(fields[1])) {
      continue;  // word2vec "<count> <dim>" header
    }
    const Index dim = static_cast<Index>(fields.size()) - 1;
    if (dim < 1) {
      throw FormatError("line " + std::to_string(line_no) + ": token without a vector");
    }
    if (!have_dim) {
      table = EmbeddingTable(dim);
      have_dim = true;
    } else if (dim != table.dim()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.dim()) + " values, found " + std::to_string(dim));
    }
    Eigen::RowVectorXd vec(dim);
    for (Index i = 0; i < dim; ++i) {
      if (!parse_double(fields[i + 1], vec[i])) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + fields[i + 1] +
                          "'");
      }
    }
    if (!vec.allFinite()) {
      throw FormatError("line " + std::to_string(line_no) + ": non-finite value");
    }
    if (!table.insert(fields[0], vec)) {
      warnings << "warning: line " << line_no << ": duplicate token '" << fields[0]
               << "', keeping the last occurrence\n";
    }
  }
  if (!have_dim) {
    throw FormatError("embedding file contains no vectors");
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::ostream& warnings) {
  auto in = open_input(path);
  return read_embeddings(in, warnings);
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (Index i = 0; i < table.size(); ++i) {
    out << table.tokens()[i];
    for (double v : table.row(i)) {
      out << ' ' << format_double(v);
    }
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in, const std::vector<std::string>& label_names,
                     std::ostream& warnings) {
  Dataset ds;
  ds.label_names = label_names;
  std::unordered_map<std::string, Index> label_index;
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    label_index.emplace(label_names[i], static_cast<Index>(i));
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) {
      warnings << "warning: line " << line_no << ": blank line skipped\n";
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("line " + std::to_string(line_no) + ": missing tab between label and text");
    }
    const std::string label = line.substr(0, tab);
    const auto it = label_index.find(label);
    if (it == label_index.end()) {
      throw DataError("line " + std::to_string(line_no) + ": unknown label '" + label + "'");
    }
    Example ex;
    ex.tokens = split_tokens(std::string_view(line).substr(tab + 1));
    if (ex.tokens.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty text");
    }
    ex.label = it->second;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const std::vector<std::string>& label_names,
                     std::ostream& warnings) {
  auto in = open_input(path);
  return read_dataset(in, label_names, warnings);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& ex : dataset.examples) {
    out << dataset.label_names.at(ex.label) << '\t';
    for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
      out << (i ? " " : "") << ex.tokens[i];
    }
    out << '\n';
  }
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) {
      break;
    }
    auto end = text.find_first_of(" \t", start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    out.emplace_back(text.substr(start, end - start));
    pos = end;
  }
  return out;
}

Sequence embed(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  Sequence x(static_cast<Index>(tokens.size()), table.dim());
  for (Index i = 0; i < x.rows(); ++i) {
    Eigen::RowVectorXd row(table.dim());
    table.lookup(tokens[i], row);
    x.row(i) = row;
  }
  return x;
}

std::vector<EncodedExample> encode(const Dataset& dataset, const EmbeddingTable& table) {
  std::vector<EncodedExample> out;
  out.reserve(dataset.examples.size());
  for (const auto& ex : dataset.examples) {
    if (ex.label < 0 || ex.label >= dataset.label_count()) {
      throw DataError("example label outside the label set");
    }
    out.push_back({embed(ex.tokens, table), ex.label});
  }
  return out;
}

}  // namespace nctc
