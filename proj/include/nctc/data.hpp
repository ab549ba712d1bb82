#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nctc/types.hpp"

namespace nctc {

/// Fixed word vectors. Rows are unit-norm (zero rows stay zero); unknown
/// tokens look up as the zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Index dim) : dim_(dim) {}

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(tokens_.size()); }
  bool contains(std::string_view token) const;

  /// Inserts or replaces `token`, normalizing the vector to unit norm.
  /// Returns false when an existing entry was replaced.
  bool insert(std::string token, const Eigen::Ref<const Eigen::RowVectorXd>& vec);

  /// Copies the row for `token` into `out` (zeros if unknown).
  void lookup(std::string_view token, Eigen::Ref<Eigen::RowVectorXd> out) const;
  Eigen::RowVectorXd lookup(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  const Eigen::RowVectorXd& row(Index i) const { return rows_[i]; }

 private:
  Index dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<Eigen::RowVectorXd> rows_;
  std::unordered_map<std::string, Index> index_;
};

/// `<token> <v1> ... <vd>` per line. A leading "<count> <dim>" header line is
/// skipped. Duplicate tokens keep the last occurrence and emit a warning.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::ostream& warnings);
EmbeddingTable read_embeddings(std::istream& in, std::ostream& warnings);

/// 17 significant digits per value, so a reload reproduces every double.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

struct Example {
  std::vector<std::string> tokens;
  Index label = 0;
};

struct Dataset {
  std::vector<Example> examples;
  std::vector<std::string> label_names;

  Index label_count() const { return static_cast<Index>(label_names.size()); }
};

/// `<label>\t<tok> <tok> ...` per line; labels are resolved against
/// `label_names`. Blank lines are skipped with a warning.
Dataset load_dataset(const std::filesystem::path& path, const std::vector<std::string>& label_names,
                     std::ostream& warnings);
Dataset read_dataset(std::istream& in, const std::vector<std::string>& label_names,
                     std::ostream& warnings);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Splits on runs of spaces and tabs.
std::vector<std::string> split_tokens(std::string_view text);

/// One row per token; out-of-vocabulary tokens give zero rows.
Sequence embed(const std::vector<std::string>& tokens, const EmbeddingTable& table);

struct EncodedExample {
  Sequence input;
  Index label = 0;
};

std::vector<EncodedExample> encode(const Dataset& dataset, const EmbeddingTable& table);

}  // namespace nctc
