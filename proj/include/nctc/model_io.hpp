#pragma once

#include <filesystem>
#include <iosfwd>

#include "nctc/network.hpp"

namespace nctc {

/// Text model format, tag "NCTC/1":
///
///   NCTC/1
///   layers <T>
///   order <n>
///   hidden <h>
///   word_dim <d>
///   decay <x>
///   dropout <x>
///   labels <m>
///   label <name>            (m lines)
///   tensor <name> <rows> <cols>
///   <rows lines of cols values>
///   ...                     (per layer U1..Un, O, b; then W)
///   end
///
/// Values are written with 17 significant digits, so load(save(m)) is exact
/// and save(load(save(m))) is byte-identical.
void write_model(const Model& model, std::ostream& out);
Model read_model(std::istream& in);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace nctc
