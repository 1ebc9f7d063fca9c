#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stot {

using SymbolId = std::uint32_t;

/// Finite ordered symbol set. Ids are 0..size()-1 in token order and stable
/// for the lifetime of the object.
class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(SymbolId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<SymbolId> find(std::string_view token) const;

  /// Bytes per symbol in canonical block encoding (1 or 2).
  int encoded_width() const noexcept { return width_; }

  bool operator==(const Alphabet& other) const { return tokens_ == other.tokens_; }
  bool operator!=(const Alphabet& other) const { return !(*this == other); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, SymbolId> index_;
  int width_ = 1;
};

/// Product alphabet for paired (x, y) symbols; pair id = x_id * |Y| + y_id.
Alphabet pair_alphabet(const Alphabet& x, const Alphabet& y);

struct SymbolSequence {
  Alphabet alphabet;
  std::vector<SymbolId> data;

  std::int64_t size() const noexcept { return static_cast<std::int64_t>(data.size()); }
};

/// Validates ids against the alphabet.
SymbolSequence make_sequence(Alphabet alphabet, std::vector<SymbolId> data);

/// Reads a whitespace-separated token file. When no alphabet is given, one is
/// inferred with ids assigned by first occurrence.
SymbolSequence ingest_sequence(const std::filesystem::path& path,
                               const std::optional<Alphabet>& alphabet = {});

/// One token per line; line index is the id.
Alphabet load_alphabet(const std::filesystem::path& path);

void write_sequence(const std::filesystem::path& path, const SymbolSequence& seq);

}  // namespace stot
