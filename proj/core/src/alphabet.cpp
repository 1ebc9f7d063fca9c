#include "stot/alphabet.hpp"

#include <fstream>
#include <stdexcept>

namespace stot {

Alphabet::Alphabet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) {
    throw std::invalid_argument("alphabet must contain at least one token");
  }
  if (tokens_.size() > 65536) {
    throw std::invalid_argument("alphabet size exceeds 65536 symbols");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) {
      throw std::invalid_argument("alphabet tokens must be non-empty");
    }
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<SymbolId>(i));
    if (!inserted) {
      throw std::invalid_argument("duplicate alphabet token: " + tokens_[i]);
    }
  }
  width_ = tokens_.size() <= 256 ? 1 : 2;
}

std::optional<SymbolId> Alphabet::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Alphabet pair_alphabet(const Alphabet& x, const Alphabet& y) {
  std::vector<std::string> tokens;
  tokens.reserve(x.size() * y.size());
  for (const auto& xt : x.tokens()) {
    for (const auto& yt : y.tokens()) {
      tokens.push_back(xt + "|" + yt);
    }
  }
  return Alphabet(std::move(tokens));
}

SymbolSequence make_sequence(Alphabet alphabet, std::vector<SymbolId> data) {
  for (SymbolId id : data) {
    if (id >= alphabet.size()) {
      throw std::invalid_argument("symbol id out of range for alphabet");
    }
  }
  return SymbolSequence{std::move(alphabet), std::move(data)};
}

SymbolSequence ingest_sequence(const std::filesystem::path& path,
                               const std::optional<Alphabet>& alphabet) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open sequence file: " + path.string());
  }

  std::vector<SymbolId> data;
  std::string token;
  if (alphabet) {
    while (in >> token) {
      auto id = alphabet->find(token);
      if (!id) {
        throw std::invalid_argument("unknown token \"" + token + "\" in " + path.string());
      }
      data.push_back(*id);
    }
    if (data.empty()) {
      throw std::invalid_argument("empty sequence file: " + path.string());
    }
    return SymbolSequence{*alphabet, std::move(data)};
  }

  std::vector<std::string> tokens;
  std::unordered_map<std::string, SymbolId> seen;
  while (in >> token) {
    auto [it, inserted] = seen.emplace(token, static_cast<SymbolId>(tokens.size()));
    if (inserted) tokens.push_back(token);
    data.push_back(it->second);
  }
  if (data.empty()) {
    throw std::invalid_argument("empty sequence file: " + path.string());
  }
  return SymbolSequence{Alphabet(std::move(tokens)), std::move(data)};
}

Alphabet load_alphabet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open alphabet file: " + path.string());
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return Alphabet(std::move(tokens));
}

void write_sequence(const std::filesystem::path& path, const SymbolSequence& seq) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  for (std::size_t i = 0; i < seq.data.size(); ++i) {
    if (i) out << ' ';
    out << seq.alphabet.token(seq.data[i]);
  }
  out << '\n';
}

}  // namespace stot
