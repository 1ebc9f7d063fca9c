#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stot/alphabet.hpp"

namespace stot {

/// Canonical block key: fixed-width big-endian symbol ids packed into bytes.
/// Lexicographic string order equals lexicographic id order.
using Block = std::string;

Block encode_block(std::span<const SymbolId> ids, int width);
std::vector<SymbolId> decode_block(const Block& block, int width);
std::size_t block_length(const Block& block, int width);

/// Sparse probability measure on length-k blocks over a finite alphabet.
/// Atoms are sorted by block, carry strictly positive mass, and sum to one
/// within 1e-12. Immutable after construction.
class BlockMeasure {
 public:
  struct Atom {
    Block block;
    double mass;
  };

  BlockMeasure(Alphabet alphabet, int k, std::vector<Atom> atoms);

  /// Builds from integer counts over a common denominator; keeps the exact
  /// weights around so downstream solvers can work in integer arithmetic.
  static BlockMeasure from_counts(Alphabet alphabet, int k,
                                  std::vector<std::pair<Block, std::int64_t>> counts,
                                  std::int64_t denominator);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  int k() const noexcept { return k_; }
  int width() const noexcept { return alphabet_.encoded_width(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t support_size() const noexcept { return atoms_.size(); }

  /// Mass of a block, zero when not in the support.
  double mass(const Block& block) const;
  /// Index of a block in atoms(), or -1.
  std::int64_t find(const Block& block) const;

  bool has_exact_weights() const noexcept { return denominator_ > 0; }
  std::int64_t denominator() const noexcept { return denominator_; }
  const std::vector<std::int64_t>& weights() const noexcept { return weights_; }

  bool operator==(const BlockMeasure& other) const;

 private:
  Alphabet alphabet_;
  int k_;
  std::vector<Atom> atoms_;
  std::vector<std::int64_t> weights_;  // parallel to atoms_ when exact
  std::int64_t denominator_ = 0;       // 0 = no exact representation
};

/// Point mass at a single block.
BlockMeasure point_mass(Alphabet alphabet, Block block);

/// Sliding-window k-block empirical measure of a sequence (n-k+1 windows).
BlockMeasure empirical_block_measure(const SymbolSequence& seq, int k);

/// Sum of |a - b| over the union of supports; requires equal alphabet and k.
double l1_distance(const BlockMeasure& a, const BlockMeasure& b);

/// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const BlockMeasure& m);

/// Marginal of coordinates [offset, offset+length).
BlockMeasure range_marginal(const BlockMeasure& m, int offset, int length);

/// Concatenation of independent draws: (u, v) -> uv.
BlockMeasure concat_product(const BlockMeasure& a, const BlockMeasure& b,
                            std::int64_t atom_budget);

}  // namespace stot
