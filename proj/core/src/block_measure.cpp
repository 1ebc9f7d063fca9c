#include "stot/block_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace stot {

namespace {

// Kahan summation; the validity check needs more accuracy than the masses.
double accurate_sum(const std::vector<BlockMeasure::Atom>& atoms) {
  double sum = 0.0, comp = 0.0;
  for (const auto& a : atoms) {
    const double y = a.mass - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void check_block_ids(const Block& block, int width, std::size_t alphabet_size) {
  const auto ids = decode_block(block, width);
  for (SymbolId id : ids) {
    if (id >= alphabet_size) {
      throw std::invalid_argument("block contains symbol id out of range");
    }
  }
}

}  // namespace

Block encode_block(std::span<const SymbolId> ids, int width) {
  Block out;
  out.resize(ids.size() * static_cast<std::size_t>(width));
  char* p = out.data();
  if (width == 1) {
    for (SymbolId id : ids) *p++ = static_cast<char>(id & 0xff);
  } else {
    for (SymbolId id : ids) {
      *p++ = static_cast<char>((id >> 8) & 0xff);
      *p++ = static_cast<char>(id & 0xff);
    }
  }
  return out;
}

std::vector<SymbolId> decode_block(const Block& block, int width) {
  if (block.size() % static_cast<std::size_t>(width) != 0) {
    throw std::invalid_argument("block size is not a multiple of symbol width");
  }
  std::vector<SymbolId> ids(block.size() / width);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(block.data());
  if (width == 1) {
    for (auto& id : ids) id = *p++;
  } else {
    for (auto& id : ids) {
      id = static_cast<SymbolId>(p[0]) << 8 | p[1];
      p += 2;
    }
  }
  return ids;
}

std::size_t block_length(const Block& block, int width) {
  return block.size() / static_cast<std::size_t>(width);
}

BlockMeasure::BlockMeasure(Alphabet alphabet, int k, std::vector<Atom> atoms)
    : alphabet_(std::move(alphabet)), k_(k), atoms_(std::move(atoms)) {
  if (k_ < 1) throw std::invalid_argument("block length k must be >= 1");
  if (atoms_.empty()) throw std::invalid_argument("block measure needs at least one atom");

  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.block < b.block; });

  const std::size_t expected = static_cast<std::size_t>(k_) * alphabet_.encoded_width();
  const Block* prev = nullptr;
  for (const auto& a : atoms_) {
    if (a.block.size() != expected) {
      throw std::invalid_argument("atom block has wrong length");
    }
    if (!(a.mass > 0.0)) {
      throw std::invalid_argument("atom masses must be strictly positive");
    }
    if (prev && *prev == a.block) {
      throw std::invalid_argument("duplicate atom block");
    }
    check_block_ids(a.block, alphabet_.encoded_width(), alphabet_.size());
    prev = &a.block;
  }

  const double sum = accurate_sum(atoms_);
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("block measure masses must sum to 1 within 1e-12");
  }
}

BlockMeasure BlockMeasure::from_counts(Alphabet alphabet, int k,
                                       std::vector<std::pair<Block, std::int64_t>> counts,
                                       std::int64_t denominator) {
  if (denominator <= 0) throw std::invalid_argument("denominator must be positive");
  // Sorting by block up front keeps the weights aligned with the atom order
  // the constructor settles on.
  std::sort(counts.begin(), counts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Atom> atoms;
  atoms.reserve(counts.size());
  std::vector<std::int64_t> weights;
  weights.reserve(counts.size());
  std::int64_t total = 0;
  for (auto& [block, count] : counts) {
    if (count <= 0) throw std::invalid_argument("counts must be strictly positive");
    total += count;
    weights.push_back(count);
    atoms.push_back(Atom{std::move(block), static_cast<double>(count) / denominator});
  }
  if (total != denominator) {
    throw std::invalid_argument("counts must sum to the denominator");
  }
  BlockMeasure m(std::move(alphabet), k, std::move(atoms));
  m.denominator_ = denominator;
  m.weights_ = std::move(weights);
  return m;
}

double BlockMeasure::mass(const Block& block) const {
  const auto idx = find(block);
  return idx < 0 ? 0.0 : atoms_[static_cast<std::size_t>(idx)].mass;
}

std::int64_t BlockMeasure::find(const Block& block) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), block,
                             [](const Atom& a, const Block& b) { return a.block < b; });
  if (it == atoms_.end() || it->block != block) return -1;
  return it - atoms_.begin();
}

bool BlockMeasure::operator==(const BlockMeasure& other) const {
  if (alphabet_ != other.alphabet_ || k_ != other.k_ ||
      atoms_.size() != other.atoms_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].block != other.atoms_[i].block || atoms_[i].mass != other.atoms_[i].mass) {
      return false;
    }
  }
  return true;
}

BlockMeasure point_mass(Alphabet alphabet, Block block) {
  const int width = alphabet.encoded_width();
  const int k = static_cast<int>(block_length(block, width));
  std::vector<BlockMeasure::Atom> atoms{{std::move(block), 1.0}};
  return BlockMeasure(std::move(alphabet), k, std::move(atoms));
}

BlockMeasure empirical_block_measure(const SymbolSequence& seq, int k) {
  const std::int64_t n = seq.size();
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > n) throw std::invalid_argument("k exceeds sequence length");

  const int width = seq.alphabet.encoded_width();
  const std::int64_t windows = n - k + 1;
  std::unordered_map<Block, std::int64_t> counts;
  counts.reserve(static_cast<std::size_t>(std::min<std::int64_t>(windows, 1 << 20)));
  for (std::int64_t i = 0; i < windows; ++i) {
    Block key = encode_block(std::span(seq.data).subspan(i, k), width);
    ++counts[key];
  }
  std::vector<std::pair<Block, std::int64_t>> pairs(counts.begin(), counts.end());
  return BlockMeasure::from_counts(seq.alphabet, k, std::move(pairs), windows);
}

double l1_distance(const BlockMeasure& a, const BlockMeasure& b) {
  if (a.alphabet() != b.alphabet() || a.k() != b.k()) {
    throw std::invalid_argument("l1_distance requires matching alphabet and k");
  }
  const auto& xs = a.atoms();
  const auto& ys = b.atoms();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const int cmp = xs[i].block.compare(ys[j].block);
    if (cmp < 0) {
      sum += xs[i++].mass;
    } else if (cmp > 0) {
      sum += ys[j++].mass;
    } else {
      sum += std::abs(xs[i].mass - ys[j].mass);
      ++i;
      ++j;
    }
  }
  for (; i < xs.size(); ++i) sum += xs[i].mass;
  for (; j < ys.size(); ++j) sum += ys[j].mass;
  return sum;
}

double entropy(const BlockMeasure& m) {
  double sum = 0.0, comp = 0.0;
  for (const auto& a : m.atoms()) {
    const double term = -a.mass * std::log(a.mass);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::max(sum, 0.0);
}

BlockMeasure range_marginal(const BlockMeasure& m, int offset, int length) {
  if (offset < 0 || length < 1 || offset + length > m.k()) {
    throw std::invalid_argument("range_marginal: window out of bounds");
  }
  const int width = m.width();
  std::unordered_map<Block, double> acc;
  acc.reserve(m.support_size());
  for (const auto& a : m.atoms()) {
    acc[a.block.substr(static_cast<std::size_t>(offset) * width,
                       static_cast<std::size_t>(length) * width)] += a.mass;
  }
  std::vector<BlockMeasure::Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [block, mass] : acc) atoms.push_back({block, mass});
  return BlockMeasure(m.alphabet(), length, std::move(atoms));
}

BlockMeasure concat_product(const BlockMeasure& a, const BlockMeasure& b,
                            std::int64_t atom_budget) {
  if (a.alphabet() != b.alphabet()) {
    throw std::invalid_argument("concat_product requires a common alphabet");
  }
  const std::int64_t cells =
      static_cast<std::int64_t>(a.support_size()) * static_cast<std::int64_t>(b.support_size());
  if (cells > atom_budget) {
    throw std::runtime_error("support budget exceeded in concat_product");
  }
  std::vector<BlockMeasure::Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(cells));
  for (const auto& x : a.atoms()) {
    for (const auto& y : b.atoms()) {
      atoms.push_back({x.block + y.block, x.mass * y.mass});
    }
  }
  return BlockMeasure(a.alphabet(), a.k() + b.k(), std::move(atoms));
}

}  // namespace stot
