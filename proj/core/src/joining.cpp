#include "stot/joining.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "stot/rng.hpp"

namespace stot {

namespace {

Block interleave(const Block& x_block, const Block& y_block, const Alphabet& x,
                 const Alphabet& y, const Alphabet& pair) {
  const auto xs = decode_block(x_block, x.encoded_width());
  const auto ys = decode_block(y_block, y.encoded_width());
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("paired blocks must have equal length");
  }
  std::vector<SymbolId> ids(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ids[i] = xs[i] * static_cast<SymbolId>(y.size()) + ys[i];
  }
  return encode_block(ids, pair.encoded_width());
}

BlockMeasure pair_law_from_entries(const BlockMeasure& a, const BlockMeasure& b,
                                   const std::vector<TransportPlan::Entry>& entries,
                                   const Alphabet& pair, const std::optional<GapSpec>& gap,
                                   int k, bool renormalize) {
  Block gap_block;
  if (gap) {
    gap_block = interleave(gap->x_block, gap->y_block, a.alphabet(), b.alphabet(), pair);
  }
  double total = 0.0;
  if (renormalize) {
    for (const auto& e : entries) total += e.mass;
  } else {
    total = 1.0;
  }
  std::vector<BlockMeasure::Atom> atoms;
  atoms.reserve(entries.size());
  for (const auto& e : entries) {
    Block blk = interleave(a.atoms()[static_cast<std::size_t>(e.row)].block,
                           b.atoms()[static_cast<std::size_t>(e.col)].block, a.alphabet(),
                           b.alphabet(), pair);
    blk += gap_block;
    atoms.push_back({std::move(blk), e.mass / total});
  }
  const int gap_len = gap ? static_cast<int>(block_length(gap->x_block,
                                                          a.alphabet().encoded_width()))
                          : 0;
  return BlockMeasure(pair, k + gap_len, std::move(atoms));
}

void validate_gap(const GapSpec& gap, const Alphabet& x, const Alphabet& y) {
  const auto gx = block_length(gap.x_block, x.encoded_width());
  const auto gy = block_length(gap.y_block, y.encoded_width());
  if (gx == 0 || gx != gy) {
    throw std::invalid_argument("gap blocks must be non-empty and of equal length");
  }
}

}  // namespace

BlockJoining BlockJoining::from_plan(const TransportPlan& plan, std::optional<GapSpec> gap,
                                     double eta) {
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  const Alphabet& x = plan.row_measure.alphabet();
  const Alphabet& y = plan.col_measure.alphabet();
  if (plan.row_measure.k() != plan.col_measure.k()) {
    throw std::invalid_argument("row and column measures must share k");
  }
  if (gap) validate_gap(*gap, x, y);
  Alphabet pair = pair_alphabet(x, y);
  const int k = plan.row_measure.k();
  BlockMeasure law = pair_law_from_entries(plan.row_measure, plan.col_measure, plan.entries,
                                           pair, gap, k, /*renormalize=*/false);
  const int g = law.k() - k;
  return BlockJoining(x, y, k, g, eta, std::move(law), std::move(gap));
}

BlockJoining BlockJoining::from_plan(const EntropicPlan& plan, std::optional<GapSpec> gap) {
  // Sinkhorn marginals are only tol-accurate, so the law is renormalized to
  // an exact probability measure here.
  TransportPlan sparse = plan.as_transport_plan();
  const Alphabet& x = sparse.row_measure.alphabet();
  const Alphabet& y = sparse.col_measure.alphabet();
  if (sparse.row_measure.k() != sparse.col_measure.k()) {
    throw std::invalid_argument("row and column measures must share k");
  }
  if (gap) validate_gap(*gap, x, y);
  Alphabet pair = pair_alphabet(x, y);
  const int k = sparse.row_measure.k();
  BlockMeasure law = pair_law_from_entries(sparse.row_measure, sparse.col_measure,
                                           sparse.entries, pair, gap, k,
                                           /*renormalize=*/true);
  const int g = law.k() - k;
  return BlockJoining(x, y, k, g, plan.eta, std::move(law), std::move(gap));
}

BlockJoining BlockJoining::diagonal(const BlockMeasure& gamma, std::optional<Block> gap) {
  std::vector<TransportPlan::Entry> entries;
  entries.reserve(gamma.support_size());
  for (std::size_t i = 0; i < gamma.support_size(); ++i) {
    entries.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i),
                       gamma.atoms()[i].mass});
  }
  std::optional<GapSpec> gap_spec;
  if (gap) gap_spec = GapSpec{*gap, *gap};
  if (gap_spec) validate_gap(*gap_spec, gamma.alphabet(), gamma.alphabet());
  Alphabet pair = pair_alphabet(gamma.alphabet(), gamma.alphabet());
  BlockMeasure law = pair_law_from_entries(gamma, gamma, entries, pair, gap_spec, gamma.k(),
                                           /*renormalize=*/false);
  const int g = law.k() - gamma.k();
  return BlockJoining(gamma.alphabet(), gamma.alphabet(), gamma.k(), g, 0.0, std::move(law),
                      std::move(gap_spec));
}

BlockMeasure BlockJoining::plan_marginal() const { return range_marginal(law_, 0, k_); }

bool BlockJoining::operator==(const BlockJoining& other) const {
  return k_ == other.k_ && gap_ == other.gap_ && eta_ == other.eta_ &&
         x_ == other.x_ && y_ == other.y_ && law_ == other.law_;
}

BlockMeasure stationary_block_marginal(const BlockMeasure& law, int m,
                                       std::int64_t atom_budget) {
  const int p = law.k();
  if (m < 1) throw std::invalid_argument("marginal dimension must be >= 1");

  std::unordered_map<Block, double> acc;
  for (int phase = 0; phase < p; ++phase) {
    // Window [phase, phase+m) over iid concatenated blocks, cut at block
    // boundaries into independent range marginals of the law.
    std::optional<BlockMeasure> window;
    int pos = 0;
    int offset = phase;
    while (pos < m) {
      const int len = std::min(p - offset, m - pos);
      BlockMeasure seg = range_marginal(law, offset, len);
      window = window ? concat_product(*window, seg, atom_budget) : std::move(seg);
      pos += len;
      offset = 0;
    }
    for (const auto& atom : window->atoms()) {
      acc[atom.block] += atom.mass / p;
    }
    if (static_cast<std::int64_t>(acc.size()) > atom_budget) {
      throw std::runtime_error("finite_marginal: support budget exceeded");
    }
  }
  std::vector<BlockMeasure::Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [block, mass] : acc) atoms.push_back({block, mass});
  return BlockMeasure(law.alphabet(), m, std::move(atoms));
}

BlockMeasure finite_marginal(const BlockJoining& joining, int m, std::int64_t atom_budget) {
  return stationary_block_marginal(joining.block_law(), m, atom_budget);
}

BlockMeasure project_pair_measure(const BlockMeasure& pair_measure, const Alphabet& x,
                                  const Alphabet& y, Side side) {
  const int pw = pair_measure.width();
  const Alphabet& target = side == Side::x ? x : y;
  const SymbolId y_size = static_cast<SymbolId>(y.size());
  std::unordered_map<Block, double> acc;
  acc.reserve(pair_measure.support_size());
  for (const auto& atom : pair_measure.atoms()) {
    auto ids = decode_block(atom.block, pw);
    for (auto& id : ids) id = side == Side::x ? id / y_size : id % y_size;
    acc[encode_block(ids, target.encoded_width())] += atom.mass;
  }
  std::vector<BlockMeasure::Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [block, mass] : acc) atoms.push_back({block, mass});
  return BlockMeasure(target, pair_measure.k(), std::move(atoms));
}

double expected_cost(const BlockJoining& joining, const CostSpec& cost) {
  if (cost.x_alphabet() != joining.x_alphabet() || cost.y_alphabet() != joining.y_alphabet()) {
    throw std::invalid_argument("cost alphabets do not match the joining");
  }
  const SymbolId y_size = static_cast<SymbolId>(joining.y_alphabet().size());
  const int pw = joining.block_law().width();
  double sum = 0.0;
  for (const auto& atom : joining.block_law().atoms()) {
    const auto ids = decode_block(atom.block, pw);
    double block_cost = 0.0;
    for (SymbolId id : ids) block_cost += cost(id / y_size, id % y_size);
    sum += atom.mass * block_cost;
  }
  return sum / joining.period();
}

double block_entropy_rate(const BlockJoining& joining) {
  return entropy(joining.block_law()) / joining.period();
}

std::pair<SymbolSequence, SymbolSequence> sample_trajectory(const BlockJoining& joining,
                                                            std::int64_t length,
                                                            std::uint64_t rng_seed) {
  if (length < 1) throw std::invalid_argument("trajectory length must be >= 1");
  const auto& law = joining.block_law();
  const int p = joining.period();
  const int pw = law.width();
  const SymbolId y_size = static_cast<SymbolId>(joining.y_alphabet().size());

  std::vector<double> cumulative(law.support_size());
  double run = 0.0;
  for (std::size_t i = 0; i < law.support_size(); ++i) {
    run += law.atoms()[i].mass;
    cumulative[i] = run;
  }

  Rng rng(rng_seed);
  const int phase = static_cast<int>(rng.next_index(static_cast<std::size_t>(p)));

  std::vector<SymbolId> xs, ys;
  xs.reserve(static_cast<std::size_t>(length));
  ys.reserve(static_cast<std::size_t>(length));
  int offset = phase;
  while (static_cast<std::int64_t>(xs.size()) < length) {
    const auto idx = rng.next_from_cumulative(cumulative);
    const auto ids = decode_block(law.atoms()[idx].block, pw);
    for (std::size_t t = static_cast<std::size_t>(offset);
         t < ids.size() && static_cast<std::int64_t>(xs.size()) < length; ++t) {
      xs.push_back(ids[t] / y_size);
      ys.push_back(ids[t] % y_size);
    }
    offset = 0;
  }
  return {make_sequence(joining.x_alphabet(), std::move(xs)),
          make_sequence(joining.y_alphabet(), std::move(ys))};
}

}  // namespace stot
