#include <array>
#include <cmath>
#include <numeric>

#include "ccwnet/data.hpp"
#include "ccwnet/error.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

void SplitSpec::validate() const {
  for (double f : {train, validation, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  }
  if (!(train > 0.0)) throw ConfigError("train fraction must be positive");
  if (std::abs(train + validation + test - 1.0) > 1e-12) {
    throw ConfigError("split fractions must sum to 1");
  }
}

namespace {

// Per-part row counts for one stratum of size m.
std::array<Index, 3> allocate(Index m, const std::array<double, 3>& fractions) {
  std::array<Index, 3> counts{0, 0, 0};
  int last_nonzero = 0;
  Index used = 0;
  for (int k = 0; k < 3; ++k) {
    if (fractions[k] > 0.0) last_nonzero = k;
  }
  for (int k = 0; k < 3; ++k) {
    if (k == last_nonzero) {
      counts[k] = m - used;
      break;
    }
    // The epsilon absorbs representation error in products like 0.6 * 1000.
    counts[k] = static_cast<Index>(std::floor(fractions[k] * static_cast<double>(m) + 1e-9));
    used += counts[k];
  }
  for (int k = 0; k < 3; ++k) {
    if (fractions[k] > 0.0 && counts[k] < 1) {
      throw DomainError("stratum underflow: a stratum of " + std::to_string(m) +
                        " rows cannot give every nonzero split part a row");
    }
  }
  return counts;
}

}  // namespace

SplitResult split_dataset(const CaseControlSample& sample, const SplitSpec& spec) {
  spec.validate();
  const Dataset& data = sample.data();
  const std::array<double, 3> fractions{spec.train, spec.validation, spec.test};

  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(derive_seed(spec.seed, {tag(Stream::kSplit)}));
  shuffle(order.begin(), order.end(), rng);

  const auto cases = allocate(sample.n1(), fractions);
  const auto controls = allocate(sample.n0(), fractions);

  std::array<std::vector<Index>, 3> parts;
  Index case_rank = 0;
  Index control_rank = 0;
  for (Index idx : order) {
    const bool is_case = data.label(idx) == 1.0;
    Index& rank = is_case ? case_rank : control_rank;
    const auto& quota = is_case ? cases : controls;
    // Strata are dealt out in shuffled order: first quota[0] to train, etc.
    int part = 0;
    Index boundary = quota[0];
    while (rank >= boundary && part < 2) {
      ++part;
      boundary += quota[part];
    }
    parts[part].push_back(idx);
    ++rank;
  }

  auto make = [&](int k) -> std::optional<CaseControlSample> {
    if (parts[k].empty()) return std::nullopt;
    return CaseControlSample(data.select(parts[k]));
  };
  return SplitResult{CaseControlSample(data.select(parts[0])), make(1), make(2)};
}

}  // namespace ccwnet
