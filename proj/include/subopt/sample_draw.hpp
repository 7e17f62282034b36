#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "subopt/common.hpp"

namespace subopt {

/// A with-replacement multiset of row indices together with the sampling
/// probability of each drawn row. A row drawn k times appears k times and
/// contributes k copies to every weighted sum.
struct SampleDraw {
  std::vector<Index> indices;
  std::vector<double> pi_values;
  std::uint64_t plan_id = 0;

  Index size() const { return static_cast<Index>(indices.size()); }

  void validate(Index population) const {
    if (indices.empty()) throw Error("SampleDraw: empty draw");
    if (indices.size() != pi_values.size()) {
      throw Error("SampleDraw: indices/pi_values length mismatch");
    }
    for (std::size_t j = 0; j < indices.size(); ++j) {
      if (indices[j] < 0 || indices[j] >= population) {
        throw Error("SampleDraw: index out of range");
      }
      if (!(pi_values[j] > 0.0)) {
        throw Error("SampleDraw: nonpositive sampling probability");
      }
    }
  }

  /// Every row exactly once with probability 1/N; weighted sums over this
  /// draw collapse to the full-data sums.
  static SampleDraw full_enumeration(Index population) {
    SampleDraw d;
    d.indices.resize(static_cast<std::size_t>(population));
    d.pi_values.assign(static_cast<std::size_t>(population),
                       1.0 / static_cast<double>(population));
    for (Index i = 0; i < population; ++i) d.indices[static_cast<std::size_t>(i)] = i;
    return d;
  }
};

}  // namespace subopt
