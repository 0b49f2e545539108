#pragma once

#include <array>
#include <optional>
#include <vector>

#include "calib/init/dense_matches.h"

namespace calib {

struct TripleChoice {
  std::array<int, 3> indices = {0, 1, 2};
  int64_t score = 0;  // pixels with a dense observation in all three images
};

// Scores up to 500 randomly sampled image triples (all of them when there
// are fewer) by the number of pixels defined in each of the three dense
// maps, and returns the best. Deterministic for a fixed seed. Empty when
// fewer than 3 images are available.
std::optional<TripleChoice> SelectTriple(
    const std::vector<const DenseMatchMap*>& maps, uint64_t seed);

// Intersection size of three dense maps (shared with SelectTriple).
int64_t TripleIntersectionCount(const DenseMatchMap& a, const DenseMatchMap& b,
                                const DenseMatchMap& c);

}  // namespace calib
