#include "calib/init/triple_selection.h"

#include <set>

#include "calib/core/random.h"

namespace calib {

int64_t TripleIntersectionCount(const DenseMatchMap& a, const DenseMatchMap& b,
                                const DenseMatchMap& c) {
  const auto& ma = a.mask();
  const auto& mb = b.mask();
  const auto& mc = c.mask();
  const size_t n = std::min({ma.size(), mb.size(), mc.size()});
  int64_t count = 0;
  for (size_t i = 0; i < n; ++i) {
    count += ma[i] & mb[i] & mc[i];
  }
  return count;
}

std::optional<TripleChoice> SelectTriple(
    const std::vector<const DenseMatchMap*>& maps, uint64_t seed) {
  const int n = static_cast<int>(maps.size());
  if (n < 3) return std::nullopt;

  std::vector<std::array<int, 3>> triples;
  const int64_t total =
      static_cast<int64_t>(n) * (n - 1) * (n - 2) / 6;
  constexpr int kMaxTriples = 500;
  if (total <= kMaxTriples) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        for (int c = b + 1; c < n; ++c) triples.push_back({a, b, c});
      }
    }
  } else {
    Rng rng(HashCombine(seed, 0x747269ULL));
    std::set<std::array<int, 3>> seen;
    while (static_cast<int>(seen.size()) < kMaxTriples) {
      int a = rng.UniformInt(n);
      int b = rng.UniformInt(n);
      int c = rng.UniformInt(n);
      if (a == b || b == c || a == c) continue;
      std::array<int, 3> t = {a, b, c};
      std::sort(t.begin(), t.end());
      seen.insert(t);
    }
    triples.assign(seen.begin(), seen.end());
  }

  TripleChoice best;
  best.score = -1;
  for (const auto& t : triples) {
    const int64_t score =
        TripleIntersectionCount(*maps[t[0]], *maps[t[1]], *maps[t[2]]);
    if (score > best.score) {
      best.score = score;
      best.indices = t;
    }
  }
  return best;
}

}  // namespace calib
