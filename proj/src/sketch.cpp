#include "maple/sketch.hpp"

#include <algorithm>
#include <stdexcept>

namespace maple {

std::vector<SketchToken> tokenize_sketch(const std::vector<PrimitiveId>& types,
                                         int sketch_id) {
  std::vector<SketchToken> out;
  out.reserve(types.size());
  int atomics = 0;
  for (PrimitiveId t : types) {
    SketchToken tok;
    tok.type = t;
    if (t == PrimitiveId::Atomic) {
      tok.sketch_id = sketch_id;
      tok.occurrence = atomics++;
    }
    out.push_back(tok);
  }
  return out;
}

int levenshtein(const std::vector<SketchToken>& a,
                const std::vector<SketchToken>& b) {
  size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double sketch_similarity(const std::vector<SketchToken>& a,
                         const std::vector<SketchToken>& b) {
  size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) /
                   static_cast<double>(longest);
}

double compositionality(
    const std::vector<std::vector<SketchToken>>& sketches) {
  size_t n = sketches.size();
  if (n < 2)
    throw std::invalid_argument("compositionality needs at least two sketches");
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      sum += sketch_similarity(sketches[i], sketches[j]);
  // distinct ordered pairs double the unordered sum and the denominator
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

int medoid_index(const std::vector<std::vector<SketchToken>>& sketches) {
  if (sketches.empty())
    throw std::invalid_argument("medoid of an empty set");
  size_t n = sketches.size();
  int best = 0;
  long best_sum = -1;
  for (size_t i = 0; i < n; ++i) {
    long sum = 0;
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sum += levenshtein(sketches[i], sketches[j]);
    }
    bool better =
        best_sum < 0 || sum < best_sum ||
        (sum == best_sum &&
         sketches[i].size() < sketches[static_cast<size_t>(best)].size());
    if (better) {
      best = static_cast<int>(i);
      best_sum = sum;
    }
  }
  return best;
}

std::vector<std::vector<SketchToken>> tokenize_all(
    const std::vector<TaskSketch>& records) {
  std::vector<std::vector<SketchToken>> out;
  out.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i)
    out.push_back(tokenize_sketch(records[i].tokens, static_cast<int>(i)));
  return out;
}

}  // namespace maple
