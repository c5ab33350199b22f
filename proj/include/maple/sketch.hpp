#pragma once

#include <vector>

#include "maple/core.hpp"

namespace maple {

// Alphabet element for sketch comparison. Non-atomic primitives compare by
// type; every atomic occurrence is its own symbol, distinct from atomic
// occurrences in any other sketch and at any other position, so runs of
// atomic actions never count as shared structure.
struct SketchToken {
  PrimitiveId type = PrimitiveId::Atomic;
  int sketch_id = -1;
  int occurrence = -1;

  bool operator==(const SketchToken& o) const {
    if (type != o.type) return false;
    if (type != PrimitiveId::Atomic) return true;
    return sketch_id == o.sketch_id && occurrence == o.occurrence;
  }
};

std::vector<SketchToken> tokenize_sketch(const std::vector<PrimitiveId>& types,
                                         int sketch_id);

// Minimum number of insertions, deletions and substitutions turning a into b.
int levenshtein(const std::vector<SketchToken>& a,
                const std::vector<SketchToken>& b);

// 1 - d / max(|a|, |b|); two empty sketches count as identical.
double sketch_similarity(const std::vector<SketchToken>& a,
                         const std::vector<SketchToken>& b);

// Mean pairwise similarity over distinct pairs. Needs at least two sketches.
double compositionality(const std::vector<std::vector<SketchToken>>& sketches);

// Index of the sketch minimising the summed edit distance to all others.
// Ties break towards the shorter sketch, then the earlier index.
int medoid_index(const std::vector<std::vector<SketchToken>>& sketches);

std::vector<std::vector<SketchToken>> tokenize_all(
    const std::vector<TaskSketch>& records);

}  // namespace maple
