#pragma once

#include <vector>

#include "res/encoder.hpp"

namespace res {

struct FusedRowRef {
    int candidate = -1;  // original candidate index (retrieval rank); -1 for mention rows
    int prefix_pos = -1;
    bool is_mention() const { return candidate < 0; }
};

// [mention rows; candidate block 1; ...; candidate block k] as continuous
// embeddings. Mention rows carry positions 0..L_m-1; every candidate block
// carries the identical positions L_m..L_m+L_p-1, which makes candidate
// order a pure permutation of rows and inference order-invariant.
struct FusedInput {
    ag::Var rows;
    std::vector<int> positions;
    std::vector<FusedRowRef> map;  // one entry per row
    int mention_len = 0;
    int k = 0;
    int prefix_len = 0;
};

// order[b] = original candidate index placed at block b; must be a
// permutation of 0..k-1.
FusedInput fuse(const ag::Var& mention_rep, const std::vector<ag::Var>& candidate_reps,
                const std::vector<int>& order, int max_positions);

// Per-candidate-token sigmoid scores from the selecting pass. probs rows are
// in fused (block) order; map aligns them back to original candidates.
struct TokenScores {
    ag::Var probs;           // (k * prefix_len) x 1
    Matrix last_layer_rows;  // encoder output rows behind the probs
    std::vector<FusedRowRef> map;
    int k = 0;
    int prefix_len = 0;

    std::vector<std::vector<real>> per_candidate() const;  // [candidate][prefix_pos]
    std::vector<real> pooled() const;                      // max over each candidate's tokens
};

TokenScores score_tokens(Encoder& enc, const ag::Var& head_w, const ag::Var& head_b,
                         const FusedInput& fused, bool training, Rng& dropout_rng);

// Mean binary cross-entropy over all k * prefix_len token scores; rows of
// the gold candidate are labeled 1, every other row 0.
ag::Var bce_loss(const TokenScores& scores, int gold_candidate);

struct RankedPrediction {
    std::vector<int> ranking;  // candidate indices, best first
    std::vector<real> scores;  // aligned with ranking
    int best = -1;
};

// Sorts candidates by score descending; exact ties go to the lower candidate
// index, which is the earlier retrieval rank.
RankedPrediction rank(const std::vector<real>& candidate_scores);

}  // namespace res
