#include "res/selecting.hpp"

#include <algorithm>
#include <numeric>

namespace res {

FusedInput fuse(const ag::Var& mention_rep, const std::vector<ag::Var>& candidate_reps,
                const std::vector<int>& order, int max_positions) {
    require(mention_rep != nullptr && mention_rep->val.rows > 0, "fuse: empty mention rep");
    const int d = mention_rep->val.cols;
    const int k = static_cast<int>(candidate_reps.size());
    require(k >= 1, "fuse: need at least one candidate");
    require(static_cast<int>(order.size()) == k, "fuse: order size must equal candidate count");
    {
        std::vector<bool> seen(static_cast<std::size_t>(k), false);
        for (int b : order) {
            require(0 <= b && b < k && !seen[static_cast<std::size_t>(b)],
                    "fuse: order must be a permutation of candidate indices");
            seen[static_cast<std::size_t>(b)] = true;
        }
    }
    const int lp = candidate_reps.front()->val.rows;
    for (const auto& rep : candidate_reps) {
        require(rep->val.cols == d, "fuse: candidate width mismatch");
        require(rep->val.rows == lp, "fuse: candidate blocks must share prefix length");
    }
    const int lm = mention_rep->val.rows;
    require(lm + k * lp <= max_positions,
            "fuse: fused input exceeds max positions; lower the candidate count k");

    FusedInput out;
    out.mention_len = lm;
    out.k = k;
    out.prefix_len = lp;
    std::vector<ag::Var> parts;
    parts.reserve(static_cast<std::size_t>(k) + 1);
    parts.push_back(mention_rep);
    for (int b : order) parts.push_back(candidate_reps[static_cast<std::size_t>(b)]);
    out.rows = ag::concat_rows(parts);

    out.positions.reserve(static_cast<std::size_t>(lm + k * lp));
    out.map.reserve(static_cast<std::size_t>(lm + k * lp));
    for (int i = 0; i < lm; ++i) {
        out.positions.push_back(i);
        out.map.push_back(FusedRowRef{});
    }
    for (int b : order) {
        for (int i = 0; i < lp; ++i) {
            out.positions.push_back(lm + i);
            out.map.push_back(FusedRowRef{b, i});
        }
    }
    return out;
}

TokenScores score_tokens(Encoder& enc, const ag::Var& head_w, const ag::Var& head_b,
                         const FusedInput& fused, bool training, Rng& dropout_rng) {
    require(head_w->val.rows == enc.config().hidden && head_w->val.cols == 1,
            "score_tokens: head weight must be d x 1");
    require(head_b->val.rows == 1 && head_b->val.cols == 1, "score_tokens: head bias must be 1x1");
    ag::Var out = enc.encode_embeddings(fused.rows, fused.positions, training, dropout_rng);
    const int total = fused.mention_len + fused.k * fused.prefix_len;
    ag::Var cand = ag::slice_rows(out, fused.mention_len, total);
    ag::Var logits = ag::add_rowvec(ag::matmul(cand, head_w), head_b);

    TokenScores ts;
    ts.probs = ag::sigmoid(logits);
    ts.last_layer_rows = cand->val;
    ts.map.assign(fused.map.begin() + fused.mention_len, fused.map.end());
    ts.k = fused.k;
    ts.prefix_len = fused.prefix_len;
    return ts;
}

std::vector<std::vector<real>> TokenScores::per_candidate() const {
    std::vector<std::vector<real>> out(static_cast<std::size_t>(k),
                                       std::vector<real>(static_cast<std::size_t>(prefix_len), 0));
    for (std::size_t r = 0; r < map.size(); ++r)
        out[static_cast<std::size_t>(map[r].candidate)][static_cast<std::size_t>(map[r].prefix_pos)] =
            probs->val.at(static_cast<int>(r), 0);
    return out;
}

std::vector<real> TokenScores::pooled() const {
    std::vector<real> out(static_cast<std::size_t>(k), -1.0);
    for (std::size_t r = 0; r < map.size(); ++r) {
        const auto c = static_cast<std::size_t>(map[r].candidate);
        out[c] = std::max(out[c], probs->val.at(static_cast<int>(r), 0));
    }
    return out;
}

ag::Var bce_loss(const TokenScores& scores, int gold_candidate) {
    require(0 <= gold_candidate && gold_candidate < scores.k,
            "bce_loss: gold candidate index out of range");
    Matrix labels(static_cast<int>(scores.map.size()), 1);
    for (std::size_t r = 0; r < scores.map.size(); ++r)
        labels.at(static_cast<int>(r), 0) = scores.map[r].candidate == gold_candidate ? 1.0 : 0.0;
    return ag::bce_mean(scores.probs, labels);
}

RankedPrediction rank(const std::vector<real>& candidate_scores) {
    require(!candidate_scores.empty(), "rank: empty score list");
    RankedPrediction out;
    out.ranking.resize(candidate_scores.size());
    std::iota(out.ranking.begin(), out.ranking.end(), 0);
    std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](int a, int b) {
        if (candidate_scores[static_cast<std::size_t>(a)] !=
            candidate_scores[static_cast<std::size_t>(b)])
            return candidate_scores[static_cast<std::size_t>(a)] >
                   candidate_scores[static_cast<std::size_t>(b)];
        return a < b;
    });
    out.scores.reserve(out.ranking.size());
    for (int i : out.ranking) out.scores.push_back(candidate_scores[static_cast<std::size_t>(i)]);
    out.best = out.ranking.front();
    return out;
}

}  // namespace res
