#include "res/systems.hpp"

#include <algorithm>
#include <numeric>

namespace res {

std::string system_name(SystemKind kind) {
    switch (kind) {
        case SystemKind::Res: return "res";
        case SystemKind::ReadingOnly: return "res-no-select";
        case SystemKind::CrossEncoder: return "cross-encoder";
    }
    fail("unreachable system kind");
}

SystemKind system_from_name(const std::string& name) {
    if (name == "res") return SystemKind::Res;
    if (name == "res-no-select") return SystemKind::ReadingOnly;
    if (name == "cross-encoder") return SystemKind::CrossEncoder;
    fail("unknown system: " + name + " (expected res, res-no-select, or cross-encoder)");
}

System::System(SystemKind kind, EncoderConfig cfg, Tokenizer tok, std::uint64_t init_seed)
    : kind_(kind), tok_(std::move(tok)) {
    cfg.vocab_size = tok_.vocab_size();
    require(cfg.prefix_len == tok_.prefix_len(),
            "system: encoder prefix_len must match the tokenizer's");
    Rng rng(init_seed);
    enc_ = Encoder(cfg, rng);
    head_w_ = ag::param(Matrix::randn(cfg.hidden, 1, rng, 0.02));
    head_b_ = ag::param(Matrix::zeros(1, 1));
}

std::vector<std::pair<std::string, ag::Var>> System::named_parameters() const {
    auto out = enc_.parameters();
    out.emplace_back("head.w", head_w_);
    out.emplace_back("head.b", head_b_);
    return out;
}

std::vector<ag::Var> System::trainable() const {
    std::vector<ag::Var> out;
    for (const auto& [name, v] : named_parameters()) out.push_back(v);
    return out;
}

ag::Var System::res_loss(const MentionRecord& mention,
                         const std::vector<const EntityRecord*>& candidates, int gold,
                         const std::vector<int>& order, bool training, Rng& dropout_rng) {
    const auto& cfg = enc_.config();
    MentionInput mi = build_mention_input(tok_, mention, cfg.max_segment_len);
    ag::Var hm = read_mention(enc_, mi, training, dropout_rng);
    std::vector<ag::Var> reps;
    reps.reserve(candidates.size());
    for (const EntityRecord* e : candidates)
        reps.push_back(read_entity(
            enc_, build_entity_read_input(tok_, *e, mi, cfg.max_segment_len), training,
            dropout_rng));
    FusedInput fused = fuse(hm, reps, order, cfg.max_positions);
    TokenScores ts = score_tokens(enc_, head_w_, head_b_, fused, training, dropout_rng);
    return bce_loss(ts, gold);
}

std::vector<ag::Var> System::reading_only_probs(const MentionRecord& mention,
                                                const std::vector<const EntityRecord*>& candidates,
                                                bool training, Rng& dropout_rng) {
    const auto& cfg = enc_.config();
    MentionInput mi = build_mention_input(tok_, mention, cfg.max_segment_len);
    std::vector<ag::Var> probs;
    probs.reserve(candidates.size());
    for (const EntityRecord* e : candidates) {
        ag::Var p = read_entity(enc_, build_entity_read_input(tok_, *e, mi, cfg.max_segment_len),
                                training, dropout_rng);
        probs.push_back(ag::sigmoid(ag::add_rowvec(ag::matmul(p, head_w_), head_b_)));
    }
    return probs;
}

ag::Var System::cross_encoder_logit(const MentionInput& mention, const EntityRecord& entity,
                                    bool training, Rng& dropout_rng) {
    const auto& cfg = enc_.config();
    std::vector<int> desc = tok_.encode(entity.description);
    require(!desc.empty(), "entity description tokenizes to nothing: " + entity.entity_id);
    if (static_cast<int>(desc.size()) > cfg.max_segment_len)
        desc.resize(static_cast<std::size_t>(cfg.max_segment_len));
    std::vector<int> ids;
    const std::vector<int> core = mention.core();
    ids.reserve(core.size() + desc.size() + 3);
    ids.push_back(Tokenizer::kCls);
    ids.insert(ids.end(), core.begin(), core.end());
    ids.push_back(Tokenizer::kSep);
    ids.insert(ids.end(), desc.begin(), desc.end());
    ids.push_back(Tokenizer::kSep);
    ag::Var h = enc_.encode_tokens(ids, training, dropout_rng);
    return ag::add_rowvec(ag::matmul(ag::slice_rows(h, 0, 1), head_w_), head_b_);
}

ag::Var System::instance_loss(const MentionRecord& mention,
                              const std::vector<const EntityRecord*>& candidates, int gold_index,
                              Rng& order_rng, Rng& dropout_rng) {
    const int k = static_cast<int>(candidates.size());
    require(k >= 1, "instance_loss: no candidates");
    require(0 <= gold_index && gold_index < k, "instance_loss: gold index out of range");
    switch (kind_) {
        case SystemKind::Res:
            return res_loss(mention, candidates, gold_index, order_rng.permutation(k), true,
                            dropout_rng);
        case SystemKind::ReadingOnly: {
            std::vector<ag::Var> probs = reading_only_probs(mention, candidates, true, dropout_rng);
            ag::Var flat = ag::concat_rows(probs);
            const int lp = enc_.config().prefix_len;
            Matrix labels = Matrix::zeros(k * lp, 1);
            for (int i = 0; i < lp; ++i) labels.at(gold_index * lp + i, 0) = 1.0;
            return ag::bce_mean(flat, labels);
        }
        case SystemKind::CrossEncoder: {
            const auto& cfg = enc_.config();
            MentionInput mi = build_mention_input(tok_, mention, cfg.max_segment_len);
            std::vector<ag::Var> logits;
            logits.reserve(candidates.size());
            for (const EntityRecord* e : candidates)
                logits.push_back(cross_encoder_logit(mi, *e, true, dropout_rng));
            return ag::softmax_ce(ag::concat_cols(logits), gold_index);
        }
    }
    fail("unreachable system kind");
}

RankedPrediction System::rank_candidates(const MentionRecord& mention,
                                         const std::vector<const EntityRecord*>& candidates) {
    require(!candidates.empty(), "rank_candidates: no candidates");
    ag::NoGradGuard ng;
    Rng idle(0);
    const int k = static_cast<int>(candidates.size());
    std::vector<real> scores;
    switch (kind_) {
        case SystemKind::Res: {
            std::vector<int> order(static_cast<std::size_t>(k));
            std::iota(order.begin(), order.end(), 0);
            const auto& cfg = enc_.config();
            MentionInput mi = build_mention_input(tok_, mention, cfg.max_segment_len);
            ag::Var hm = read_mention(enc_, mi, false, idle);
            std::vector<ag::Var> reps;
            reps.reserve(candidates.size());
            for (const EntityRecord* e : candidates)
                reps.push_back(read_entity(
                    enc_, build_entity_read_input(tok_, *e, mi, cfg.max_segment_len), false, idle));
            FusedInput fused = fuse(hm, reps, order, cfg.max_positions);
            scores = score_tokens(enc_, head_w_, head_b_, fused, false, idle).pooled();
            break;
        }
        case SystemKind::ReadingOnly: {
            std::vector<ag::Var> probs = reading_only_probs(mention, candidates, false, idle);
            scores.reserve(probs.size());
            for (const auto& p : probs)
                scores.push_back(*std::max_element(p->val.a.begin(), p->val.a.end()));
            break;
        }
        case SystemKind::CrossEncoder: {
            const auto& cfg = enc_.config();
            MentionInput mi = build_mention_input(tok_, mention, cfg.max_segment_len);
            scores.reserve(candidates.size());
            for (const EntityRecord* e : candidates)
                scores.push_back(cross_encoder_logit(mi, *e, false, idle)->val.at(0, 0));
            break;
        }
    }
    return rank(scores);
}

TokenScores System::res_scores(const MentionRecord& mention,
                               const std::vector<const EntityRecord*>& candidates,
                               const std::vector<int>& order) {
    require(kind_ == SystemKind::Res, "res_scores: full model only");
    ag::NoGradGuard ng;
    Rng idle(0);
    const auto& cfg = enc_.config();
    MentionInput mi = build_mention_input(tok_, mention, cfg.max_segment_len);
    ag::Var hm = read_mention(enc_, mi, false, idle);
    std::vector<ag::Var> reps;
    reps.reserve(candidates.size());
    for (const EntityRecord* e : candidates)
        reps.push_back(read_entity(enc_, build_entity_read_input(tok_, *e, mi, cfg.max_segment_len),
                                   false, idle));
    FusedInput fused = fuse(hm, reps, order, cfg.max_positions);
    return score_tokens(enc_, head_w_, head_b_, fused, false, idle);
}

}  // namespace res
