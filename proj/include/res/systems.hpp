#pragma once

#include <string>
#include <utility>
#include <vector>

#include "res/corpus.hpp"
#include "res/encoder.hpp"
#include "res/reading.hpp"
#include "res/selecting.hpp"
#include "res/tokenizer.hpp"

namespace res {

enum class SystemKind { Res, ReadingOnly, CrossEncoder };

std::string system_name(SystemKind kind);
SystemKind system_from_name(const std::string& name);

// One trainable ranking system: the full read-and-select model, the
// reading-only ablation (candidates scored independently from their prefix
// rows), or the cross-encoder baseline (one joint pass per candidate, [CLS]
// score, softmax-over-candidates training loss). All three share the
// tokenizer, encoder, input builders, and ranking plumbing; only the scoring
// path differs.
class System {
  public:
    System(SystemKind kind, EncoderConfig cfg, Tokenizer tok, std::uint64_t init_seed);

    SystemKind kind() const { return kind_; }
    Encoder& encoder() { return enc_; }
    const Encoder& encoder() const { return enc_; }
    const Tokenizer& tokenizer() const { return tok_; }
    ag::Var head_w() const { return head_w_; }
    ag::Var head_b() const { return head_b_; }

    // Encoder parameters plus head.w / head.b.
    std::vector<std::pair<std::string, ag::Var>> named_parameters() const;
    std::vector<ag::Var> trainable() const;

    // Training-mode loss for one (mention, candidates, gold) instance. The
    // full model draws a fresh random candidate order from order_rng; the
    // baselines score candidates independently, so order cannot matter.
    ag::Var instance_loss(const MentionRecord& mention,
                          const std::vector<const EntityRecord*>& candidates, int gold_index,
                          Rng& order_rng, Rng& dropout_rng);

    // Inference-mode ranking in the given (retrieval) candidate order.
    RankedPrediction rank_candidates(const MentionRecord& mention,
                                     const std::vector<const EntityRecord*>& candidates);

    // Inference-mode selecting pass with an explicit block order; full model
    // only. Exposed for the order-equivariance checks.
    TokenScores res_scores(const MentionRecord& mention,
                           const std::vector<const EntityRecord*>& candidates,
                           const std::vector<int>& order);

  private:
    ag::Var res_loss(const MentionRecord&, const std::vector<const EntityRecord*>&, int gold,
                     const std::vector<int>& order, bool training, Rng& dropout_rng);
    std::vector<ag::Var> reading_only_probs(const MentionRecord&,
                                            const std::vector<const EntityRecord*>&, bool training,
                                            Rng& dropout_rng);
    ag::Var cross_encoder_logit(const MentionInput&, const EntityRecord&, bool training,
                                Rng& dropout_rng);

    SystemKind kind_;
    Tokenizer tok_;
    Encoder enc_;
    ag::Var head_w_;
    ag::Var head_b_;
};

}  // namespace res
