#pragma once

#include <string>
#include <vector>

#include "res/corpus.hpp"
#include "res/encoder.hpp"
#include "res/tokenizer.hpp"

namespace res {

// [CLS] ctxt_l [START] surface [END] ctxt_r [SEP], fitted to a token budget.
// Overlong contexts are trimmed alternately from the far left and far right
// ends so the kept window stays centered on the mention.
struct MentionInput {
    std::vector<int> ids;
    int start_index = -1;  // index of [START]
    int end_index = -1;    // index of [END]

    // The ids without the leading [CLS] and trailing [SEP]; this is the
    // mention segment spliced into entity-read and cross-encoder inputs.
    std::vector<int> core() const;
};

MentionInput build_mention_input(const Tokenizer& tok, const MentionRecord& mention, int budget);

// [PRE_1..PRE_Lp] entity_description [SEP] mention_core [SEP]; the entity
// segment is truncated to entity_budget tokens.
std::vector<int> build_entity_read_input(const Tokenizer& tok, const EntityRecord& entity,
                                         const MentionInput& mention, int entity_budget);

// Full last-layer representation of the mention input, one row per token.
ag::Var read_mention(Encoder& enc, const MentionInput& mention, bool training, Rng& dropout_rng);

// Mention-aware entity representation: the first prefix_len output rows of
// the entity-read forward pass.
ag::Var read_entity(Encoder& enc, const std::vector<int>& entity_read_ids, bool training,
                    Rng& dropout_rng);

// One "index: id text" line per token, for layout debugging.
std::string layout_dump(const Tokenizer& tok, const std::vector<int>& ids);

}  // namespace res
