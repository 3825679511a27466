#include "res/reading.hpp"

#include <sstream>

namespace res {

std::vector<int> MentionInput::core() const {
    require(ids.size() >= 2, "mention input too short");
    return std::vector<int>(ids.begin() + 1, ids.end() - 1);
}

MentionInput build_mention_input(const Tokenizer& tok, const MentionRecord& mention, int budget) {
    const std::vector<int> surface = tok.encode(mention.surface);
    require(!surface.empty(), "mention surface tokenizes to nothing: " + mention.mention_id);
    const int specials = 4;  // [CLS] [START] [END] [SEP]
    require(static_cast<int>(surface.size()) + specials <= budget,
            "mention surface alone exceeds the token budget: " + mention.mention_id);
    std::vector<int> left = tok.encode(mention.left_context);
    std::vector<int> right = tok.encode(mention.right_context);

    const std::size_t keep =
        static_cast<std::size_t>(budget - specials) - surface.size();
    std::size_t l0 = 0;
    std::size_t r1 = right.size();
    bool drop_left_side = true;
    while ((left.size() - l0) + r1 > keep) {
        const bool can_left = left.size() - l0 > 0;
        const bool can_right = r1 > 0;
        if (can_left && (drop_left_side || !can_right))
            ++l0;
        else
            --r1;
        drop_left_side = !drop_left_side;
    }

    MentionInput out;
    out.ids.reserve(static_cast<std::size_t>(budget));
    out.ids.push_back(Tokenizer::kCls);
    out.ids.insert(out.ids.end(), left.begin() + static_cast<std::ptrdiff_t>(l0), left.end());
    out.start_index = static_cast<int>(out.ids.size());
    out.ids.push_back(Tokenizer::kStart);
    out.ids.insert(out.ids.end(), surface.begin(), surface.end());
    out.end_index = static_cast<int>(out.ids.size());
    out.ids.push_back(Tokenizer::kEnd);
    out.ids.insert(out.ids.end(), right.begin(), right.begin() + static_cast<std::ptrdiff_t>(r1));
    out.ids.push_back(Tokenizer::kSep);
    return out;
}

std::vector<int> build_entity_read_input(const Tokenizer& tok, const EntityRecord& entity,
                                         const MentionInput& mention, int entity_budget) {
    require(entity_budget >= 1, "entity budget must be >= 1");
    std::vector<int> desc = tok.encode(entity.description);
    require(!desc.empty(), "entity description tokenizes to nothing: " + entity.entity_id);
    if (static_cast<int>(desc.size()) > entity_budget)
        desc.resize(static_cast<std::size_t>(entity_budget));
    std::vector<int> out;
    const std::vector<int> core = mention.core();
    out.reserve(static_cast<std::size_t>(tok.prefix_len()) + desc.size() + core.size() + 2);
    for (int i = 0; i < tok.prefix_len(); ++i) out.push_back(tok.prefix_id(i));
    out.insert(out.end(), desc.begin(), desc.end());
    out.push_back(Tokenizer::kSep);
    out.insert(out.end(), core.begin(), core.end());
    out.push_back(Tokenizer::kSep);
    return out;
}

ag::Var read_mention(Encoder& enc, const MentionInput& mention, bool training, Rng& dropout_rng) {
    return enc.encode_tokens(mention.ids, training, dropout_rng);
}

ag::Var read_entity(Encoder& enc, const std::vector<int>& entity_read_ids, bool training,
                    Rng& dropout_rng) {
    const int lp = enc.config().prefix_len;
    require(static_cast<int>(entity_read_ids.size()) > lp, "entity read input too short");
    ag::Var h = enc.encode_tokens(entity_read_ids, training, dropout_rng);
    return ag::slice_rows(h, 0, lp);
}

std::string layout_dump(const Tokenizer& tok, const std::vector<int>& ids) {
    std::ostringstream os;
    for (std::size_t i = 0; i < ids.size(); ++i)
        os << i << ": " << ids[i] << " " << tok.token_text(ids[i]) << "\n";
    return os.str();
}

}  // namespace res
