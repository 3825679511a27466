#include <doctest.h>

#include <algorithm>

#include "res/reading.hpp"
#include "test_util.hpp"

using namespace res;

namespace {

// Single-letter words tokenize to exactly one symbol each when no merges are
// trained, which makes token counts equal word counts in these layouts.
Tokenizer letters() {
    TokenizerConfig cfg;
    cfg.prefix_len = 3;
    cfg.max_merges = 0;
    return Tokenizer::train({"a b c d e f g h i j k l m n o p q r s t u v w x y z"}, cfg);
}

MentionRecord mention(const std::string& left, const std::string& surface,
                      const std::string& right) {
    MentionRecord m;
    m.mention_id = "dom/m1";
    m.domain = "dom";
    m.surface = surface;
    m.left_context = left;
    m.right_context = right;
    m.gold_entity_id = "dom/e1";
    return m;
}

}  // namespace

TEST_CASE("mention input layout: [CLS] left [START] surface [END] right [SEP]") {
    Tokenizer tok = letters();
    MentionInput mi = build_mention_input(tok, mention("a b c", "d e", "f g"), 32);
    REQUIRE(mi.ids.size() == 11);
    CHECK(mi.ids.front() == Tokenizer::kCls);
    CHECK(mi.ids.back() == Tokenizer::kSep);
    CHECK(mi.ids[4] == Tokenizer::kStart);
    CHECK(mi.ids[7] == Tokenizer::kEnd);
    CHECK(mi.start_index == 4);
    CHECK(mi.end_index == 7);
    CHECK(std::count(mi.ids.begin(), mi.ids.end(), Tokenizer::kStart) == 1);
    CHECK(std::count(mi.ids.begin(), mi.ids.end(), Tokenizer::kEnd) == 1);
    CHECK(tok.decode(mi.ids) == "a b c d e f g");

    std::vector<int> core = mi.core();
    REQUIRE(core.size() == 9);
    CHECK(core.front() != Tokenizer::kCls);
    CHECK(core.back() != Tokenizer::kSep);
    CHECK(core[3] == Tokenizer::kStart);
}

TEST_CASE("mention contexts trim alternately from the far ends") {
    Tokenizer tok = letters();
    // budget 11 = 4 specials + surface 1 + keep 6; both contexts lose two
    MentionInput mi = build_mention_input(tok, mention("a b c d e", "x", "f g h i j"), 11);
    CHECK(tok.decode(mi.ids) == "c d e x f g h");
    CHECK(mi.ids.size() == 11);

    // short left side: the far right end absorbs the rest of the cut
    MentionInput mi2 = build_mention_input(tok, mention("a", "x", "d e f g h"), 9);
    CHECK(tok.decode(mi2.ids) == "x d e f g");

    // no context at all still fits any legal budget
    MentionInput mi3 = build_mention_input(tok, mention("", "x", ""), 5);
    CHECK(mi3.ids.size() == 5);
    CHECK(tok.decode(mi3.ids) == "x");
}

TEST_CASE("overlong surface or empty surface fail with the mention id") {
    Tokenizer tok = letters();
    CHECK(test::fails_with([&] { build_mention_input(tok, mention("", "a b c", ""), 6); },
                           "dom/m1"));
    CHECK(test::fails_with([&] { build_mention_input(tok, mention("a", "", "b"), 16); },
                           "dom/m1"));
}

TEST_CASE("entity read input: prefix block, description, separators, mention core") {
    Tokenizer tok = letters();
    MentionInput mi = build_mention_input(tok, mention("a", "b", "c"), 16);
    EntityRecord e;
    e.entity_id = "dom/e1";
    e.title = "d e";
    e.description = "d e f g";

    std::vector<int> ids = build_entity_read_input(tok, e, mi, 16);
    // 3 prefix + 4 description + SEP + 5 core + SEP
    REQUIRE(ids.size() == 14);
    for (int i = 0; i < 3; ++i) CHECK(ids[static_cast<size_t>(i)] == tok.prefix_id(i));
    CHECK(ids[7] == Tokenizer::kSep);
    CHECK(ids.back() == Tokenizer::kSep);
    std::vector<int> core = mi.core();
    CHECK(std::equal(core.begin(), core.end(), ids.begin() + 8));

    // the description segment honors its budget
    std::vector<int> cut = build_entity_read_input(tok, e, mi, 2);
    REQUIRE(cut.size() == 12);
    CHECK(cut[5] == Tokenizer::kSep);
    CHECK(test::fails_with(
        [&] {
            EntityRecord blank = e;
            blank.description = " ";
            build_entity_read_input(tok, blank, mi, 16);
        },
        "dom/e1"));
}

TEST_CASE("read_entity returns the prefix rows of the full pass") {
    Tokenizer tok = letters();
    EncoderConfig cfg;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.max_positions = 64;
    cfg.prefix_len = tok.prefix_len();
    cfg.max_segment_len = 16;
    cfg.vocab_size = tok.vocab_size();
    cfg.dropout = 0;
    Rng rng(9);
    Encoder enc(cfg, rng);
    Rng drop(0);

    MentionInput mi = build_mention_input(tok, mention("a b", "c", "d"), 16);
    EntityRecord e;
    e.entity_id = "dom/e1";
    e.title = "c";
    e.description = "c f g";
    std::vector<int> ids = build_entity_read_input(tok, e, mi, 8);

    ag::Var pe = read_entity(enc, ids, false, drop);
    CHECK(pe->val.rows == 3);
    CHECK(pe->val.cols == 8);
    ag::Var full = enc.encode_tokens(ids, false, drop);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 8; ++j) CHECK(pe->val.at(i, j) == full->val.at(i, j));

    ag::Var hm = read_mention(enc, mi, false, drop);
    CHECK(hm->val.rows == static_cast<int>(mi.ids.size()));
}

TEST_CASE("layout_dump prints one line per token") {
    Tokenizer tok = letters();
    MentionInput mi = build_mention_input(tok, mention("a", "b", "c"), 16);
    std::string dump = layout_dump(tok, mi.ids);
    CHECK(std::count(dump.begin(), dump.end(), '\n') == static_cast<long>(mi.ids.size()));
    CHECK(dump.find("[START]") != std::string::npos);
    CHECK(dump.find("0: ") == 0);
}
