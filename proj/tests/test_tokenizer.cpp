#include <doctest.h>

#include <set>

#include "res/textio.hpp"
#include "res/tokenizer.hpp"
#include "test_util.hpp"

using namespace res;

namespace {

std::vector<std::string> corpus() {
    return {
        "the blue lake lies north of the old mill",
        "the old mill grinds by the blue lake",
        "iron fort guards the north road",
        "the north road runs from the mill to the fort",
        "blue hill rises over the lake and the road",
    };
}

Tokenizer trained(int merges = 200) {
    TokenizerConfig cfg;
    cfg.prefix_len = 3;
    cfg.max_merges = merges;
    cfg.min_pair_count = 2;
    return Tokenizer::train(corpus(), cfg);
}

}  // namespace

TEST_CASE("encode/decode round trips up to whitespace normalization") {
    Tokenizer tok = trained();
    for (const std::string& text : corpus()) CHECK(tok.decode(tok.encode(text)) == text);
    CHECK(tok.decode(tok.encode("  the   blue\tlake ")) == "the blue lake");
    // words never seen in training still round trip via character symbols
    CHECK(tok.decode(tok.encode("unseen zumthor words")) == "unseen zumthor words");
    CHECK(tok.encode("").empty());
}

TEST_CASE("non-printable bytes become [UNK] and survive decode visibly") {
    Tokenizer tok = trained();
    auto ids = tok.encode("caf\xc3\xa9 lake");
    CHECK(std::count(ids.begin(), ids.end(), Tokenizer::kUnk) > 0);
    std::string out = tok.decode(ids);
    CHECK(out.find("[UNK]") != std::string::npos);
    CHECK(out.find("lake") != std::string::npos);
}

TEST_CASE("plain encode emits no special or prefix ids") {
    Tokenizer tok = trained();
    for (const std::string& text : corpus())
        for (int id : tok.encode(text)) {
            CHECK(!tok.is_special(id));
            CHECK(id < tok.vocab_size());
            CHECK(id >= tok.special_count());
        }
}

TEST_CASE("merges compress frequent words to single tokens") {
    Tokenizer none = trained(0);
    Tokenizer full = trained(500);
    const std::string text = "the blue lake";
    CHECK(full.encode(text).size() < none.encode(text).size());
    // "the" occurs nine times; with merges it must be one token
    CHECK(full.encode("the").size() == 1);
}

TEST_CASE("training is deterministic") {
    Tokenizer a = trained();
    Tokenizer b = trained();
    CHECK(a.serialized() == b.serialized());
    CHECK(a.vocab_hash() == b.vocab_hash());
}

TEST_CASE("serialization round trips encodings and hash") {
    Tokenizer tok = trained();
    Tokenizer back = Tokenizer::from_serialized(tok.serialized());
    CHECK(back.vocab_size() == tok.vocab_size());
    CHECK(back.vocab_hash() == tok.vocab_hash());
    CHECK(back.prefix_len() == tok.prefix_len());
    for (const std::string& text : corpus()) CHECK(back.encode(text) == tok.encode(text));
    CHECK(test::fails_with([] { Tokenizer::from_serialized("garbage"); }, "tokenizer"));
}

TEST_CASE("prefix and special ids are laid out contiguously") {
    Tokenizer tok = trained();
    CHECK(tok.prefix_len() == 3);
    std::set<int> seen;
    for (int i = 0; i < tok.prefix_len(); ++i) {
        int id = tok.prefix_id(i);
        CHECK(tok.is_special(id));
        seen.insert(id);
    }
    CHECK(seen.size() == 3);
    CHECK(tok.special_count() == 6 + 3);
    CHECK(*seen.begin() == 6);
    CHECK(test::fails_with([&] { tok.prefix_id(3); }, "prefix"));
    CHECK(tok.token_text(Tokenizer::kCls) == "[CLS]");
    CHECK(tok.token_text(Tokenizer::kSep) == "[SEP]");
}

TEST_CASE("decode skips structural specials") {
    Tokenizer tok = trained();
    std::vector<int> ids = {Tokenizer::kCls};
    for (int id : tok.encode("blue lake")) ids.push_back(id);
    ids.push_back(Tokenizer::kSep);
    CHECK(tok.decode(ids) == "blue lake");
}

TEST_CASE("vocab hash tracks the merge list") {
    TokenizerConfig cfg;
    cfg.max_merges = 10;
    Tokenizer small = Tokenizer::train(corpus(), cfg);
    cfg.max_merges = 200;
    Tokenizer big = Tokenizer::train(corpus(), cfg);
    CHECK(small.vocab_hash() != big.vocab_hash());
}
