#include <doctest.h>

#include <set>

#include "gradcheck.hpp"
#include "res/encoder.hpp"
#include "test_util.hpp"

using namespace res;

namespace {

EncoderConfig tiny_config() {
    EncoderConfig cfg;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.max_positions = 32;
    cfg.prefix_len = 2;
    cfg.max_segment_len = 12;
    cfg.vocab_size = 20;
    cfg.dropout = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("encoder config validation") {
    EncoderConfig cfg = tiny_config();
    cfg.validate();
    SUBCASE("heads must divide hidden") {
        cfg.heads = 3;
        CHECK(test::fails_with([&] { cfg.validate(); }, "divisible"));
    }
    SUBCASE("vocab must be set") {
        cfg.vocab_size = 0;
        CHECK(test::fails_with([&] { cfg.validate(); }, "vocab"));
    }
    SUBCASE("positions must cover an entity-read input") {
        cfg.max_positions = cfg.max_segment_len;
        CHECK(test::fails_with([&] { cfg.validate(); }, "max_positions"));
    }
}

TEST_CASE("encoder forward shape, finiteness and determinism") {
    Rng rng(3);
    Encoder enc(tiny_config(), rng);
    Rng drop(0);
    std::vector<int> ids = {2, 10, 11, 12, 3};
    ag::Var h = enc.encode_tokens(ids, false, drop);
    CHECK(h->val.rows == 5);
    CHECK(h->val.cols == 8);
    CHECK(h->val.all_finite());

    ag::Var again = enc.encode_tokens(ids, false, drop);
    CHECK(h->val.a == again->val.a);

    Rng rng2(3);
    Encoder enc2(tiny_config(), rng2);
    CHECK(enc2.encode_tokens(ids, false, drop)->val.a == h->val.a);
}

TEST_CASE("encoder rejects bad inputs") {
    Rng rng(3);
    Encoder enc(tiny_config(), rng);
    Rng drop(0);
    CHECK(test::fails_with([&] { enc.encode_tokens({}, false, drop); }, "empty"));
    CHECK(test::fails_with([&] { enc.encode_tokens({0, 99}, false, drop); }, "range"));
    std::vector<int> overlong(40, 7);
    CHECK(test::fails_with([&] { enc.encode_tokens(overlong, false, drop); }, "truncate"));

    Matrix x(3, 8);
    CHECK(test::fails_with([&] { enc.encode_embeddings(ag::constant(x), {0, 1}, false, drop); },
                           "position"));
    Matrix wide(3, 9);
    CHECK(test::fails_with(
        [&] { enc.encode_embeddings(ag::constant(wide), {0, 1, 2}, false, drop); }, "width"));
    CHECK(test::fails_with(
        [&] { enc.encode_embeddings(ag::constant(x), {0, 1, 77}, false, drop); }, "position"));
}

TEST_CASE("encode_embeddings matches encode_tokens given the same inputs") {
    Rng rng(5);
    Encoder enc(tiny_config(), rng);
    Rng drop(0);
    std::vector<int> ids = {4, 9, 18};
    ag::Var via_tokens = enc.encode_tokens(ids, false, drop);

    // hand-assemble the embedding rows and sequential positions
    Matrix rows(3, 8);
    const Matrix& table = enc.param("tok_emb")->val;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 8; ++j) rows.at(i, j) = table.at(ids[static_cast<size_t>(i)], j);
    ag::Var via_embeddings = enc.encode_embeddings(ag::constant(rows), {0, 1, 2}, false, drop);
    for (size_t i = 0; i < via_tokens->val.a.size(); ++i)
        CHECK(via_tokens->val.a[i] == doctest::Approx(via_embeddings->val.a[i]).epsilon(1e-12));
}

TEST_CASE("parameter names are unique and complete") {
    Rng rng(7);
    EncoderConfig cfg = tiny_config();
    cfg.layers = 3;
    Encoder enc(cfg, rng);
    std::set<std::string> names;
    for (const auto& [name, v] : enc.parameters()) {
        CHECK(names.insert(name).second);
        CHECK(v->requires_grad);
    }
    // embeddings + 16 per layer + final norm
    CHECK(names.size() == 2 + 3 * 16 + 2);
    CHECK(names.count("tok_emb") == 1);
    CHECK(names.count("L2.attn.wq") == 1);
    CHECK(names.count("final_ln.b") == 1);
    CHECK(test::fails_with([&] { enc.param("L9.attn.wq"); }, "L9.attn.wq"));
}

TEST_CASE("encoder gradients match finite differences") {
    Rng rng(11);
    Encoder enc(tiny_config(), rng);
    Rng drop(0);
    std::vector<int> ids = {2, 14, 9, 14, 3};
    Rng crng(21);
    auto build = [&] {
        crng = Rng(21);
        ag::Var h = enc.encode_tokens(ids, false, drop);
        ag::Var u = ag::constant(Matrix::randn(1, h->val.rows, crng, 1.0));
        ag::Var v = ag::constant(Matrix::randn(h->val.cols, 1, crng, 1.0));
        return ag::matmul(ag::matmul(u, h), v);
    };
    auto res = test::gradcheck(
        {enc.param("tok_emb"), enc.param("pos_emb"), enc.param("L0.attn.wq"),
         enc.param("L0.attn.bv"), enc.param("L0.ln1.g"), enc.param("L0.ff.w1"),
         enc.param("final_ln.b")},
        build, 1e-5, 24);
    CHECK(res.checked > 100);
    CHECK(res.max_rel < 1e-4);
}
