#include <doctest.h>

#include <set>

#include "res/corpus.hpp"
#include "res/textio.hpp"
#include "test_util.hpp"

using namespace res;

TEST_CASE("partition validate rejects overlapping splits") {
    DomainPartition p;
    p.train_domains = {"a", "b"};
    p.valid_domains = {"c"};
    p.test_domains = {"b"};
    CHECK(test::fails_with([&] { p.validate(); }, "b"));
    p.test_domains = {"d"};
    p.validate();
    CHECK(p.split_of("a") == Split::Train);
    CHECK(p.split_of("c") == Split::Valid);
    CHECK(p.split_of("d") == Split::Test);
    CHECK(test::fails_with([&] { p.split_of("zzz"); }, "zzz"));
}

TEST_CASE("synthetic world is deterministic in its seed") {
    SynthConfig cfg;
    cfg.seed = 11;
    cfg.n_domains = 4;
    cfg.entities_per_domain = 12;
    cfg.mentions_per_domain = 10;
    Dataset a = generate_synthetic_world(cfg);
    Dataset b = generate_synthetic_world(cfg);
    CHECK(a.mentions == b.mentions);
    CHECK(a.partition == b.partition);
    REQUIRE(a.kbs.size() == 4);
    for (const auto& [dom, kb] : a.kbs) CHECK(kb.entities == b.kbs.at(dom).entities);

    cfg.seed = 12;
    Dataset c = generate_synthetic_world(cfg);
    CHECK(a.mentions != c.mentions);
}

TEST_CASE("easy world: surface equals the gold title, titles unique per domain") {
    SynthConfig cfg;
    cfg.n_domains = 4;
    cfg.entities_per_domain = 16;
    cfg.mentions_per_domain = 12;
    Dataset ds = generate_synthetic_world(cfg);
    for (const auto& m : ds.mentions) CHECK(m.surface == ds.gold_entity(m).title);
    for (const auto& [dom, kb] : ds.kbs) {
        std::set<std::string> titles;
        for (const auto& e : kb.entities) titles.insert(e.title);
        CHECK(titles.size() == kb.entities.size());
    }
    // 4 domains split 2/1/1
    CHECK(ds.partition.train_domains.size() == 2);
    CHECK(ds.partition.valid_domains.size() == 1);
    CHECK(ds.partition.test_domains.size() == 1);
}

TEST_CASE("hard world: surface is a shared title prefix") {
    SynthConfig cfg;
    cfg.level = Confusability::Hard;
    cfg.n_domains = 4;
    cfg.entities_per_domain = 12;
    cfg.mentions_per_domain = 10;
    Dataset ds = generate_synthetic_world(cfg);
    for (const auto& m : ds.mentions) {
        const EntityRecord& gold = ds.gold_entity(m);
        // surface + one member word = title
        REQUIRE(gold.title.size() > m.surface.size());
        CHECK(gold.title.compare(0, m.surface.size(), m.surface) == 0);
        // at least one other entity shares the prefix
        int sharing = 0;
        for (const auto& e : ds.kbs.at(m.domain).entities)
            if (e.title.compare(0, m.surface.size(), m.surface) == 0) ++sharing;
        CHECK(sharing >= 2);
    }
}

TEST_CASE("dataset save/load round trip") {
    SynthConfig cfg;
    cfg.n_domains = 4;
    cfg.entities_per_domain = 8;
    cfg.mentions_per_domain = 6;
    Dataset ds = generate_synthetic_world(cfg);
    test::TempDir tmp("dataset");
    save_dataset(ds, tmp.str());
    Dataset back = load_dataset(tmp.str());
    CHECK(back.mentions == ds.mentions);
    CHECK(back.partition == ds.partition);
    REQUIRE(back.kbs.size() == ds.kbs.size());
    for (const auto& [dom, kb] : ds.kbs) CHECK(back.kbs.at(dom).entities == kb.entities);
}

TEST_CASE("zeshel loader reads pre-split windows and token offsets") {
    test::TempDir tmp("zeshel");
    write_file_atomic(
        tmp.file("documents.jsonl"),
        R"({"document_id":"E1","title":"Blue Lake","text":"Blue Lake is a lake of pure melt water","domain":"lakes"})"
        "\n"
        R"({"document_id":"E2","title":"Blue Hill","text":"Blue Hill rises above the lake","domain":"lakes"})"
        "\n");
    write_file_atomic(
        tmp.file("mentions.jsonl"),
        // window form
        R"({"mention_id":"m1","surface":"Blue Lake","left_context":"they sailed to","right_context":"last summer","label_document_id":"E1","corpus":"lakes"})"
        "\n"
        // token-offset form: tokens 2..3 of E2's text, inclusive end
        R"({"mention_id":"m2","context_document_id":"E2","start_index":2,"end_index":3,"label_document_id":"E2","corpus":"lakes"})"
        "\n");
    write_file_atomic(tmp.file("partition.cfg"),
                      "[train]\ndomains = lakes\n[valid]\ndomains =\n[test]\ndomains =\n");

    Dataset ds = load_zeshel(tmp.file("documents.jsonl"), tmp.file("mentions.jsonl"),
                             tmp.file("partition.cfg"));
    REQUIRE(ds.mentions.size() == 2);
    CHECK(ds.kbs.at("lakes").entity("E1").title == "Blue Lake");

    const MentionRecord& m1 = ds.mentions[0];
    CHECK(m1.surface == "Blue Lake");
    CHECK(m1.left_context == "they sailed to");
    CHECK(m1.gold_entity_id == "E1");

    const MentionRecord& m2 = ds.mentions[1];
    CHECK(m2.surface == "rises above");
    CHECK(m2.left_context == "Blue Hill");
    CHECK(m2.right_context == "the lake");
    ds.validate();
}

TEST_CASE("dataset validate spots dangling gold ids") {
    SynthConfig cfg;
    cfg.n_domains = 4;
    cfg.entities_per_domain = 4;
    cfg.mentions_per_domain = 3;
    Dataset ds = generate_synthetic_world(cfg);
    ds.mentions[0].gold_entity_id = "world_00/e9999";
    CHECK(test::fails_with([&] { ds.validate(); }, "e9999"));
}
