#include <doctest.h>

#include <cmath>
#include <fstream>

#include "res/checkpoint.hpp"
#include "res/textio.hpp"
#include "res/training.hpp"
#include "test_util.hpp"

using namespace res;

namespace {

// A complete toy pipeline state: tiny world, BM25-free candidate sets that
// just list every entity of the mention's domain in id order.
struct Toy {
    Dataset ds;
    std::unordered_map<std::string, CandidateSet> cands;
    TrainSetup setup;

    Toy() {
        SynthConfig scfg;
        scfg.seed = 3;
        scfg.n_domains = 4;
        scfg.entities_per_domain = 6;
        scfg.mentions_per_domain = 8;
        ds = generate_synthetic_world(scfg);
        for (const auto& m : ds.mentions) {
            CandidateSet set;
            set.mention_id = m.mention_id;
            set.domain = m.domain;
            real score = 100;
            for (const auto& e : ds.kbs.at(m.domain).entities)
                set.candidates.push_back({e.entity_id, score -= 1});
            cands[m.mention_id] = set;
        }
        setup = setup_from_preset("desk");
        setup.encoder.hidden = 16;
        setup.encoder.layers = 1;
        setup.encoder.heads = 2;
        setup.encoder.max_positions = 96;
        setup.encoder.max_segment_len = 24;
        setup.tokenizer.max_merges = 60;
        setup.train.epochs = 2;
        setup.train.batch_size = 4;
        setup.train.candidates_per_instance = 4;
    }

    System make_system(SystemKind kind) const {
        std::vector<std::string> texts;
        for (const auto& dom : ds.partition.train_domains)
            for (const auto& e : ds.kbs.at(dom).entities)
                texts.push_back(e.title + " " + e.description);
        Tokenizer tok = Tokenizer::train(texts, setup.tokenizer);
        EncoderConfig cfg = setup.encoder;
        cfg.vocab_size = tok.vocab_size();
        return System(kind, cfg, tok, 77);
    }
};

}  // namespace

TEST_CASE("presets carry the documented hyperparameters") {
    TrainSetup desk = setup_from_preset("desk");
    CHECK(desk.encoder.hidden == 128);
    CHECK(desk.encoder.layers == 4);
    CHECK(desk.encoder.max_segment_len == 64);
    CHECK(desk.train.epochs == 10);

    TrainSetup paper = setup_from_preset("paper");
    CHECK(paper.encoder.hidden == 768);
    CHECK(paper.encoder.layers == 12);
    CHECK(paper.encoder.max_positions == 1024);
    CHECK(paper.encoder.max_segment_len == 256);
    CHECK(paper.train.lr == doctest::Approx(4e-5));
    CHECK(paper.train.batch_size == 4);
    CHECK(paper.train.epochs == 4);
    CHECK(paper.train.candidates_per_instance == 56);

    CHECK(test::fails_with([] { setup_from_preset("laptop"); }, "laptop"));
}

TEST_CASE("config overrides reach every layer of the setup") {
    TrainSetup s = setup_from_preset("desk");
    Config cfg = Config::parse(
        "[encoder]\nhidden = 32\nlayers = 2\nprefix_len = 4\n"
        "[tokenizer]\nmax_merges = 123\n"
        "[train]\nlr = 0.5\nepochs = 3\ncandidates = 6\nseed = 42\n");
    apply_overrides(s, cfg);
    CHECK(s.encoder.hidden == 32);
    CHECK(s.encoder.layers == 2);
    CHECK(s.encoder.prefix_len == 4);
    CHECK(s.tokenizer.prefix_len == 4);  // mirrors the encoder
    CHECK(s.tokenizer.max_merges == 123);
    CHECK(s.train.lr == doctest::Approx(0.5));
    CHECK(s.train.epochs == 3);
    CHECK(s.train.candidates_per_instance == 6);
    CHECK(s.train.seed == 42);
}

TEST_CASE("build_instances keeps gold plus the highest-ranked negatives") {
    Toy toy;
    auto instances = build_instances(toy.ds, toy.cands, 3, 0);
    // every train mention is usable: the synthetic sets contain all entities
    size_t train_mentions = toy.ds.mentions_in_split(Split::Train).size();
    REQUIRE(instances.size() == train_mentions);
    for (const auto& inst : instances) {
        CHECK(inst.entity_ids.size() == 3);
        REQUIRE(inst.gold_index >= 0);
        const auto& set = toy.cands.at(inst.mention_id);
        // gold is where it should be
        const MentionRecord* m = nullptr;
        for (const auto& cand : toy.ds.mentions)
            if (cand.mention_id == inst.mention_id) m = &cand;
        REQUIRE(m != nullptr);
        CHECK(inst.entity_ids[static_cast<size_t>(inst.gold_index)] == m->gold_entity_id);
        // negatives are the top-ranked non-gold candidates, in rank order
        size_t expect = 0;
        int negatives = 0;
        for (const auto& c : set.candidates) {
            if (negatives == 2 && c.entity_id != m->gold_entity_id) continue;
            if (expect >= inst.entity_ids.size()) break;
            CHECK(inst.entity_ids[expect] == c.entity_id);
            if (c.entity_id != m->gold_entity_id) ++negatives;
            ++expect;
        }
    }
}

TEST_CASE("build_instances drops mentions whose gold was not retrieved") {
    Toy toy;
    // remove the gold entity from one mention's candidate set
    const MentionRecord* victim = toy.ds.mentions_in_split(Split::Train).front();
    auto& set = toy.cands.at(victim->mention_id);
    std::erase_if(set.candidates,
                  [&](const ScoredCandidate& c) { return c.entity_id == victim->gold_entity_id; });
    auto instances = build_instances(toy.ds, toy.cands, 3, 0);
    CHECK(instances.size() == toy.ds.mentions_in_split(Split::Train).size() - 1);
    for (const auto& inst : instances) CHECK(inst.mention_id != victim->mention_id);

    // a missing candidate set altogether is a hard error
    toy.cands.erase(victim->mention_id);
    CHECK(test::fails_with([&] { build_instances(toy.ds, toy.cands, 3, 0); },
                           victim->mention_id));
}

TEST_CASE("adamw applies decoupled decay only to weight matrices") {
    auto w = ag::param(Matrix(1, 1));
    auto g = ag::param(Matrix(1, 1));
    auto b = ag::param(Matrix(1, 1));
    w->val.at(0, 0) = 1.0;
    g->val.at(0, 0) = 1.0;
    b->val.at(0, 0) = 1.0;
    AdamW opt({{"L0.ff.w1", w}, {"L0.ln1.g", g}, {"L0.attn.bq", b}}, 0.1, 0.5);
    // zero gradients: the only movement comes from decay
    opt.step();
    CHECK(w->val.at(0, 0) == doctest::Approx(1.0 - 0.1 * 0.5));
    CHECK(g->val.at(0, 0) == doctest::Approx(1.0));
    CHECK(b->val.at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("adamw first step moves by about the learning rate") {
    auto w = ag::param(Matrix(1, 1));
    w->val.at(0, 0) = 2.0;
    w->grad.at(0, 0) = 0.7;
    AdamW opt({{"w", w}}, 0.01, 0.0);
    opt.step();
    // bias-corrected first step: update = g / (|g| + eps)
    CHECK(w->val.at(0, 0) == doctest::Approx(2.0 - 0.01).epsilon(1e-6));
}

TEST_CASE("clip_global_norm rescales only above the threshold") {
    auto a = ag::param(Matrix(1, 2));
    a->grad.at(0, 0) = 3.0;
    a->grad.at(0, 1) = 4.0;  // norm 5
    real pre = clip_global_norm({a}, 10.0);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(a->grad.at(0, 1) == doctest::Approx(4.0));
    pre = clip_global_norm({a}, 1.0);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(std::sqrt(a->grad.at(0, 0) * a->grad.at(0, 0) + a->grad.at(0, 1) * a->grad.at(0, 1)) ==
          doctest::Approx(1.0));
}

TEST_CASE("train_system writes checkpoints and a parseable loss curve") {
    Toy toy;
    System sys = toy.make_system(SystemKind::Res);
    test::TempDir tmp("train");
    TrainResult res = train_system(sys, toy.ds, toy.cands, toy.setup.train, tmp.str(), true);

    CHECK(res.steps > 0);
    CHECK(res.loss_curve.size() == static_cast<size_t>(res.steps));
    CHECK(file_exists(res.best_path));
    CHECK(file_exists(res.final_path));
    CHECK(file_exists(res.curve_path));
    for (const auto& [step, loss] : res.loss_curve) CHECK(std::isfinite(loss));

    std::ifstream curve(res.curve_path);
    std::string header;
    std::getline(curve, header);
    CHECK(header == "step\tloss");
    long rows = 0;
    for (std::string line; std::getline(curve, line);) ++rows;
    CHECK(rows == res.steps);

    // checkpoints load back into a working system
    System back = load_checkpoint(res.final_path);
    CHECK(back.kind() == SystemKind::Res);
    const MentionRecord* m = toy.ds.mentions_in_split(Split::Test).front();
    std::vector<const EntityRecord*> ptrs;
    for (const auto& e : toy.ds.kbs.at(m->domain).entities) ptrs.push_back(&e);
    RankedPrediction pred = back.rank_candidates(*m, ptrs);
    CHECK(pred.ranking.size() == ptrs.size());
}

TEST_CASE("training is deterministic given the seed") {
    Toy toy;
    test::TempDir tmp("det");
    System s1 = toy.make_system(SystemKind::Res);
    TrainResult r1 = train_system(s1, toy.ds, toy.cands, toy.setup.train, tmp.file("a"), true);
    System s2 = toy.make_system(SystemKind::Res);
    TrainResult r2 = train_system(s2, toy.ds, toy.cands, toy.setup.train, tmp.file("b"), true);

    REQUIRE(r1.loss_curve.size() == r2.loss_curve.size());
    for (size_t i = 0; i < r1.loss_curve.size(); ++i)
        CHECK(r1.loss_curve[i].second == r2.loss_curve[i].second);
    CHECK(read_file(r1.final_path) == read_file(r2.final_path));

    TrainConfig other = toy.setup.train;
    other.seed = toy.setup.train.seed + 1;
    System s3 = toy.make_system(SystemKind::Res);
    TrainResult r3 = train_system(s3, toy.ds, toy.cands, other, tmp.file("c"), true);
    CHECK(read_file(r1.final_path) != read_file(r3.final_path));
}

TEST_CASE("checkpoints round trip weights, config and tokenizer") {
    Toy toy;
    System sys = toy.make_system(SystemKind::ReadingOnly);
    test::TempDir tmp("ckpt");
    save_checkpoint(sys, tmp.file("x.ckpt"));
    CHECK(file_exists(tmp.file("x.ckpt.manifest.json")));

    System back = load_checkpoint(tmp.file("x.ckpt"));
    CHECK(back.kind() == SystemKind::ReadingOnly);
    CHECK(back.tokenizer().vocab_hash() == sys.tokenizer().vocab_hash());
    CHECK(back.encoder().config().hidden == sys.encoder().config().hidden);
    auto a = sys.named_parameters();
    auto b = back.named_parameters();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].first == b[i].first);
        CHECK(a[i].second->val.a == b[i].second->val.a);
    }

    std::string manifest = read_file(tmp.file("x.ckpt.manifest.json"));
    CHECK(manifest.find("res-no-select") != std::string::npos);
    CHECK(manifest.find("vocab_hash") != std::string::npos);

    CHECK(test::fails_with([&] { load_checkpoint(tmp.file("missing.ckpt")); }, "missing.ckpt"));
    write_file_atomic(tmp.file("bad.ckpt"), "not a checkpoint");
    CHECK(test::fails_with([&] { load_checkpoint(tmp.file("bad.ckpt")); }, "checkpoint"));
}

TEST_CASE("micro accuracy counts correct top-1 picks over the retrievable subset") {
    Toy toy;
    System sys = toy.make_system(SystemKind::Res);
    long correct = 0, total = 0;
    real acc =
        micro_normalized_split_accuracy(sys, toy.ds, toy.cands, Split::Valid, &correct, &total);
    CHECK(total == static_cast<long>(toy.ds.mentions_in_split(Split::Valid).size()));
    CHECK(correct >= 0);
    CHECK(correct <= total);
    CHECK(acc == doctest::Approx(static_cast<real>(correct) / static_cast<real>(total)));
}
