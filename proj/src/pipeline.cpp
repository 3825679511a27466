#include "res/pipeline.hpp"

#include <filesystem>
#include <iostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "res/checkpoint.hpp"
#include "res/config.hpp"
#include "res/corpus.hpp"
#include "res/evaluation.hpp"
#include "res/reading.hpp"
#include "res/retrieval.hpp"
#include "res/systems.hpp"
#include "res/textio.hpp"
#include "res/training.hpp"

namespace res::pipeline {

namespace {

std::vector<Split> splits_from_flag(const std::string& s) {
    if (s == "all") return {Split::Train, Split::Valid, Split::Test};
    return {split_from_name(s)};
}

struct IngestArgs {
    std::string documents, mentions, partition, out;
};

int cmd_ingest(const IngestArgs& a) {
    Dataset ds = load_zeshel(a.documents, a.mentions, a.partition);
    save_dataset(ds, a.out);
    std::size_t entities = 0;
    for (const auto& [name, kb] : ds.kbs) entities += kb.entities.size();
    std::cout << "ingested " << ds.kbs.size() << " domains, " << entities << " entities, "
              << ds.mentions.size() << " mentions -> " << a.out << "\n";
    return 0;
}

struct SynthArgs {
    std::string out;
    std::string level = "easy";
    std::uint64_t seed = 7;
    int domains = 4;
    int entities = 48;
    int mentions = 96;
};

int cmd_synth(const SynthArgs& a) {
    SynthConfig cfg;
    cfg.seed = a.seed;
    cfg.n_domains = a.domains;
    cfg.entities_per_domain = a.entities;
    cfg.mentions_per_domain = a.mentions;
    cfg.level = confusability_from_name(a.level);
    Dataset ds = generate_synthetic_world(cfg);
    save_dataset(ds, a.out);
    std::cout << "generated " << a.level << " world: " << ds.kbs.size() << " domains, "
              << ds.mentions.size() << " mentions -> " << a.out << "\n";
    return 0;
}

struct RetrieveArgs {
    std::string data, out;
    int k = 16;
    std::string split = "all";
};

int cmd_retrieve(const RetrieveArgs& a) {
    Dataset ds = load_dataset(a.data);
    std::unordered_map<std::string, InvertedIndex> indexes;
    std::vector<CandidateSet> sets;
    std::unordered_map<std::string, CandidateSet> by_mention;
    for (Split split : splits_from_flag(a.split)) {
        for (const MentionRecord* m : ds.mentions_in_split(split)) {
            auto it = indexes.find(m->domain);
            if (it == indexes.end())
                it = indexes.emplace(m->domain, InvertedIndex::build(ds.kbs.at(m->domain))).first;
            CandidateSet set = retrieve_topk(it->second, m->surface, a.k);
            set.mention_id = m->mention_id;
            set.domain = m->domain;
            by_mention[set.mention_id] = set;
            sets.push_back(std::move(set));
        }
    }
    save_candidates(sets, a.out);
    for (Split split : splits_from_flag(a.split)) {
        const auto mentions = ds.mentions_in_split(split);
        if (mentions.empty()) continue;
        const real r = recall_at_k(by_mention, mentions, a.k);
        std::cout << split_name(split) << " recall@" << a.k << ": " << r
                  << " over " << mentions.size() << " mentions\n";
    }
    std::cout << "wrote " << sets.size() << " candidate sets -> " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string data, candidates, out;
    std::string preset = "desk";
    std::string config_path;
    std::string system = "res";
    long seed = -1;
    bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
    Dataset ds = load_dataset(a.data);
    auto cands = load_candidates(a.candidates);
    TrainSetup setup = setup_from_preset(a.preset);
    if (!a.config_path.empty()) apply_overrides(setup, Config::load(a.config_path));
    if (a.seed >= 0) setup.train.seed = static_cast<std::uint64_t>(a.seed);

    std::vector<std::string> texts;
    for (const std::string& dom : ds.domains_in_split(Split::Train)) {
        const DomainKb& kb = ds.kbs.at(dom);
        for (const EntityRecord& e : kb.entities) {
            texts.push_back(e.title);
            texts.push_back(e.description);
        }
    }
    for (const MentionRecord* m : ds.mentions_in_split(Split::Train)) {
        texts.push_back(m->left_context);
        texts.push_back(m->surface);
        texts.push_back(m->right_context);
    }
    Tokenizer tok = Tokenizer::train(texts, setup.tokenizer);
    std::cout << "tokenizer: vocab " << tok.vocab_size() << " from " << texts.size()
              << " training texts\n";

    System system(system_from_name(a.system), setup.encoder, std::move(tok),
                  setup.train.seed ^ 0x7265732d696e6974ULL);
    TrainResult tr = train_system(system, ds, cands, setup.train, a.out, a.quiet);
    std::cout << "trained " << a.system << ": " << tr.steps << " steps";
    if (tr.best_epoch > 0)
        std::cout << ", best epoch " << tr.best_epoch << " (valid acc "
                  << tr.best_valid_accuracy << ")";
    std::cout << "\ncheckpoints: " << tr.best_path << ", " << tr.final_path << "\n";
    return 0;
}

struct PredictArgs {
    std::string data, candidates, ckpt, out;
    std::string split = "test";
    std::string system;
    int dump_layouts = 0;
};

int cmd_predict(const PredictArgs& a) {
    Dataset ds = load_dataset(a.data);
    auto cands = load_candidates(a.candidates);
    System system = load_checkpoint(a.ckpt);
    if (!a.system.empty())
        require(system_from_name(a.system) == system.kind(),
                "checkpoint holds system '" + system_name(system.kind()) + "', not '" + a.system +
                    "'");
    std::vector<Prediction> preds;
    int dumped = 0;
    for (Split split : splits_from_flag(a.split)) {
        for (const MentionRecord* m : ds.mentions_in_split(split)) {
            auto cit = cands.find(m->mention_id);
            if (cit == cands.end() || cit->second.candidates.empty()) continue;
            const DomainKb& kb = ds.kbs.at(m->domain);
            std::vector<const EntityRecord*> ptrs;
            ptrs.reserve(cit->second.candidates.size());
            for (const ScoredCandidate& c : cit->second.candidates)
                ptrs.push_back(&kb.entity(c.entity_id));
            if (dumped < a.dump_layouts) {
                const auto& cfg = system.encoder().config();
                MentionInput mi = build_mention_input(system.tokenizer(), *m, cfg.max_segment_len);
                std::cerr << "== mention " << m->mention_id << " ==\n"
                          << layout_dump(system.tokenizer(), mi.ids) << "-- entity read, top candidate "
                          << ptrs.front()->entity_id << " --\n"
                          << layout_dump(system.tokenizer(),
                                         build_entity_read_input(system.tokenizer(), *ptrs.front(),
                                                                 mi, cfg.max_segment_len));
                ++dumped;
            }
            RankedPrediction rp = system.rank_candidates(*m, ptrs);
            Prediction p;
            p.mention_id = m->mention_id;
            p.scores = rp.scores;
            p.ranked_entity_ids.reserve(rp.ranking.size());
            for (int idx : rp.ranking)
                p.ranked_entity_ids.push_back(ptrs[static_cast<std::size_t>(idx)]->entity_id);
            preds.push_back(std::move(p));
        }
    }
    save_predictions(preds, a.out);
    std::cout << "wrote " << preds.size() << " predictions -> " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string data, candidates, pred;
    int k = 16;
    std::string split = "test";
    std::string out;
    std::string label;
    std::vector<int> scaling;
    std::string ckpt;
    std::string diff;
};

int cmd_eval(const EvalArgs& a) {
    Dataset ds = load_dataset(a.data);
    auto cands = load_candidates(a.candidates);
    auto preds = load_predictions(a.pred);
    const Split split = split_from_name(a.split);
    EvalReport r = evaluate(ds, split, cands, preds, a.k, a.label);
    if (!a.scaling.empty()) {
        require(!a.ckpt.empty(), "eval: --scaling needs --ckpt to re-rank truncated sets");
        System system = load_checkpoint(a.ckpt);
        RankerFn ranker = [&system](const MentionRecord& m,
                                    const std::vector<const EntityRecord*>& ptrs) {
            return ptrs[static_cast<std::size_t>(system.rank_candidates(m, ptrs).best)]->entity_id;
        };
        r.scaling = scaling_curve(ranker, ds, split, cands, a.scaling);
    }
    std::cout << report_text(r);
    if (!a.out.empty()) {
        std::filesystem::create_directories(a.out);
        write_file_atomic(a.out + "/report.txt", report_text(r));
        write_file_atomic(a.out + "/report.jsonl", report_jsonl(r));
        if (!r.scaling.empty()) {
            write_file_atomic(a.out + "/scaling.tsv", scaling_tsv(r.scaling));
            write_file_atomic(a.out + "/scaling_normalized.svg",
                              scaling_svg(r.scaling, true, "normalized accuracy vs candidates"));
            write_file_atomic(a.out + "/scaling_unnormalized.svg",
                              scaling_svg(r.scaling, false, "unnormalized accuracy vs candidates"));
        }
    }
    if (!a.diff.empty()) {
        auto other = load_predictions(a.diff);
        std::cout << diff_predictions(preds, other, ds, split);
    }
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"zero-shot entity linking: BM25 retrieval plus read-and-select ranking"};
    app.require_subcommand(1);

    IngestArgs ingest;
    CLI::App* s_ingest = app.add_subcommand("ingest", "convert external documents and mentions");
    s_ingest->add_option("--documents", ingest.documents, "documents JSONL file or directory")
        ->required();
    s_ingest->add_option("--mentions", ingest.mentions, "mentions JSONL file")->required();
    s_ingest->add_option("--partition", ingest.partition, "domain partition config")->required();
    s_ingest->add_option("--out", ingest.out, "output dataset directory")->required();

    SynthArgs synth;
    CLI::App* s_synth = app.add_subcommand("synth", "generate a synthetic world");
    s_synth->add_option("--out", synth.out, "output dataset directory")->required();
    s_synth->add_option("--level", synth.level, "easy or hard");
    s_synth->add_option("--seed", synth.seed, "generator seed");
    s_synth->add_option("--domains", synth.domains, "number of domains");
    s_synth->add_option("--entities", synth.entities, "entities per domain");
    s_synth->add_option("--mentions", synth.mentions, "mentions per domain");

    RetrieveArgs retrieve;
    CLI::App* s_retrieve = app.add_subcommand("retrieve", "BM25 top-k candidate retrieval");
    s_retrieve->add_option("--data", retrieve.data, "dataset directory")->required();
    s_retrieve->add_option("--out", retrieve.out, "candidates output file")->required();
    s_retrieve->add_option("--k", retrieve.k, "candidates per mention");
    s_retrieve->add_option("--split", retrieve.split, "train, valid, test, or all");

    TrainArgs train;
    CLI::App* s_train = app.add_subcommand("train", "train a ranking system");
    s_train->add_option("--data", train.data, "dataset directory")->required();
    s_train->add_option("--candidates", train.candidates, "candidates file")->required();
    s_train->add_option("--out", train.out, "output directory")->required();
    s_train->add_option("--preset", train.preset, "desk or paper");
    s_train->add_option("--config", train.config_path, "config file with overrides");
    s_train->add_option("--system", train.system, "res, res-no-select, or cross-encoder");
    s_train->add_option("--seed", train.seed, "seed override");
    s_train->add_flag("--quiet", train.quiet, "suppress per-epoch progress");

    PredictArgs predict;
    CLI::App* s_predict = app.add_subcommand("predict", "rank candidates with a checkpoint");
    s_predict->add_option("--data", predict.data, "dataset directory")->required();
    s_predict->add_option("--candidates", predict.candidates, "candidates file")->required();
    s_predict->add_option("--ckpt", predict.ckpt, "checkpoint file")->required();
    s_predict->add_option("--out", predict.out, "predictions output file")->required();
    s_predict->add_option("--split", predict.split, "train, valid, test, or all");
    s_predict->add_option("--system", predict.system, "assert the checkpoint's system kind");
    s_predict->add_option("--dump-layouts", predict.dump_layouts,
                          "print input layouts for the first N mentions");

    EvalArgs eval;
    CLI::App* s_eval = app.add_subcommand("eval", "score predictions");
    s_eval->add_option("--data", eval.data, "dataset directory")->required();
    s_eval->add_option("--candidates", eval.candidates, "candidates file")->required();
    s_eval->add_option("--pred", eval.pred, "predictions file")->required();
    s_eval->add_option("--k", eval.k, "normalization cut-off");
    s_eval->add_option("--split", eval.split, "train, valid, or test");
    s_eval->add_option("--out", eval.out, "report output directory");
    s_eval->add_option("--label", eval.label, "label recorded in the report");
    s_eval->add_option("--scaling", eval.scaling, "comma-separated k values to re-rank at")
        ->delimiter(',');
    s_eval->add_option("--ckpt", eval.ckpt, "checkpoint for scaling re-ranking");
    s_eval->add_option("--diff", eval.diff, "second predictions file to diff against");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (s_ingest->parsed()) return cmd_ingest(ingest);
        if (s_synth->parsed()) return cmd_synth(synth);
        if (s_retrieve->parsed()) return cmd_retrieve(retrieve);
        if (s_train->parsed()) return cmd_train(train);
        if (s_predict->parsed()) return cmd_predict(predict);
        if (s_eval->parsed()) return cmd_eval(eval);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 2;
}

}  // namespace res::pipeline
