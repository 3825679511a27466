#include "res/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "res/checkpoint.hpp"
#include "res/textio.hpp"

namespace res {

void TrainConfig::validate() const {
    require(lr > 0, "train config: learning rate must be positive");
    require(weight_decay >= 0, "train config: weight decay must be non-negative");
    require(batch_size >= 1, "train config: batch size must be >= 1");
    require(epochs >= 1, "train config: epochs must be >= 1");
    require(candidates_per_instance >= 2, "train config: N must be >= 2");
    require(clip_norm > 0, "train config: clip norm must be positive");
    require(checkpoint_every >= 1, "train config: checkpoint cadence must be >= 1");
}

TrainSetup setup_from_preset(const std::string& name) {
    TrainSetup s;
    if (name == "desk") {
        s.encoder.hidden = 128;
        s.encoder.layers = 4;
        s.encoder.heads = 4;
        s.encoder.max_positions = 512;
        s.encoder.prefix_len = 3;
        s.encoder.max_segment_len = 64;
        s.encoder.dropout = 0.1;
        s.tokenizer.prefix_len = 3;
        // modest merge budget on purpose: frequent short words collapse to
        // single tokens while rare content words stay multi-token, so unseen
        // domains decompose into the same subword pieces the model trained on
        s.tokenizer.max_merges = 256;
        s.train = TrainConfig{};
        return s;
    }
    if (name == "paper") {
        s.encoder.hidden = 768;
        s.encoder.layers = 12;
        s.encoder.heads = 12;
        s.encoder.max_positions = 1024;
        s.encoder.prefix_len = 3;
        s.encoder.max_segment_len = 256;
        s.encoder.dropout = 0.1;
        s.tokenizer.prefix_len = 3;
        s.tokenizer.max_merges = 30000;
        s.train.lr = 4e-5;
        s.train.weight_decay = 0.01;
        s.train.batch_size = 4;
        s.train.epochs = 4;
        s.train.candidates_per_instance = 56;
        return s;
    }
    fail("unknown preset: " + name + " (expected desk or paper)");
}

void apply_overrides(TrainSetup& s, const Config& cfg) {
    auto& e = s.encoder;
    e.hidden = static_cast<int>(cfg.get_int_or("encoder", "hidden", e.hidden));
    e.layers = static_cast<int>(cfg.get_int_or("encoder", "layers", e.layers));
    e.heads = static_cast<int>(cfg.get_int_or("encoder", "heads", e.heads));
    e.max_positions = static_cast<int>(cfg.get_int_or("encoder", "max_positions", e.max_positions));
    e.prefix_len = static_cast<int>(cfg.get_int_or("encoder", "prefix_len", e.prefix_len));
    e.max_segment_len =
        static_cast<int>(cfg.get_int_or("encoder", "max_segment_len", e.max_segment_len));
    e.dropout = cfg.get_real_or("encoder", "dropout", e.dropout);
    e.ln_eps = cfg.get_real_or("encoder", "ln_eps", e.ln_eps);
    s.tokenizer.prefix_len = e.prefix_len;
    s.tokenizer.max_merges =
        static_cast<int>(cfg.get_int_or("tokenizer", "max_merges", s.tokenizer.max_merges));
    s.tokenizer.min_pair_count =
        static_cast<int>(cfg.get_int_or("tokenizer", "min_pair_count", s.tokenizer.min_pair_count));
    auto& t = s.train;
    t.lr = cfg.get_real_or("train", "lr", t.lr);
    t.weight_decay = cfg.get_real_or("train", "weight_decay", t.weight_decay);
    t.batch_size = static_cast<int>(cfg.get_int_or("train", "batch_size", t.batch_size));
    t.epochs = static_cast<int>(cfg.get_int_or("train", "epochs", t.epochs));
    t.candidates_per_instance = static_cast<int>(
        cfg.get_int_or("train", "candidates", t.candidates_per_instance));
    t.seed = static_cast<std::uint64_t>(cfg.get_int_or("train", "seed",
                                                       static_cast<long>(t.seed)));
    t.clip_norm = cfg.get_real_or("train", "clip_norm", t.clip_norm);
    t.checkpoint_every =
        static_cast<int>(cfg.get_int_or("train", "checkpoint_every", t.checkpoint_every));
}

std::vector<TrainInstance> build_instances(
    const Dataset& ds, const std::unordered_map<std::string, CandidateSet>& cands,
    int n_per_instance, std::uint64_t seed) {
    (void)seed;
    require(n_per_instance >= 2, "build_instances: N must be >= 2");
    std::vector<TrainInstance> out;
    for (const MentionRecord* m : ds.mentions_in_split(Split::Train)) {
        auto it = cands.find(m->mention_id);
        require(it != cands.end(), "build_instances: no candidate set for " + m->mention_id);
        const CandidateSet& set = it->second;
        if (set.rank_of(m->gold_entity_id) < 0) continue;  // not retrievable, drop
        TrainInstance inst;
        inst.mention_id = m->mention_id;
        int negatives = 0;
        for (const ScoredCandidate& c : set.candidates) {
            const bool is_gold = c.entity_id == m->gold_entity_id;
            if (!is_gold && negatives >= n_per_instance - 1) continue;
            if (is_gold)
                inst.gold_index = static_cast<int>(inst.entity_ids.size());
            else
                ++negatives;
            inst.entity_ids.push_back(c.entity_id);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

AdamW::AdamW(const std::vector<std::pair<std::string, ag::Var>>& named, real lr, real weight_decay)
    : lr_(lr), wd_(weight_decay) {
    slots_.reserve(named.size());
    for (const auto& [name, p] : named) {
        const auto dot = name.rfind('.');
        const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
        const bool decay = !(leaf == "g" || (!leaf.empty() && leaf[0] == 'b'));
        slots_.push_back({p, Matrix::zeros(p->val.rows, p->val.cols),
                          Matrix::zeros(p->val.rows, p->val.cols), decay});
    }
}

void AdamW::step() {
    constexpr real kBeta1 = 0.9;
    constexpr real kBeta2 = 0.999;
    constexpr real kEps = 1e-8;
    ++t_;
    const real bc1 = 1.0 - std::pow(kBeta1, static_cast<real>(t_));
    const real bc2 = 1.0 - std::pow(kBeta2, static_cast<real>(t_));
    for (Slot& s : slots_) {
        const Matrix& g = s.p->grad;
        Matrix& w = s.p->val;
        for (std::size_t i = 0; i < w.a.size(); ++i) {
            const real gi = g.a[i];
            s.m.a[i] = kBeta1 * s.m.a[i] + (1.0 - kBeta1) * gi;
            s.v.a[i] = kBeta2 * s.v.a[i] + (1.0 - kBeta2) * gi * gi;
            const real mhat = s.m.a[i] / bc1;
            const real vhat = s.v.a[i] / bc2;
            real update = mhat / (std::sqrt(vhat) + kEps);
            if (s.decay) update += wd_ * w.a[i];
            w.a[i] -= lr_ * update;
        }
    }
}

real clip_global_norm(const std::vector<ag::Var>& params, real max_norm) {
    require(max_norm > 0, "clip_global_norm: max_norm must be positive");
    real sq = 0;
    for (const auto& p : params)
        for (real g : p->grad.a) sq += g * g;
    const real norm = std::sqrt(sq);
    if (norm > max_norm) {
        const real scale = max_norm / norm;
        for (const auto& p : params)
            for (real& g : p->grad.a) g *= scale;
    }
    return norm;
}

real micro_normalized_split_accuracy(System& system, const Dataset& ds,
                                     const std::unordered_map<std::string, CandidateSet>& cands,
                                     Split split, long* correct_out, long* total_out) {
    long correct = 0;
    long total = 0;
    for (const MentionRecord* m : ds.mentions_in_split(split)) {
        auto it = cands.find(m->mention_id);
        if (it == cands.end()) continue;
        const CandidateSet& set = it->second;
        const int gold_rank = set.rank_of(m->gold_entity_id);
        if (gold_rank < 0) continue;
        const DomainKb& kb = ds.kbs.at(m->domain);
        std::vector<const EntityRecord*> ptrs;
        ptrs.reserve(set.candidates.size());
        for (const ScoredCandidate& c : set.candidates) ptrs.push_back(&kb.entity(c.entity_id));
        const RankedPrediction pred = system.rank_candidates(*m, ptrs);
        ++total;
        if (pred.best == gold_rank) ++correct;
    }
    if (correct_out) *correct_out = correct;
    if (total_out) *total_out = total;
    return total == 0 ? 0.0 : static_cast<real>(correct) / static_cast<real>(total);
}

TrainResult train_system(System& system, const Dataset& ds,
                         const std::unordered_map<std::string, CandidateSet>& cands,
                         const TrainConfig& tc, const std::string& out_dir, bool quiet) {
    tc.validate();
    std::filesystem::create_directories(out_dir);
    const std::vector<TrainInstance> instances =
        build_instances(ds, cands, tc.candidates_per_instance, tc.seed);
    require(!instances.empty(),
            "training: no usable instances; every training mention lacks its gold entity "
            "among the retrieved candidates");

    std::unordered_map<std::string, const MentionRecord*> by_id;
    for (const auto& m : ds.mentions) by_id[m.mention_id] = &m;

    const auto named = system.named_parameters();
    std::vector<ag::Var> params;
    params.reserve(named.size());
    for (const auto& [name, v] : named) params.push_back(v);
    AdamW opt(named, tc.lr, tc.weight_decay);

    Rng shuffle_rng(tc.seed);
    Rng dropout_rng(tc.seed ^ 0x5851f42d4c957f2dULL);

    TrainResult res;
    res.best_path = out_dir + "/best.ckpt";
    res.final_path = out_dir + "/final.ckpt";
    res.curve_path = out_dir + "/loss_curve.tsv";
    long step = 0;
    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        std::vector<int> order = shuffle_rng.permutation(static_cast<int>(instances.size()));
        real epoch_loss = 0;
        long epoch_batches = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(tc.batch_size)) {
            const std::size_t b1 =
                std::min(order.size(), b0 + static_cast<std::size_t>(tc.batch_size));
            ag::zero_grad(params);
            real batch_loss = 0;
            for (std::size_t i = b0; i < b1; ++i) {
                const TrainInstance& inst = instances[static_cast<std::size_t>(order[i])];
                const MentionRecord& m = *by_id.at(inst.mention_id);
                const DomainKb& kb = ds.kbs.at(m.domain);
                std::vector<const EntityRecord*> ptrs;
                ptrs.reserve(inst.entity_ids.size());
                for (const std::string& id : inst.entity_ids) ptrs.push_back(&kb.entity(id));
                Rng order_rng(tc.seed ^ fnv1a64(inst.mention_id) ^
                              (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch)));
                ag::Var loss =
                    system.instance_loss(m, ptrs, inst.gold_index, order_rng, dropout_rng);
                const real lv = loss->val.at(0, 0);
                if (!std::isfinite(lv))
                    fail("non-finite training loss at step " + std::to_string(step) +
                         " on mention " + inst.mention_id);
                ag::backward(loss, 1.0 / static_cast<real>(b1 - b0));
                batch_loss += lv;
            }
            clip_global_norm(params, tc.clip_norm);
            opt.step();
            batch_loss /= static_cast<real>(b1 - b0);
            res.loss_curve.emplace_back(step, batch_loss);
            epoch_loss += batch_loss;
            ++epoch_batches;
            ++step;
        }
        long correct = 0;
        long total = 0;
        const real acc =
            micro_normalized_split_accuracy(system, ds, cands, Split::Valid, &correct, &total);
        if (!quiet)
            std::cerr << "epoch " << epoch << "/" << tc.epochs << " mean_batch_loss "
                      << epoch_loss / static_cast<real>(std::max(1L, epoch_batches)) << " valid "
                      << correct << "/" << total << " acc " << acc << "\n";
        if (total > 0 && acc > res.best_valid_accuracy) {
            res.best_valid_accuracy = acc;
            res.best_epoch = epoch;
            save_checkpoint(system, res.best_path);
        }
        if (epoch % tc.checkpoint_every == 0) save_checkpoint(system, out_dir + "/last.ckpt");
    }
    save_checkpoint(system, res.final_path);
    if (res.best_epoch < 0) save_checkpoint(system, res.best_path);

    std::string curve;
    curve.reserve(res.loss_curve.size() * 24);
    curve += "step\tloss\n";
    char buf[64];
    for (const auto& [s, l] : res.loss_curve) {
        std::snprintf(buf, sizeof(buf), "%ld\t%.9g\n", s, l);
        curve += buf;
    }
    write_file_atomic(res.curve_path, curve);
    res.steps = step;
    return res;
}

}  // namespace res
