#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "res/config.hpp"
#include "res/corpus.hpp"
#include "res/retrieval.hpp"
#include "res/systems.hpp"
#include "res/tokenizer.hpp"

namespace res {

struct TrainConfig {
    real lr = 3e-4;
    real weight_decay = 0.01;
    int batch_size = 8;
    int epochs = 10;
    int candidates_per_instance = 8;  // N: gold + N-1 negatives
    std::uint64_t seed = 7;
    real clip_norm = 1.0;
    int checkpoint_every = 1;  // epochs between last.ckpt refreshes

    void validate() const;
};

struct TrainSetup {
    EncoderConfig encoder;
    TokenizerConfig tokenizer;
    TrainConfig train;
};

// "desk": a small encoder and aggressive learning rate sized for CPU runs.
// "paper": the full-scale hyperparameters, kept for reference and real-data
// reproduction attempts; far too slow for the desk harness.
TrainSetup setup_from_preset(const std::string& name);
void apply_overrides(TrainSetup& setup, const Config& cfg);

struct TrainInstance {
    std::string mention_id;
    std::vector<std::string> entity_ids;  // retrieval order
    int gold_index = -1;
};

// One instance per training mention whose gold entity was retrieved: the
// gold plus the N-1 highest-ranked non-gold candidates (all of them when the
// set is short). Gold-absent mentions are dropped. The seed parameter is
// reserved for sampled negative selection; rank-based selection ignores it.
std::vector<TrainInstance> build_instances(
    const Dataset& ds, const std::unordered_map<std::string, CandidateSet>& cands,
    int n_per_instance, std::uint64_t seed);

// Decoupled weight decay Adam. Decay is skipped for biases and layer-norm
// parameters, identified by name.
class AdamW {
  public:
    AdamW(const std::vector<std::pair<std::string, ag::Var>>& named, real lr, real weight_decay);
    void step();
    real lr() const { return lr_; }

  private:
    struct Slot {
        ag::Var p;
        Matrix m;
        Matrix v;
        bool decay;
    };
    std::vector<Slot> slots_;
    real lr_;
    real wd_;
    long t_ = 0;
};

// Scales all gradients so their global L2 norm is at most max_norm; returns
// the pre-clip norm.
real clip_global_norm(const std::vector<ag::Var>& params, real max_norm);

struct TrainResult {
    std::vector<std::pair<long, real>> loss_curve;  // (step, mean batch loss)
    real best_valid_accuracy = -1.0;
    int best_epoch = -1;
    long steps = 0;
    std::string best_path;
    std::string final_path;
    std::string curve_path;
};

// Full training loop: shuffled epochs, per-batch AdamW step with global-norm
// clipping, per-epoch validation by micro normalized accuracy, best/last/
// final checkpoints and a loss curve written under out_dir. Aborts on a
// non-finite loss.
TrainResult train_system(System& system, const Dataset& ds,
                         const std::unordered_map<std::string, CandidateSet>& cands,
                         const TrainConfig& tc, const std::string& out_dir, bool quiet = false);

// Top-1 accuracy of the system over the split's mentions whose gold entity
// appears in their candidate set; candidates ranked in retrieval order.
real micro_normalized_split_accuracy(System& system, const Dataset& ds,
                                     const std::unordered_map<std::string, CandidateSet>& cands,
                                     Split split, long* correct_out = nullptr,
                                     long* total_out = nullptr);

}  // namespace res
