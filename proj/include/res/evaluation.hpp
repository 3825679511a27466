#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "res/corpus.hpp"
#include "res/retrieval.hpp"

namespace res {

// Token-overlap taxonomy between a mention surface and its gold entity
// title, after lowercasing and whitespace collapsing. Rules apply in order:
// HO (strings equal), MC (title = surface + non-empty suffix), AS (surface a
// proper substring elsewhere), LO (no overlap of the above kinds).
enum class MentionCategory { HO, MC, AS, LO };

const char* category_name(MentionCategory c);
MentionCategory categorize(const std::string& surface, const std::string& title);

struct Prediction {
    std::string mention_id;
    std::vector<std::string> ranked_entity_ids;  // best first
    std::vector<real> scores;                    // aligned with the ranking
};

void save_predictions(const std::vector<Prediction>& preds, const std::string& path);
std::unordered_map<std::string, Prediction> load_predictions(const std::string& path);

// macro = unweighted mean of the accuracies; micro = size-weighted mean.
std::pair<real, real> aggregate(const std::vector<real>& accuracies,
                                const std::vector<long>& sizes);

struct DomainAccuracy {
    std::string domain;
    long subset = 0;
    long correct = 0;
    real accuracy = 0;
};

// Accuracy over the normalized subset (gold entity within the top-k
// candidates), per domain, domains sorted by name. A missing prediction for
// a subset mention is an error; zero-subset domains are omitted.
std::vector<DomainAccuracy> normalized_accuracy(
    const Dataset& ds, Split split, const std::unordered_map<std::string, CandidateSet>& cands,
    const std::unordered_map<std::string, Prediction>& preds, int k);

// Correct top-1 over every mention of the split; unretrievable or
// unpredicted mentions count as wrong.
real unnormalized_accuracy(const Dataset& ds, Split split,
                           const std::unordered_map<std::string, Prediction>& preds,
                           long* correct_out = nullptr, long* total_out = nullptr);

struct ScalingPoint {
    int k = 0;
    long subset = 0;
    long total = 0;
    real normalized = 0;
    real unnormalized = 0;
};

// Re-ranks truncated candidate sets with the supplied ranker; returns the
// predicted entity id for the given mention and candidate list.
using RankerFn =
    std::function<std::string(const MentionRecord&, const std::vector<const EntityRecord*>&)>;

std::vector<ScalingPoint> scaling_curve(const RankerFn& ranker, const Dataset& ds, Split split,
                                        const std::unordered_map<std::string, CandidateSet>& cands,
                                        const std::vector<int>& k_values);

struct CategoryAccuracy {
    MentionCategory category = MentionCategory::HO;
    long count = 0;
    long correct = 0;
    real accuracy = 0;
};

struct EvalReport {
    std::string label;
    std::string split;
    int k = 0;
    std::vector<DomainAccuracy> domains;
    real macro = 0;
    real micro = 0;
    long subset_total = 0;
    long total_mentions = 0;
    long unnorm_correct = 0;
    real unnormalized = 0;
    std::vector<CategoryAccuracy> categories;  // HO, MC, AS, LO over the pooled subset
    std::vector<ScalingPoint> scaling;         // empty unless a scaling run was requested
};

EvalReport evaluate(const Dataset& ds, Split split,
                    const std::unordered_map<std::string, CandidateSet>& cands,
                    const std::unordered_map<std::string, Prediction>& preds, int k,
                    const std::string& label = "");

// Byte-deterministic renderings: no paths, no timestamps, fixed formatting.
std::string report_text(const EvalReport& r);
std::string report_jsonl(const EvalReport& r);
std::string scaling_tsv(const std::vector<ScalingPoint>& pts);
std::string scaling_svg(const std::vector<ScalingPoint>& pts, bool normalized_metric,
                        const std::string& title);

// Mentions of the split where the two prediction files pick different top-1
// entities; one tab-separated line each, sorted by mention id.
std::string diff_predictions(const std::unordered_map<std::string, Prediction>& a,
                             const std::unordered_map<std::string, Prediction>& b,
                             const Dataset& ds, Split split);

}  // namespace res
