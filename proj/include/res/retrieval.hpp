#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "res/common.hpp"
#include "res/corpus.hpp"

namespace res {

struct AnalyzerConfig {
    // lowercase, strip punctuation, split on whitespace
    std::vector<std::string> analyze(const std::string& text) const;
};

struct Bm25Params {
    real k1 = 1.2;
    real b = 0.75;
};

struct Posting {
    int doc = 0; // ordinal into entity_ids
    int tf = 0;
};

class InvertedIndex {
  public:
    // indexes lowercased, punctuation-stripped terms of title + description
    static InvertedIndex build(const DomainKb& kb, const AnalyzerConfig& analyzer = {});

    const std::string& domain() const { return domain_; }
    int doc_count() const { return static_cast<int>(doc_lengths_.size()); }
    real avg_doc_length() const { return avg_doc_length_; }
    int doc_length(int doc) const { return doc_lengths_[doc]; }
    const std::string& doc_entity_id(int doc) const { return entity_ids_[doc]; }
    const std::vector<Posting>* postings(const std::string& term) const;

    // smoothed idf: ln(1 + (N - n + 0.5) / (n + 0.5))
    real idf(const std::string& term) const;

  private:
    std::string domain_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::vector<int> doc_lengths_;
    std::vector<std::string> entity_ids_;
    real avg_doc_length_ = 0.0;
};

struct ScoredCandidate {
    std::string entity_id;
    real score = 0.0;

    bool operator==(const ScoredCandidate&) const = default;
};

struct CandidateSet {
    std::string mention_id;
    std::string domain;
    std::vector<ScoredCandidate> candidates; // scores non-increasing

    bool contains(const std::string& entity_id) const;
    int rank_of(const std::string& entity_id) const; // -1 if absent
    CandidateSet truncated(int k) const;
};

// Okapi BM25 top-k; ties broken by ascending entity id. Fewer than k
// matching documents yield a shorter list.
CandidateSet retrieve_topk(const InvertedIndex& index, const std::string& query, int k,
                           const Bm25Params& params = {}, const AnalyzerConfig& analyzer = {});

// fraction of mentions whose gold entity appears in the top k of its set
real recall_at_k(const std::unordered_map<std::string, CandidateSet>& sets,
                 const std::vector<const MentionRecord*>& mentions, int k);

void save_candidates(const std::vector<CandidateSet>& sets, const std::string& path);
std::unordered_map<std::string, CandidateSet> load_candidates(const std::string& path);

} // namespace res
