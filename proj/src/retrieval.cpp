#include "res/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "res/textio.hpp"

namespace res {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> AnalyzerConfig::analyze(const std::string& text) const {
    std::vector<std::string> terms;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            terms.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) terms.push_back(cur);
    return terms;
}

InvertedIndex InvertedIndex::build(const DomainKb& kb, const AnalyzerConfig& analyzer) {
    require(!kb.entities.empty(), "cannot build index over empty KB (domain '" + kb.domain + "')");
    InvertedIndex idx;
    idx.domain_ = kb.domain;
    long total_len = 0;
    for (int doc = 0; doc < static_cast<int>(kb.entities.size()); ++doc) {
        const EntityRecord& e = kb.entities[doc];
        auto terms = analyzer.analyze(e.title + " " + e.description);
        std::unordered_map<std::string, int> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, freq] : tf) idx.postings_[term].push_back({doc, freq});
        idx.doc_lengths_.push_back(static_cast<int>(terms.size()));
        idx.entity_ids_.push_back(e.entity_id);
        total_len += static_cast<long>(terms.size());
    }
    for (auto& [term, plist] : idx.postings_)
        std::sort(plist.begin(), plist.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    idx.avg_doc_length_ = static_cast<real>(total_len) / static_cast<real>(idx.doc_count());
    return idx;
}

const std::vector<Posting>* InvertedIndex::postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

real InvertedIndex::idf(const std::string& term) const {
    auto it = postings_.find(term);
    real n = it == postings_.end() ? 0.0 : static_cast<real>(it->second.size());
    real N = static_cast<real>(doc_count());
    return std::log(1.0 + (N - n + 0.5) / (n + 0.5));
}

bool CandidateSet::contains(const std::string& entity_id) const {
    return rank_of(entity_id) >= 0;
}

int CandidateSet::rank_of(const std::string& entity_id) const {
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i)
        if (candidates[i].entity_id == entity_id) return i;
    return -1;
}

CandidateSet CandidateSet::truncated(int k) const {
    CandidateSet out;
    out.mention_id = mention_id;
    out.domain = domain;
    int n = std::min<int>(k, static_cast<int>(candidates.size()));
    out.candidates.assign(candidates.begin(), candidates.begin() + n);
    return out;
}

CandidateSet retrieve_topk(const InvertedIndex& index, const std::string& query, int k,
                           const Bm25Params& params, const AnalyzerConfig& analyzer) {
    require(k >= 1, "retrieve_topk: k must be >= 1");
    auto terms = analyzer.analyze(query);

    std::unordered_map<int, real> scores;
    for (const auto& term : terms) {
        const auto* plist = index.postings(term);
        if (!plist) continue;
        real idf = index.idf(term);
        for (const Posting& p : *plist) {
            real tf = static_cast<real>(p.tf);
            real norm = static_cast<real>(index.doc_length(p.doc)) / index.avg_doc_length();
            real w = idf * tf * (params.k1 + 1.0) /
                     (tf + params.k1 * (1.0 - params.b + params.b * norm));
            scores[p.doc] += w;
        }
    }

    std::vector<std::pair<int, real>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return index.doc_entity_id(a.first) < index.doc_entity_id(b.first);
    });
    if (static_cast<int>(ranked.size()) > k) ranked.resize(k);

    CandidateSet out;
    out.domain = index.domain();
    for (const auto& [doc, score] : ranked) out.candidates.push_back({index.doc_entity_id(doc), score});
    return out;
}

real recall_at_k(const std::unordered_map<std::string, CandidateSet>& sets,
                 const std::vector<const MentionRecord*>& mentions, int k) {
    require(!mentions.empty(), "recall_at_k: no mentions");
    int hits = 0;
    for (const MentionRecord* m : mentions) {
        auto it = sets.find(m->mention_id);
        if (it == sets.end()) fail("recall_at_k: missing candidate set for mention '" +
                                   m->mention_id + "'");
        if (it->second.truncated(k).contains(m->gold_entity_id)) ++hits;
    }
    return static_cast<real>(hits) / static_cast<real>(mentions.size());
}

void save_candidates(const std::vector<CandidateSet>& sets, const std::string& path) {
    std::ostringstream out;
    for (const auto& cs : sets) {
        ordered_json j;
        j["mention_id"] = cs.mention_id;
        j["domain"] = cs.domain;
        ordered_json arr = ordered_json::array();
        for (const auto& c : cs.candidates) {
            ordered_json cj;
            cj["entity_id"] = c.entity_id;
            cj["score"] = c.score;
            arr.push_back(std::move(cj));
        }
        j["candidates"] = std::move(arr);
        out << j.dump() << "\n";
    }
    write_file_atomic(path, out.str());
}

std::unordered_map<std::string, CandidateSet> load_candidates(const std::string& path) {
    std::unordered_map<std::string, CandidateSet> out;
    auto lines = read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(lines[i]);
        } catch (const std::exception& e) {
            fail(path + " line " + std::to_string(i + 1) + ": bad json: " + e.what());
        }
        CandidateSet cs;
        cs.mention_id = j.at("mention_id").get<std::string>();
        cs.domain = j.at("domain").get<std::string>();
        for (const auto& cj : j.at("candidates"))
            cs.candidates.push_back(
                {cj.at("entity_id").get<std::string>(), cj.at("score").get<real>()});
        for (size_t c = 1; c < cs.candidates.size(); ++c)
            require(cs.candidates[c - 1].score >= cs.candidates[c].score,
                    path + ": candidate scores not non-increasing for mention '" + cs.mention_id +
                        "'");
        out[cs.mention_id] = std::move(cs);
    }
    return out;
}

} // namespace res
