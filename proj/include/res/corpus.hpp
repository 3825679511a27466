#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "res/common.hpp"
#include "res/config.hpp"

namespace res {

struct EntityRecord {
    std::string entity_id;
    std::string title;
    std::string description;
    std::string domain;

    bool operator==(const EntityRecord&) const = default;
};

struct MentionRecord {
    std::string mention_id;
    std::string surface;
    std::string left_context;
    std::string right_context;
    std::string gold_entity_id;
    std::string domain;

    bool operator==(const MentionRecord&) const = default;
};

enum class Split { Train, Valid, Test };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct DomainPartition {
    std::vector<std::string> train_domains;
    std::vector<std::string> valid_domains;
    std::vector<std::string> test_domains;

    // throws on overlap between the three sets
    void validate() const;
    bool contains(const std::string& domain) const;
    Split split_of(const std::string& domain) const;

    static DomainPartition from_config(const Config& cfg);
    Config to_config() const;

    bool operator==(const DomainPartition&) const = default;
};

// One domain's knowledge base.
struct DomainKb {
    std::string domain;
    std::vector<EntityRecord> entities;
    std::unordered_map<std::string, int> by_id;

    void add(EntityRecord e);
    const EntityRecord& entity(const std::string& id) const;
    bool has(const std::string& id) const { return by_id.count(id) > 0; }
};

struct Dataset {
    std::map<std::string, DomainKb> kbs; // domain -> KB
    std::vector<MentionRecord> mentions;
    DomainPartition partition;

    const EntityRecord& gold_entity(const MentionRecord& m) const;
    std::vector<const MentionRecord*> mentions_in_split(Split s) const;
    std::vector<std::string> domains_in_split(Split s) const;

    // gold resolvable, domains partitioned, entity ids disjoint across splits
    void validate() const;
};

// documents_path: JSONL file of {document_id,title,text[,domain]} records, or a
// directory of <domain>.json files in that format.
// mentions_path: JSONL records; either pre-split windows
// {mention_id,surface|text,left_context,right_context,label_document_id,corpus}
// or token offsets {mention_id,context_document_id,start_index,end_index,
// label_document_id,corpus} resolved against the documents (whitespace tokens,
// inclusive end index).
Dataset load_zeshel(const std::string& documents_path, const std::string& mentions_path,
                    const std::string& partition_config_path);

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

enum class Confusability { Easy, Hard };

Confusability confusability_from_name(const std::string& name);

struct SynthConfig {
    uint64_t seed = 7;
    int n_domains = 4;
    int entities_per_domain = 48;
    int mentions_per_domain = 96;
    Confusability level = Confusability::Easy;
};

// Deterministic domain-disjoint worlds over a closed word list shared by
// all domains. Easy mode: every mention surface equals its gold entity's
// title (one common category word plus an identity word unique in the
// domain), and the context carries the gold description's signature token.
// Hard mode: entities come in families sharing a two-word title prefix, the
// mention surface is that prefix, and the long context hides the gold's
// signature and member word among the signatures of same-family
// competitors, so candidates must be told apart by a two-token conjunction.
Dataset generate_synthetic_world(const SynthConfig& cfg);

} // namespace res
