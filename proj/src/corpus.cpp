#include "res/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"
#include "res/textio.hpp"

namespace res {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "?";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "valid" || name == "validation" || name == "dev") return Split::Valid;
    if (name == "test") return Split::Test;
    fail("unknown split name: " + name);
}

void DomainPartition::validate() const {
    std::set<std::string> seen;
    auto check = [&](const std::vector<std::string>& domains, const char* name) {
        for (const auto& d : domains) {
            if (!seen.insert(d).second)
                fail("partition: domain '" + d + "' appears in more than one split (" +
                     std::string(name) + ")");
        }
    };
    check(train_domains, "train");
    check(valid_domains, "valid");
    check(test_domains, "test");
}

bool DomainPartition::contains(const std::string& domain) const {
    auto in = [&](const std::vector<std::string>& v) {
        return std::find(v.begin(), v.end(), domain) != v.end();
    };
    return in(train_domains) || in(valid_domains) || in(test_domains);
}

Split DomainPartition::split_of(const std::string& domain) const {
    auto in = [&](const std::vector<std::string>& v) {
        return std::find(v.begin(), v.end(), domain) != v.end();
    };
    if (in(train_domains)) return Split::Train;
    if (in(valid_domains)) return Split::Valid;
    if (in(test_domains)) return Split::Test;
    fail("domain '" + domain + "' is not assigned to any split");
}

DomainPartition DomainPartition::from_config(const Config& cfg) {
    DomainPartition p;
    p.train_domains = cfg.get_list("train", "domains");
    p.valid_domains = cfg.get_list("valid", "domains");
    p.test_domains = cfg.get_list("test", "domains");
    p.validate();
    return p;
}

Config DomainPartition::to_config() const {
    Config cfg;
    cfg.set("train", "domains", join(train_domains, ", "));
    cfg.set("valid", "domains", join(valid_domains, ", "));
    cfg.set("test", "domains", join(test_domains, ", "));
    return cfg;
}

void DomainKb::add(EntityRecord e) {
    if (by_id.count(e.entity_id))
        fail("duplicate entity id '" + e.entity_id + "' in domain '" + domain + "'");
    by_id[e.entity_id] = static_cast<int>(entities.size());
    entities.push_back(std::move(e));
}

const EntityRecord& DomainKb::entity(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) fail("entity '" + id + "' not found in domain '" + domain + "'");
    return entities[it->second];
}

const EntityRecord& Dataset::gold_entity(const MentionRecord& m) const {
    auto it = kbs.find(m.domain);
    if (it == kbs.end()) fail("mention '" + m.mention_id + "': unknown domain '" + m.domain + "'");
    return it->second.entity(m.gold_entity_id);
}

std::vector<const MentionRecord*> Dataset::mentions_in_split(Split s) const {
    std::vector<const MentionRecord*> out;
    for (const auto& m : mentions)
        if (partition.split_of(m.domain) == s) out.push_back(&m);
    return out;
}

std::vector<std::string> Dataset::domains_in_split(Split s) const {
    switch (s) {
        case Split::Train: return partition.train_domains;
        case Split::Valid: return partition.valid_domains;
        case Split::Test: return partition.test_domains;
    }
    return {};
}

void Dataset::validate() const {
    partition.validate();
    for (const auto& [domain, kb] : kbs) {
        if (!partition.contains(domain))
            fail("domain '" + domain + "' has a KB but no partition assignment");
        for (const auto& e : kb.entities) {
            if (e.title.empty())
                fail("entity '" + e.entity_id + "': empty title");
            if (e.description.empty())
                fail("entity '" + e.entity_id + "': empty description");
        }
    }
    // zero-shot contract: entity id sets never overlap across splits
    std::map<std::string, Split> id_split;
    for (const auto& [domain, kb] : kbs) {
        Split s = partition.split_of(domain);
        for (const auto& e : kb.entities) {
            auto [it, fresh] = id_split.emplace(e.entity_id, s);
            if (!fresh && it->second != s)
                fail("entity id '" + e.entity_id + "' is shared across partitions");
        }
    }
    for (const auto& m : mentions) {
        if (m.surface.empty()) fail("mention '" + m.mention_id + "': empty surface");
        auto kb = kbs.find(m.domain);
        if (kb == kbs.end())
            fail("mention '" + m.mention_id + "': unknown domain '" + m.domain + "'");
        if (!kb->second.has(m.gold_entity_id))
            fail("mention '" + m.mention_id + "': gold entity '" + m.gold_entity_id +
                 "' not resolvable in domain '" + m.domain + "'");
    }
}

namespace {

ordered_json parse_line(const std::string& line, const std::string& where, size_t lineno) {
    try {
        return ordered_json::parse(line);
    } catch (const std::exception& e) {
        fail(where + " line " + std::to_string(lineno) + ": bad json: " + e.what());
    }
}

std::string str_field(const ordered_json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) fail(where + ": missing field '" + key + "'");
    if (!j.at(key).is_string()) fail(where + ": field '" + key + "' is not a string");
    return j.at(key).get<std::string>();
}

void load_documents_file(const std::string& path, const std::string& default_domain,
                         std::map<std::string, DomainKb>& kbs) {
    auto lines = read_lines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        ordered_json j = parse_line(lines[i], path, i + 1);
        std::string where = path + " line " + std::to_string(i + 1);
        EntityRecord e;
        e.entity_id = j.contains("entity_id") ? str_field(j, "entity_id", where)
                                              : str_field(j, "document_id", where);
        e.title = str_field(j, "title", where);
        e.description = j.contains("description") ? str_field(j, "description", where)
                                                  : str_field(j, "text", where);
        e.domain = j.contains("domain") ? str_field(j, "domain", where) : default_domain;
        if (e.domain.empty()) fail(where + ": record has no domain and file has no default");
        auto& kb = kbs[e.domain];
        if (kb.domain.empty()) kb.domain = e.domain;
        kb.add(std::move(e));
    }
}

MentionRecord mention_from_offsets(const ordered_json& j, const std::string& where,
                                   const std::map<std::string, DomainKb>& kbs,
                                   const std::string& domain) {
    MentionRecord m;
    m.mention_id = str_field(j, "mention_id", where);
    m.domain = domain;
    m.gold_entity_id = str_field(j, "label_document_id", where);
    std::string ctx_doc_id = str_field(j, "context_document_id", where);
    auto kb = kbs.find(domain);
    if (kb == kbs.end()) fail(where + ": unknown domain '" + domain + "'");
    if (!kb->second.has(ctx_doc_id))
        fail(where + ": context document '" + ctx_doc_id + "' not found in domain '" + domain +
             "'");
    const EntityRecord& doc = kb->second.entity(ctx_doc_id);
    auto tokens = split_whitespace(doc.description);
    long start = j.at("start_index").get<long>();
    long end = j.at("end_index").get<long>(); // inclusive
    if (start < 0 || end < start || end >= static_cast<long>(tokens.size()))
        fail(where + ": mention offsets [" + std::to_string(start) + "," + std::to_string(end) +
             "] out of range for document '" + ctx_doc_id + "'");
    std::vector<std::string> left(tokens.begin(), tokens.begin() + start);
    std::vector<std::string> span(tokens.begin() + start, tokens.begin() + end + 1);
    std::vector<std::string> right(tokens.begin() + end + 1, tokens.end());
    m.surface = join(span, " ");
    m.left_context = join(left, " ");
    m.right_context = join(right, " ");
    return m;
}

} // namespace

Dataset load_zeshel(const std::string& documents_path, const std::string& mentions_path,
                    const std::string& partition_config_path) {
    require(file_exists(documents_path), "documents path does not exist: " + documents_path);
    require(file_exists(mentions_path), "mentions path does not exist: " + mentions_path);
    require(file_exists(partition_config_path),
            "partition config does not exist: " + partition_config_path);

    Dataset ds;
    ds.partition = DomainPartition::from_config(Config::load(partition_config_path));

    if (fs::is_directory(documents_path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(documents_path))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            load_documents_file(f.string(), f.stem().string(), ds.kbs);
    } else {
        load_documents_file(documents_path, "", ds.kbs);
    }

    auto lines = read_lines(mentions_path);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        ordered_json j = parse_line(lines[i], mentions_path, i + 1);
        std::string where = mentions_path + " line " + std::to_string(i + 1);
        std::string domain = j.contains("corpus") ? str_field(j, "corpus", where)
                                                  : str_field(j, "domain", where);
        MentionRecord m;
        if (j.contains("start_index")) {
            m = mention_from_offsets(j, where, ds.kbs, domain);
        } else {
            m.mention_id = str_field(j, "mention_id", where);
            m.domain = domain;
            m.surface = j.contains("surface") ? str_field(j, "surface", where)
                                              : str_field(j, "text", where);
            m.left_context = j.contains("left_context") ? str_field(j, "left_context", where) : "";
            m.right_context =
                j.contains("right_context") ? str_field(j, "right_context", where) : "";
            m.gold_entity_id = j.contains("gold_entity_id")
                                   ? str_field(j, "gold_entity_id", where)
                                   : str_field(j, "label_document_id", where);
        }
        ds.mentions.push_back(std::move(m));
    }

    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ostringstream out;
        for (const auto& [domain, kb] : ds.kbs) {
            for (const auto& e : kb.entities) {
                ordered_json j;
                j["entity_id"] = e.entity_id;
                j["title"] = e.title;
                j["description"] = e.description;
                j["domain"] = e.domain;
                out << j.dump() << "\n";
            }
        }
        write_file_atomic(dir + "/entities.jsonl", out.str());
    }
    {
        std::ostringstream out;
        for (const auto& m : ds.mentions) {
            ordered_json j;
            j["mention_id"] = m.mention_id;
            j["surface"] = m.surface;
            j["left_context"] = m.left_context;
            j["right_context"] = m.right_context;
            j["gold_entity_id"] = m.gold_entity_id;
            j["domain"] = m.domain;
            out << j.dump() << "\n";
        }
        write_file_atomic(dir + "/mentions.jsonl", out.str());
    }
    write_file_atomic(dir + "/partition.cfg", ds.partition.to_config().dump());
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    ds.partition = DomainPartition::from_config(Config::load(dir + "/partition.cfg"));
    auto elines = read_lines(dir + "/entities.jsonl");
    for (size_t i = 0; i < elines.size(); ++i) {
        if (trim(elines[i]).empty()) continue;
        ordered_json j = parse_line(elines[i], dir + "/entities.jsonl", i + 1);
        EntityRecord e;
        e.entity_id = j.at("entity_id").get<std::string>();
        e.title = j.at("title").get<std::string>();
        e.description = j.at("description").get<std::string>();
        e.domain = j.at("domain").get<std::string>();
        auto& kb = ds.kbs[e.domain];
        if (kb.domain.empty()) kb.domain = e.domain;
        kb.add(std::move(e));
    }
    auto mlines = read_lines(dir + "/mentions.jsonl");
    for (size_t i = 0; i < mlines.size(); ++i) {
        if (trim(mlines[i]).empty()) continue;
        ordered_json j = parse_line(mlines[i], dir + "/mentions.jsonl", i + 1);
        MentionRecord m;
        m.mention_id = j.at("mention_id").get<std::string>();
        m.surface = j.at("surface").get<std::string>();
        m.left_context = j.at("left_context").get<std::string>();
        m.right_context = j.at("right_context").get<std::string>();
        m.gold_entity_id = j.at("gold_entity_id").get<std::string>();
        m.domain = j.at("domain").get<std::string>();
        ds.mentions.push_back(std::move(m));
    }
    ds.validate();
    return ds;
}

} // namespace res
