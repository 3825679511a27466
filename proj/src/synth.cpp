#include <algorithm>
#include <set>

#include "res/corpus.hpp"
#include "res/textio.hpp"

namespace res {

namespace {

// Closed list of two-syllable items over a 70-syllable inventory, random
// pairs deduplicated in a fixed order independent of the world seed. Random
// pairing keeps items structurally unrelated (an enumeration would hand
// whole pool slices the same second syllable). `sep` controls whether the
// two syllables form one fused word ("kato") or stay two words ("ka to"):
// spaced items tokenize as two standalone syllable words that the merge
// table always covers, so an item never seen in training still consists
// entirely of familiar whole tokens.
std::vector<std::string> make_word_list(size_t count, const std::string& sep, uint64_t seed) {
    static const char* consonants[] = {"b", "d", "f", "g", "k", "l", "m",
                                       "n", "p", "r", "s", "t", "v", "z"};
    static const char* vowels[] = {"a", "e", "i", "o", "u"};
    std::vector<std::string> syllables;
    for (const char* c : consonants)
        for (const char* v : vowels) syllables.push_back(std::string(c) + v);
    require(count <= syllables.size() * syllables.size() / 2,
            "word list request exceeds half the two-syllable space");
    Rng rng(seed);
    std::vector<std::string> words;
    std::set<std::string> seen;
    words.reserve(count);
    while (words.size() < count) {
        std::string w = syllables[rng.below(syllables.size())] + sep +
                        syllables[rng.below(syllables.size())];
        if (seen.insert(w).second) words.push_back(w);
    }
    return words;
}

struct WordPools {
    std::vector<std::string> fillers;
    std::vector<std::string> categories;
    std::vector<std::string> names;
    std::vector<std::string> signatures;
};

// Identity and signature pools are sized well past the per-domain draw so
// different domains share almost no content items. A model can then only fit
// the training split by learning to MATCH items between mention and
// description, not by memorizing which item goes with which entity, and
// matching transfers to held-out domains. Names and signatures are SPACED
// syllable pairs while fillers and categories are fused words: after merge
// training every syllable and every background word is a single token, so a
// held-out domain contains no token the model has not seen thousands of
// times, only new orderings of known tokens. The tiny category pool gives
// every entity one common title word, so retrieval always surfaces
// same-category distractors instead of collapsing to a single match.
WordPools make_pools(int entities_per_domain) {
    size_t n_fill = 30;
    size_t n_cats = 6;
    size_t n_names = std::max<size_t>(64, static_cast<size_t>(entities_per_domain) * 8);
    size_t n_sigs = std::max<size_t>(64, static_cast<size_t>(entities_per_domain) * 8);
    auto background = make_word_list(n_fill + n_cats, "", 0xbac69d00ULL);
    auto spaced = make_word_list(n_names + n_sigs, " ", 0x5eedf00dULL);
    WordPools p;
    p.fillers.assign(background.begin(), background.begin() + static_cast<long>(n_fill));
    p.categories.assign(background.begin() + static_cast<long>(n_fill), background.end());
    p.names.assign(spaced.begin(), spaced.begin() + static_cast<long>(n_names));
    p.signatures.assign(spaced.begin() + static_cast<long>(n_names), spaced.end());
    return p;
}

std::string pick(Rng& rng, const std::vector<std::string>& pool) {
    return pool[rng.below(pool.size())];
}

std::vector<std::string> pick_fillers(Rng& rng, const WordPools& pools, int lo, int hi) {
    int n = lo + static_cast<int>(rng.below(static_cast<uint64_t>(hi - lo + 1)));
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(pick(rng, pools.fillers));
    return out;
}

std::string domain_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "world_%02d", i);
    return buf;
}

std::string entity_id(const std::string& domain, int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "e%04d", i);
    return domain + "/" + buf;
}

struct DomainPlan {
    DomainKb kb;
    std::vector<MentionRecord> mentions;
    // per entity: signature item, the distinguishing title item, and in hard
    // mode the family the entity belongs to (same title prefix)
    std::vector<std::string> signatures;
    std::vector<std::string> member;
    std::vector<int> family_of;
    std::vector<std::vector<int>> families;
    std::vector<std::string> family_prefix;
};

// titles, descriptions and signatures for one domain
DomainPlan build_domain_entities(const std::string& domain, const SynthConfig& cfg,
                                 const WordPools& pools, Rng& rng) {
    DomainPlan plan;
    plan.kb.domain = domain;

    // unique signature per entity within the domain
    std::vector<std::string> sigs = pools.signatures;
    rng.shuffle(sigs);
    require(static_cast<int>(sigs.size()) >= cfg.entities_per_domain,
            "signature pool smaller than entities_per_domain");

    if (cfg.level == Confusability::Easy) {
        // title = shared category word + identity word unique in the domain.
        // Same-category entities land in each other's candidate sets, but
        // only the gold shares the identity word with the mention surface.
        std::vector<std::string> ids = pools.names;
        rng.shuffle(ids);
        require(static_cast<int>(ids.size()) >= cfg.entities_per_domain,
                "name pool smaller than entities_per_domain");
        for (int i = 0; i < cfg.entities_per_domain; ++i) {
            EntityRecord e;
            e.entity_id = entity_id(domain, i);
            e.domain = domain;
            e.title = pick(rng, pools.categories) + " " + ids[i];
            std::string sig = sigs[i];
            auto fill = pick_fillers(rng, pools, 1, 2);
            e.description = e.title + " " + sig + " " + join(fill, " ");
            plan.signatures.push_back(sig);
            plan.member.push_back(ids[i]);
            plan.family_of.push_back(-1);
            plan.kb.add(std::move(e));
        }
        return plan;
    }

    // hard mode: families of entities sharing a two-word title prefix,
    // distinguished by a member word; the signature token in the description
    // is the only context-visible difference between family members
    int family_size = std::min(6, cfg.entities_per_domain);
    require(family_size >= 4,
            "hard mode needs entities_per_domain >= 4 for same-prefix distractors");
    std::set<std::pair<std::string, std::string>> used_prefixes;
    int next_entity = 0;
    while (next_entity < cfg.entities_per_domain) {
        std::pair<std::string, std::string> pre;
        do {
            pre = {pick(rng, pools.names), pick(rng, pools.names)};
        } while (!used_prefixes.insert(pre).second);
        std::string prefix = pre.first + " " + pre.second;
        int members = std::min(family_size, cfg.entities_per_domain - next_entity);
        if (members < family_size && !plan.families.empty()) {
            // tail too small for a family of its own; extend the last family
            members = cfg.entities_per_domain - next_entity;
            prefix = plan.family_prefix.back();
        } else {
            plan.families.emplace_back();
            plan.family_prefix.push_back(prefix);
        }
        int fam = static_cast<int>(plan.families.size()) - 1;
        std::set<std::string> used_members;
        for (int j = 0; j < members; ++j) {
            std::string member;
            do {
                member = pick(rng, pools.names);
            } while (!used_members.insert(member).second);
            EntityRecord e;
            e.entity_id = entity_id(domain, next_entity);
            e.domain = domain;
            e.title = plan.family_prefix[fam] + " " + member;
            std::string sig = sigs[next_entity];
            auto fill = pick_fillers(rng, pools, 2, 4);
            e.description = e.title + " " + sig + " " + join(fill, " ");
            plan.signatures.push_back(sig);
            plan.member.push_back(member);
            plan.family_of.push_back(fam);
            plan.families[fam].push_back(next_entity);
            plan.kb.add(std::move(e));
            ++next_entity;
        }
    }
    return plan;
}

void build_domain_mentions(DomainPlan& plan, const SynthConfig& cfg, const WordPools& pools,
                           Rng& rng) {
    const std::string& domain = plan.kb.domain;
    int n_entities = static_cast<int>(plan.kb.entities.size());
    for (int i = 0; i < cfg.mentions_per_domain; ++i) {
        MentionRecord m;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "m%04d", i);
        m.mention_id = domain + "/" + buf;
        m.domain = domain;

        int gold;
        if (cfg.level == Confusability::Easy) {
            gold = static_cast<int>(rng.below(n_entities));
        } else {
            // gold always a family member so same-prefix distractors exist
            int fam = static_cast<int>(rng.below(plan.families.size()));
            const auto& members = plan.families[fam];
            gold = members[rng.below(members.size())];
        }
        const EntityRecord& e = plan.kb.entities[gold];
        m.gold_entity_id = e.entity_id;
        m.surface =
            cfg.level == Confusability::Easy ? e.title : plan.family_prefix[plan.family_of[gold]];

        // context: the gold signature plus fillers. Hard mode also plants
        // the gold title's member item and the signatures of up to two
        // same-family competitors, so a lone "my signature appears" detector
        // fires for three candidates and only the signature+member
        // conjunction, checked against a long scattered context, singles out
        // the gold.
        std::vector<std::string> ctx = cfg.level == Confusability::Easy
                                           ? pick_fillers(rng, pools, 2, 4)
                                           : pick_fillers(rng, pools, 8, 12);
        ctx.push_back(plan.signatures[gold]);
        if (cfg.level == Confusability::Hard) {
            ctx.push_back(plan.member[gold]);
            std::vector<int> siblings;
            for (int other : plan.families[plan.family_of[gold]])
                if (other != gold) siblings.push_back(other);
            rng.shuffle(siblings);
            for (size_t d = 0; d < siblings.size() && d < 2; ++d)
                ctx.push_back(plan.signatures[siblings[d]]);
        }
        rng.shuffle(ctx);
        size_t cut = 1 + rng.below(ctx.size() - 1);
        m.left_context = join({ctx.begin(), ctx.begin() + cut}, " ");
        m.right_context = join({ctx.begin() + cut, ctx.end()}, " ");
        plan.mentions.push_back(std::move(m));
    }
}

} // namespace

Confusability confusability_from_name(const std::string& name) {
    if (name == "easy") return Confusability::Easy;
    if (name == "hard") return Confusability::Hard;
    fail("unknown confusability level: " + name + " (expected easy|hard)");
}

Dataset generate_synthetic_world(const SynthConfig& cfg) {
    require(cfg.n_domains >= 1, "n_domains must be >= 1");
    require(cfg.entities_per_domain >= 1, "entities_per_domain must be >= 1");
    require(cfg.mentions_per_domain >= 1, "mentions_per_domain must be >= 1");

    Dataset ds;
    WordPools pools = make_pools(cfg.entities_per_domain);

    for (int d = 0; d < cfg.n_domains; ++d) {
        std::string domain = domain_name(d);
        Rng rng(cfg.seed ^ fnv1a64(domain));
        DomainPlan plan = build_domain_entities(domain, cfg, pools, rng);
        build_domain_mentions(plan, cfg, pools, rng);
        ds.kbs[domain] = std::move(plan.kb);
        for (auto& m : plan.mentions) ds.mentions.push_back(std::move(m));
    }

    // split sizes follow the 8/4/4 proportions of a 16-domain corpus
    int n = cfg.n_domains;
    int q = std::max(1, n / 4);
    int n_test = n >= 2 ? q : 0;
    int n_valid = n >= 3 ? q : 0;
    int n_train = n - n_valid - n_test;
    for (int d = 0; d < n; ++d) {
        std::string domain = domain_name(d);
        if (d < n_train)
            ds.partition.train_domains.push_back(domain);
        else if (d < n_train + n_valid)
            ds.partition.valid_domains.push_back(domain);
        else
            ds.partition.test_domains.push_back(domain);
    }

    ds.validate();
    return ds;
}

} // namespace res
