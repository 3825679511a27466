#include "res/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "res/textio.hpp"

namespace res {

namespace {

using nlohmann::ordered_json;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

// Top-1 entity among the first k retrieved candidates, according to the
// prediction's ranking. Empty when the ranking avoids the top-k entirely.
std::string topk_prediction(const CandidateSet& set, const Prediction& p, int k) {
    const int limit = std::min<int>(k, static_cast<int>(set.candidates.size()));
    for (const std::string& id : p.ranked_entity_ids) {
        for (int i = 0; i < limit; ++i)
            if (set.candidates[static_cast<std::size_t>(i)].entity_id == id) return id;
    }
    return {};
}

}  // namespace

const char* category_name(MentionCategory c) {
    switch (c) {
        case MentionCategory::HO: return "HO";
        case MentionCategory::MC: return "MC";
        case MentionCategory::AS: return "AS";
        case MentionCategory::LO: return "LO";
    }
    fail("unreachable category");
}

MentionCategory categorize(const std::string& surface, const std::string& title) {
    const std::string s = normalize_text(surface);
    const std::string t = normalize_text(title);
    require(!s.empty() && !t.empty(), "categorize: empty surface or title");
    if (s == t) return MentionCategory::HO;
    if (t.size() > s.size() && t.compare(0, s.size(), s) == 0) return MentionCategory::MC;
    if (t.find(s) != std::string::npos) return MentionCategory::AS;
    return MentionCategory::LO;
}

void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
    std::string out;
    for (const Prediction& p : preds) {
        require(!p.ranked_entity_ids.empty(), "save_predictions: empty ranking for " + p.mention_id);
        require(p.scores.size() == p.ranked_entity_ids.size(),
                "save_predictions: score/ranking length mismatch for " + p.mention_id);
        ordered_json j;
        j["mention_id"] = p.mention_id;
        j["entities"] = p.ranked_entity_ids;
        j["scores"] = p.scores;
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::unordered_map<std::string, Prediction> load_predictions(const std::string& path) {
    std::unordered_map<std::string, Prediction> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        require(!j.is_discarded(), "predictions: malformed JSON line in " + path);
        Prediction p;
        p.mention_id = j.at("mention_id").get<std::string>();
        p.ranked_entity_ids = j.at("entities").get<std::vector<std::string>>();
        p.scores = j.at("scores").get<std::vector<real>>();
        require(!p.ranked_entity_ids.empty(), "predictions: empty ranking for " + p.mention_id);
        require(p.scores.size() == p.ranked_entity_ids.size(),
                "predictions: score/ranking length mismatch for " + p.mention_id);
        require(out.emplace(p.mention_id, std::move(p)).second,
                "predictions: duplicate mention " + j.at("mention_id").get<std::string>());
    }
    return out;
}

std::pair<real, real> aggregate(const std::vector<real>& accuracies,
                                const std::vector<long>& sizes) {
    require(!accuracies.empty(), "aggregate: empty input");
    require(accuracies.size() == sizes.size(), "aggregate: accuracy/size length mismatch");
    real macro = 0;
    real weighted = 0;
    long total = 0;
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        require(sizes[i] > 0, "aggregate: subset sizes must be positive");
        macro += accuracies[i];
        weighted += accuracies[i] * static_cast<real>(sizes[i]);
        total += sizes[i];
    }
    macro /= static_cast<real>(accuracies.size());
    return {macro, weighted / static_cast<real>(total)};
}

std::vector<DomainAccuracy> normalized_accuracy(
    const Dataset& ds, Split split, const std::unordered_map<std::string, CandidateSet>& cands,
    const std::unordered_map<std::string, Prediction>& preds, int k) {
    require(k >= 1, "normalized_accuracy: k must be >= 1");
    std::map<std::string, DomainAccuracy> by_domain;
    for (const MentionRecord* m : ds.mentions_in_split(split)) {
        auto cit = cands.find(m->mention_id);
        if (cit == cands.end()) continue;
        const int gold_rank = cit->second.rank_of(m->gold_entity_id);
        if (gold_rank < 0 || gold_rank >= k) continue;
        auto pit = preds.find(m->mention_id);
        if (pit == preds.end())
            fail("normalized_accuracy: prediction missing for subset mention " + m->mention_id);
        DomainAccuracy& d = by_domain[m->domain];
        d.domain = m->domain;
        ++d.subset;
        if (topk_prediction(cit->second, pit->second, k) == m->gold_entity_id) ++d.correct;
    }
    std::vector<DomainAccuracy> out;
    out.reserve(by_domain.size());
    for (auto& [name, d] : by_domain) {
        d.accuracy = static_cast<real>(d.correct) / static_cast<real>(d.subset);
        out.push_back(d);
    }
    return out;
}

real unnormalized_accuracy(const Dataset& ds, Split split,
                           const std::unordered_map<std::string, Prediction>& preds,
                           long* correct_out, long* total_out) {
    long correct = 0;
    long total = 0;
    for (const MentionRecord* m : ds.mentions_in_split(split)) {
        ++total;
        auto it = preds.find(m->mention_id);
        if (it != preds.end() && it->second.ranked_entity_ids.front() == m->gold_entity_id)
            ++correct;
    }
    if (correct_out) *correct_out = correct;
    if (total_out) *total_out = total;
    return total == 0 ? 0.0 : static_cast<real>(correct) / static_cast<real>(total);
}

std::vector<ScalingPoint> scaling_curve(const RankerFn& ranker, const Dataset& ds, Split split,
                                        const std::unordered_map<std::string, CandidateSet>& cands,
                                        const std::vector<int>& k_values) {
    require(static_cast<bool>(ranker), "scaling_curve: no ranker");
    require(!k_values.empty(), "scaling_curve: no k values");
    std::vector<ScalingPoint> out;
    for (int k : k_values) {
        require(k >= 1, "scaling_curve: k must be >= 1");
        ScalingPoint pt;
        pt.k = k;
        long norm_correct = 0;
        long unnorm_correct = 0;
        for (const MentionRecord* m : ds.mentions_in_split(split)) {
            ++pt.total;
            auto cit = cands.find(m->mention_id);
            if (cit == cands.end()) continue;
            const CandidateSet trunc = cit->second.truncated(k);
            if (trunc.candidates.empty()) continue;
            const DomainKb& kb = ds.kbs.at(m->domain);
            std::vector<const EntityRecord*> ptrs;
            ptrs.reserve(trunc.candidates.size());
            for (const ScoredCandidate& c : trunc.candidates) ptrs.push_back(&kb.entity(c.entity_id));
            const std::string predicted = ranker(*m, ptrs);
            const bool correct = predicted == m->gold_entity_id;
            if (correct) ++unnorm_correct;
            if (trunc.rank_of(m->gold_entity_id) >= 0) {
                ++pt.subset;
                if (correct) ++norm_correct;
            }
        }
        pt.normalized =
            pt.subset == 0 ? 0.0 : static_cast<real>(norm_correct) / static_cast<real>(pt.subset);
        pt.unnormalized =
            pt.total == 0 ? 0.0 : static_cast<real>(unnorm_correct) / static_cast<real>(pt.total);
        out.push_back(pt);
    }
    return out;
}

EvalReport evaluate(const Dataset& ds, Split split,
                    const std::unordered_map<std::string, CandidateSet>& cands,
                    const std::unordered_map<std::string, Prediction>& preds, int k,
                    const std::string& label) {
    EvalReport r;
    r.label = label;
    r.split = split_name(split);
    r.k = k;
    r.domains = normalized_accuracy(ds, split, cands, preds, k);
    std::vector<real> accs;
    std::vector<long> sizes;
    for (const DomainAccuracy& d : r.domains) {
        accs.push_back(d.accuracy);
        sizes.push_back(d.subset);
        r.subset_total += d.subset;
    }
    if (!accs.empty()) {
        auto [macro, micro] = aggregate(accs, sizes);
        r.macro = macro;
        r.micro = micro;
    }
    r.unnormalized = unnormalized_accuracy(ds, split, preds, &r.unnorm_correct, &r.total_mentions);

    const MentionCategory cats[] = {MentionCategory::HO, MentionCategory::MC, MentionCategory::AS,
                                    MentionCategory::LO};
    for (MentionCategory c : cats) r.categories.push_back(CategoryAccuracy{c, 0, 0, 0});
    for (const MentionRecord* m : ds.mentions_in_split(split)) {
        auto cit = cands.find(m->mention_id);
        if (cit == cands.end()) continue;
        const int gold_rank = cit->second.rank_of(m->gold_entity_id);
        if (gold_rank < 0 || gold_rank >= k) continue;
        const std::string& title = ds.kbs.at(m->domain).entity(m->gold_entity_id).title;
        CategoryAccuracy& slot =
            r.categories[static_cast<std::size_t>(categorize(m->surface, title))];
        ++slot.count;
        if (topk_prediction(cit->second, preds.at(m->mention_id), k) == m->gold_entity_id)
            ++slot.correct;
    }
    for (CategoryAccuracy& c : r.categories)
        c.accuracy = c.count == 0 ? 0.0 : static_cast<real>(c.correct) / static_cast<real>(c.count);
    return r;
}

std::string report_text(const EvalReport& r) {
    std::ostringstream os;
    os << "label: " << r.label << "\n";
    os << "split: " << r.split << "\n";
    os << "k: " << r.k << "\n";
    os << "domains:\n";
    std::size_t width = 6;
    for (const DomainAccuracy& d : r.domains) width = std::max(width, d.domain.size());
    for (const DomainAccuracy& d : r.domains) {
        os << "  " << d.domain << std::string(width - d.domain.size() + 2, ' ') << d.correct << "/"
           << d.subset << "  " << fmt("%.4f", d.accuracy) << "\n";
    }
    os << "macro: " << fmt("%.4f", r.macro) << "\n";
    os << "micro: " << fmt("%.4f", r.micro) << "\n";
    os << "normalized subset: " << r.subset_total << " of " << r.total_mentions << " mentions\n";
    os << "unnormalized: " << fmt("%.4f", r.unnormalized) << " (" << r.unnorm_correct << "/"
       << r.total_mentions << ")\n";
    os << "categories:\n";
    for (const CategoryAccuracy& c : r.categories) {
        os << "  " << category_name(c.category) << "  " << c.correct << "/" << c.count << "  "
           << fmt("%.4f", c.accuracy) << "\n";
    }
    if (!r.scaling.empty()) {
        os << "scaling:\n";
        for (const ScalingPoint& p : r.scaling) {
            os << "  k=" << p.k << "  subset=" << p.subset << "/" << p.total
               << "  normalized=" << fmt("%.4f", p.normalized)
               << "  unnormalized=" << fmt("%.4f", p.unnormalized) << "\n";
        }
    }
    return os.str();
}

std::string report_jsonl(const EvalReport& r) {
    std::string out;
    {
        ordered_json j;
        j["record"] = "summary";
        j["label"] = r.label;
        j["split"] = r.split;
        j["k"] = r.k;
        j["macro"] = r.macro;
        j["micro"] = r.micro;
        j["subset"] = r.subset_total;
        j["total"] = r.total_mentions;
        j["unnormalized"] = r.unnormalized;
        j["unnormalized_correct"] = r.unnorm_correct;
        out += j.dump();
        out += '\n';
    }
    for (const DomainAccuracy& d : r.domains) {
        ordered_json j;
        j["record"] = "domain";
        j["domain"] = d.domain;
        j["subset"] = d.subset;
        j["correct"] = d.correct;
        j["accuracy"] = d.accuracy;
        out += j.dump();
        out += '\n';
    }
    for (const CategoryAccuracy& c : r.categories) {
        ordered_json j;
        j["record"] = "category";
        j["category"] = category_name(c.category);
        j["count"] = c.count;
        j["correct"] = c.correct;
        j["accuracy"] = c.accuracy;
        out += j.dump();
        out += '\n';
    }
    for (const ScalingPoint& p : r.scaling) {
        ordered_json j;
        j["record"] = "scaling";
        j["k"] = p.k;
        j["subset"] = p.subset;
        j["total"] = p.total;
        j["normalized"] = p.normalized;
        j["unnormalized"] = p.unnormalized;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string scaling_tsv(const std::vector<ScalingPoint>& pts) {
    std::string out = "k\tsubset\ttotal\tnormalized\tunnormalized\n";
    char buf[128];
    for (const ScalingPoint& p : pts) {
        std::snprintf(buf, sizeof(buf), "%d\t%ld\t%ld\t%.6f\t%.6f\n", p.k, p.subset, p.total,
                      p.normalized, p.unnormalized);
        out += buf;
    }
    return out;
}

std::string scaling_svg(const std::vector<ScalingPoint>& pts, bool normalized_metric,
                        const std::string& title) {
    require(!pts.empty(), "scaling_svg: no points");
    const int w = 640, h = 400, ml = 64, mr = 24, mt = 48, mb = 56;
    const real pw = w - ml - mr;
    const real ph = h - mt - mb;
    auto xpos = [&](std::size_t i) {
        return pts.size() == 1 ? ml + pw / 2
                               : ml + pw * static_cast<real>(i) / static_cast<real>(pts.size() - 1);
    };
    auto ypos = [&](real v) { return mt + ph * (1.0 - v); };
    const char* color = normalized_metric ? "#1f77b4" : "#d62728";
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\" fill=\"#000\">"
       << title << "</text>\n";
    for (int grid = 0; grid <= 4; ++grid) {
        const real v = 0.25 * grid;
        os << "<line x1=\"" << ml << "\" y1=\"" << fmt("%.1f", ypos(v)) << "\" x2=\"" << (w - mr)
           << "\" y2=\"" << fmt("%.1f", ypos(v)) << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << (ml - 8) << "\" y=\"" << fmt("%.1f", ypos(v) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#000\">"
           << fmt("%.2f", v) << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const real v = normalized_metric ? pts[i].normalized : pts[i].unnormalized;
        os << fmt("%.1f", xpos(i)) << "," << fmt("%.1f", ypos(v)) << " ";
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const real v = normalized_metric ? pts[i].normalized : pts[i].unnormalized;
        os << "<circle cx=\"" << fmt("%.1f", xpos(i)) << "\" cy=\"" << fmt("%.1f", ypos(v))
           << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << fmt("%.1f", xpos(i)) << "\" y=\"" << fmt("%.1f", ypos(v) - 8)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
              "fill=\"#000\">"
           << fmt("%.3f", v) << "</text>\n";
        os << "<text x=\"" << fmt("%.1f", xpos(i)) << "\" y=\"" << (h - mb + 20)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
              "fill=\"#000\">"
           << pts[i].k << "</text>\n";
    }
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << (h - mb)
       << "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << (h - mb) << "\" x2=\"" << (w - mr) << "\" y2=\""
       << (h - mb) << "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"" << (h - 12)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
          "fill=\"#000\">candidates k</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string diff_predictions(const std::unordered_map<std::string, Prediction>& a,
                             const std::unordered_map<std::string, Prediction>& b,
                             const Dataset& ds, Split split) {
    std::vector<const MentionRecord*> mentions = ds.mentions_in_split(split);
    std::sort(mentions.begin(), mentions.end(),
              [](const MentionRecord* x, const MentionRecord* y) {
                  return x->mention_id < y->mention_id;
              });
    std::string body;
    long disagreements = 0;
    for (const MentionRecord* m : mentions) {
        auto ai = a.find(m->mention_id);
        auto bi = b.find(m->mention_id);
        const std::string at = ai == a.end() ? "-" : ai->second.ranked_entity_ids.front();
        const std::string bt = bi == b.end() ? "-" : bi->second.ranked_entity_ids.front();
        if (at == bt) continue;
        ++disagreements;
        body += m->mention_id + "\t" + m->gold_entity_id + "\t" + at + "\t" + bt + "\n";
    }
    std::string out = "# disagreements: " + std::to_string(disagreements) + " of " +
                      std::to_string(mentions.size()) + " mentions\n";
    out += "mention_id\tgold\ta_top1\tb_top1\n";
    out += body;
    return out;
}

}  // namespace res
