#include "res/tokenizer.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <utility>

#include "res/textio.hpp"

namespace res {

namespace {

constexpr const char* kWordEnd = "</w>";
constexpr const char* kUnkSymbol = "[UNK]";

std::string pair_key(const std::string& a, const std::string& b) {
    std::string k;
    k.reserve(a.size() + b.size() + 1);
    k += a;
    k += '\x01';
    k += b;
    return k;
}

std::vector<std::string> word_symbols(const std::string& word) {
    std::vector<std::string> syms;
    syms.reserve(word.size());
    for (char ch : word) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (c >= 33 && c <= 126)
            syms.emplace_back(1, ch);
        else
            syms.emplace_back(kUnkSymbol);
    }
    if (!syms.empty() && syms.back() != kUnkSymbol) syms.back() += kWordEnd;
    return syms;
}

void apply_merge(std::vector<std::string>& syms, const std::string& a, const std::string& b,
                 const std::string& merged) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < syms.size();) {
        if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
            syms[out++] = merged;
            i += 2;
        } else {
            if (out != i) syms[out] = std::move(syms[i]);
            ++out;
            ++i;
        }
    }
    syms.resize(out);
}

}  // namespace

void Tokenizer::seed_base_vocab() {
    id_to_text_.assign({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[START]", "[END]"});
    for (int i = 0; i < prefix_len_; ++i)
        id_to_text_.push_back("[PRE_" + std::to_string(i + 1) + "]");
    for (int c = 33; c <= 126; ++c) {
        std::string s(1, static_cast<char>(c));
        symbol_to_id_[s] = static_cast<int>(id_to_text_.size());
        id_to_text_.push_back(s);
    }
    for (int c = 33; c <= 126; ++c) {
        std::string s(1, static_cast<char>(c));
        s += kWordEnd;
        symbol_to_id_[s] = static_cast<int>(id_to_text_.size());
        id_to_text_.push_back(s);
    }
}

Tokenizer Tokenizer::train(const std::vector<std::string>& texts, const TokenizerConfig& cfg) {
    require(cfg.prefix_len >= 1, "tokenizer: prefix_len must be >= 1");
    require(cfg.max_merges >= 0, "tokenizer: max_merges must be >= 0");
    require(cfg.min_pair_count >= 1, "tokenizer: min_pair_count must be >= 1");
    Tokenizer tk;
    tk.prefix_len_ = cfg.prefix_len;
    tk.seed_base_vocab();

    std::unordered_map<std::string, long> freq;
    for (const auto& text : texts)
        for (auto& w : split_whitespace(text)) ++freq[w];

    struct WordEntry {
        std::vector<std::string> syms;
        long count;
    };
    std::vector<std::string> distinct;
    distinct.reserve(freq.size());
    for (const auto& [w, c] : freq) distinct.push_back(w);
    std::sort(distinct.begin(), distinct.end());
    std::vector<WordEntry> words;
    words.reserve(distinct.size());
    for (const auto& w : distinct) words.push_back({word_symbols(w), freq[w]});

    for (int m = 0; m < cfg.max_merges; ++m) {
        std::unordered_map<std::string, long> pair_count;
        for (const auto& we : words) {
            for (std::size_t i = 0; i + 1 < we.syms.size(); ++i) {
                if (we.syms[i] == kUnkSymbol || we.syms[i + 1] == kUnkSymbol) continue;
                pair_count[pair_key(we.syms[i], we.syms[i + 1])] += we.count;
            }
        }
        long best = 0;
        std::string best_key;
        for (const auto& [key, c] : pair_count) {
            if (c > best || (c == best && c > 0 && key < best_key)) {
                best = c;
                best_key = key;
            }
        }
        if (best < cfg.min_pair_count) break;
        const auto cut = best_key.find('\x01');
        const std::string a = best_key.substr(0, cut);
        const std::string b = best_key.substr(cut + 1);
        const std::string merged = a + b;
        tk.merges_.emplace_back(a, b);
        tk.merge_rank_[best_key] = m;
        if (!tk.symbol_to_id_.count(merged)) {
            tk.symbol_to_id_[merged] = static_cast<int>(tk.id_to_text_.size());
            tk.id_to_text_.push_back(merged);
        }
        for (auto& we : words) apply_merge(we.syms, a, b, merged);
    }
    return tk;
}

int Tokenizer::symbol_id(const std::string& symbol) const {
    auto it = symbol_to_id_.find(symbol);
    return it == symbol_to_id_.end() ? kUnk : it->second;
}

std::vector<int> Tokenizer::encode_word(const std::string& word) const {
    std::vector<std::string> syms = word_symbols(word);
    while (syms.size() >= 2) {
        int best_rank = std::numeric_limits<int>::max();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
            auto it = merge_rank_.find(pair_key(syms[i], syms[i + 1]));
            if (it != merge_rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best_i = i;
            }
        }
        if (best_rank == std::numeric_limits<int>::max()) break;
        const std::string a = syms[best_i];
        const std::string b = syms[best_i + 1];
        apply_merge(syms, a, b, a + b);
    }
    std::vector<int> ids;
    ids.reserve(syms.size());
    for (const auto& s : syms) ids.push_back(symbol_id(s));
    return ids;
}

std::vector<int> Tokenizer::encode(const std::string& text) const {
    std::vector<int> out;
    for (auto& word : split_whitespace(text)) {
        auto it = word_cache_.find(word);
        if (it == word_cache_.end()) it = word_cache_.emplace(word, encode_word(word)).first;
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        require(0 <= id && id < vocab_size(), "decode: token id out of range");
        if (id == kUnk) {
            out += kUnkSymbol;
            continue;
        }
        if (is_special(id)) continue;
        const std::string& t = id_to_text_[static_cast<std::size_t>(id)];
        const std::size_t n = t.size();
        constexpr std::size_t kSuffixLen = 4;  // strlen("</w>")
        if (n >= kSuffixLen && t.compare(n - kSuffixLen, kSuffixLen, kWordEnd) == 0) {
            out.append(t, 0, n - kSuffixLen);
            out += ' ';
        } else {
            out += t;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

int Tokenizer::prefix_id(int i) const {
    require(0 <= i && i < prefix_len_, "prefix_id: index out of range");
    return kFirstPrefix + i;
}

const std::string& Tokenizer::token_text(int id) const {
    require(0 <= id && id < vocab_size(), "token_text: id out of range");
    return id_to_text_[static_cast<std::size_t>(id)];
}

std::string Tokenizer::serialized() const {
    std::ostringstream os;
    os << "res-bpe 1\n";
    os << "prefix_len " << prefix_len_ << "\n";
    os << "merges " << merges_.size() << "\n";
    for (const auto& [a, b] : merges_) os << a << ' ' << b << "\n";
    return os.str();
}

Tokenizer Tokenizer::from_serialized(const std::string& blob) {
    std::istringstream is(blob);
    std::string magic;
    int version = 0;
    is >> magic >> version;
    require(magic == "res-bpe" && version == 1, "tokenizer: unrecognized serialization header");
    std::string key;
    Tokenizer tk;
    is >> key >> tk.prefix_len_;
    require(key == "prefix_len" && tk.prefix_len_ >= 1, "tokenizer: bad prefix_len field");
    std::size_t n_merges = 0;
    is >> key >> n_merges;
    require(key == "merges", "tokenizer: bad merges field");
    tk.seed_base_vocab();
    for (std::size_t m = 0; m < n_merges; ++m) {
        std::string a, b;
        is >> a >> b;
        require(!a.empty() && !b.empty(), "tokenizer: truncated merge list");
        tk.merges_.emplace_back(a, b);
        tk.merge_rank_[pair_key(a, b)] = static_cast<int>(m);
        const std::string merged = a + b;
        if (!tk.symbol_to_id_.count(merged)) {
            tk.symbol_to_id_[merged] = static_cast<int>(tk.id_to_text_.size());
            tk.id_to_text_.push_back(merged);
        }
    }
    return tk;
}

std::uint64_t Tokenizer::vocab_hash() const { return fnv1a64(serialized()); }

}  // namespace res
