#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "res/common.hpp"

namespace res {

struct TokenizerConfig {
    int prefix_len = 3;
    int max_merges = 2000;
    int min_pair_count = 2;
};

// Whitespace pre-tokenization followed by greedy byte-pair merges learned
// from a training corpus. The base vocabulary is seeded with every printable
// ASCII character (plain and word-final form), so any ASCII word is always
// encodable; other bytes fall back to [UNK].
//
// Id layout, in order: [PAD] [UNK] [CLS] [SEP] [START] [END],
// then [PRE_1..PRE_Lp], then the 188 base symbols, then one id per merge.
//
// encode() caches per-word results; instances are not thread-safe.
class Tokenizer {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;
    static constexpr int kStart = 4;
    static constexpr int kEnd = 5;

    Tokenizer() = default;

    static Tokenizer train(const std::vector<std::string>& texts, const TokenizerConfig& cfg);

    // Subword ids for the text; no special tokens added.
    std::vector<int> encode(const std::string& text) const;

    // Inverse of encode up to whitespace normalization. Special tokens other
    // than [UNK] are skipped.
    std::string decode(const std::vector<int>& ids) const;

    int vocab_size() const { return static_cast<int>(id_to_text_.size()); }
    int prefix_len() const { return prefix_len_; }
    int prefix_id(int i) const;
    int special_count() const { return kFirstPrefix + prefix_len_; }
    const std::string& token_text(int id) const;
    bool is_special(int id) const { return id < special_count(); }

    std::uint64_t vocab_hash() const;

    std::string serialized() const;
    static Tokenizer from_serialized(const std::string& blob);

  private:
    static constexpr int kFirstPrefix = 6;

    void seed_base_vocab();
    int symbol_id(const std::string& symbol) const;
    std::vector<int> encode_word(const std::string& word) const;

    int prefix_len_ = 0;
    std::vector<std::string> id_to_text_;
    std::unordered_map<std::string, int> symbol_to_id_;
    std::vector<std::pair<std::string, std::string>> merges_;
    std::unordered_map<std::string, int> merge_rank_;  // "a\x01b" -> rank
    mutable std::unordered_map<std::string, std::vector<int>> word_cache_;
};

}  // namespace res
