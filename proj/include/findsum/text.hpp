#pragma once

// Shared text primitives: tokenization, whitespace normalization, sentence
// splitting, and n-gram counting. Everything downstream (segmentation, MMRG,
// ROUGE/BLEU, fragment stats) sits on these, so they are deliberately plain:
// whitespace tokens, ASCII lowercasing, no stemming.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace findsum {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

// Collapses every whitespace run to a single space and trims the ends.
inline std::string normalize_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (is_space(c)) {
            in_space = !out.empty();
        } else {
            if (in_space) out.push_back(' ');
            out.push_back(c);
            in_space = false;
        }
    }
    return out;
}

inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) toks.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return toks;
}

inline std::vector<std::string> tokenize_lower(std::string_view s) {
    auto toks = tokenize(s);
    for (auto& t : toks) t = to_lower(t);
    return toks;
}

inline size_t word_count(std::string_view s) {
    size_t n = 0;
    bool in_tok = false;
    for (char c : s) {
        if (is_space(c)) {
            in_tok = false;
        } else if (!in_tok) {
            ++n;
            in_tok = true;
        }
    }
    return n;
}

// Sentence splitting: ./?/! followed by whitespace and a capital letter ends a
// sentence, guarded by a list of common abbreviations; a newline always ends
// one (blocks are sentence boundaries: headings rarely carry terminators).
inline const std::unordered_set<std::string>& abbreviation_guard() {
    static const std::unordered_set<std::string> kAbbrev = {
        "mr",  "mrs", "ms",  "dr",  "no",  "u.s", "u.k", "vs",  "st",
        "jr",  "sr",  "approx", "dept", "fig", "e.g", "i.e", "jan", "feb",
        "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"};
    return kAbbrev;
}

inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::string cur;
    auto flush = [&] {
        std::string s = normalize_ws(cur);
        if (!s.empty()) sentences.push_back(std::move(s));
        cur.clear();
    };
    const size_t n = text.size();
    for (size_t i = 0; i < n; ++i) {
        char c = text[i];
        if (c == '\n') {
            flush();
            continue;
        }
        cur.push_back(c);
        if (c != '.' && c != '?' && c != '!') continue;
        // Look ahead: whitespace then an uppercase letter.
        size_t j = i + 1;
        bool saw_ws = false;
        while (j < n && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) {
            saw_ws = true;
            ++j;
        }
        if (j < n && text[j] == '\n') continue;  // newline path flushes anyway
        if (!saw_ws || j >= n || !std::isupper(static_cast<unsigned char>(text[j]))) continue;
        if (c == '.') {
            // Word preceding the period, lowercased, without the period itself.
            size_t b = cur.size() - 1;
            while (b > 0 && !is_space(cur[b - 1])) --b;
            std::string prev = to_lower(std::string_view(cur).substr(b, cur.size() - 1 - b));
            if (abbreviation_guard().count(prev)) continue;
            if (prev.size() == 1 && std::isalpha(static_cast<unsigned char>(prev[0]))) continue;  // initials
        }
        flush();
    }
    flush();
    return sentences;
}

// --- n-gram counting -------------------------------------------------------
//
// N-grams are keyed by interned token ids so equality is exact (no hash
// collisions can merge distinct n-grams). One interner can be shared across
// the texts being compared; ids are assigned in first-seen order.

class TokenInterner {
public:
    int32_t id_of(const std::string& tok) {
        auto [it, inserted] = ids_.try_emplace(tok, static_cast<int32_t>(ids_.size()));
        return it->second;
    }

    std::vector<int32_t> intern(const std::vector<std::string>& toks) {
        std::vector<int32_t> out;
        out.reserve(toks.size());
        for (const auto& t : toks) out.push_back(id_of(t));
        return out;
    }

    size_t size() const { return ids_.size(); }

private:
    std::unordered_map<std::string, int32_t> ids_;
};

struct NgramKey {
    std::vector<int32_t> ids;
    bool operator==(const NgramKey& o) const { return ids == o.ids; }
};

struct NgramKeyHash {
    size_t operator()(const NgramKey& k) const {
        uint64_t h = 1469598103934665603ull;  // FNV-1a over the id bytes
        for (int32_t v : k.ids) {
            for (int b = 0; b < 4; ++b) {
                h ^= static_cast<uint8_t>(v >> (8 * b));
                h *= 1099511628211ull;
            }
        }
        return static_cast<size_t>(h);
    }
};

using NgramCounts = std::unordered_map<NgramKey, int64_t, NgramKeyHash>;

inline NgramCounts count_ngrams(const std::vector<int32_t>& ids, size_t n) {
    NgramCounts counts;
    if (n == 0 || ids.size() < n) return counts;
    for (size_t i = 0; i + n <= ids.size(); ++i) {
        NgramKey key;
        key.ids.assign(ids.begin() + i, ids.begin() + i + n);
        ++counts[std::move(key)];
    }
    return counts;
}

inline int64_t total_count(const NgramCounts& counts) {
    int64_t t = 0;
    for (const auto& [k, v] : counts) t += v;
    return t;
}

// Clipped (multiset) overlap: sum over n-grams of min(count_a, count_b).
inline int64_t clipped_overlap(const NgramCounts& a, const NgramCounts& b) {
    const NgramCounts& small = a.size() <= b.size() ? a : b;
    const NgramCounts& large = a.size() <= b.size() ? b : a;
    int64_t match = 0;
    for (const auto& [k, v] : small) {
        auto it = large.find(k);
        if (it != large.end()) match += std::min(v, it->second);
    }
    return match;
}

}  // namespace findsum
