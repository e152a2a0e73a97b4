#pragma once

// Evaluation primitives: the numeric-usage metrics NP/NR/NC/NS, ROUGE-1/2/L
// F1, cumulative 4-gram BLEU, novel n-gram percentages, and extractive
// fragment coverage/density. All token-level scores use lowercase whitespace
// tokenization with no stemming.
//
// Zero denominators are encoded as absent optionals, never as 0 or NaN;
// aggregation excludes them and reports how many were excluded.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "findsum/numbers.hpp"
#include "findsum/text.hpp"

namespace findsum {

// --- numeric-usage metrics ---------------------------------------------------

struct NumMetrics {
    std::optional<double> np;  // M(H,S) / |H|
    std::optional<double> nr;  // M(H,S) / |S|
    std::optional<double> nc;  // M(H,S) / M(D,S)
    std::optional<double> ns;  // harmonic mean of NP and NC
    int64_t m_hs = 0;          // |H_n ∩ S_n|
    int64_t m_ds = 0;          // |D_n ∩ S_n|
};

inline NumMetrics num_metrics(const NumberSet& doc_numbers, const NumberSet& target_numbers,
                              const NumberSet& hyp_numbers) {
    NumMetrics m;
    m.m_hs = static_cast<int64_t>(intersection_size(hyp_numbers, target_numbers));
    m.m_ds = static_cast<int64_t>(intersection_size(doc_numbers, target_numbers));
    if (!hyp_numbers.empty()) m.np = static_cast<double>(m.m_hs) / hyp_numbers.size();
    if (!target_numbers.empty()) m.nr = static_cast<double>(m.m_hs) / target_numbers.size();
    if (m.m_ds > 0) m.nc = static_cast<double>(m.m_hs) / m.m_ds;
    if (m.np && m.nc) {
        double sum = *m.np + *m.nc;
        m.ns = sum > 0.0 ? 2.0 * (*m.np) * (*m.nc) / sum : 0.0;
    }
    return m;
}

inline std::optional<double> covered_num_pct(const NumberSet& input_text_numbers,
                                             const NumberSet& target_numbers) {
    if (target_numbers.empty()) return std::nullopt;
    return 100.0 * intersection_size(input_text_numbers, target_numbers) / target_numbers.size();
}

// --- ROUGE / BLEU ------------------------------------------------------------

inline double f1(double precision, double recall) {
    double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

inline double rouge_n(std::string_view hyp, std::string_view ref, size_t n) {
    TokenInterner interner;
    auto hyp_ids = interner.intern(tokenize_lower(hyp));
    auto ref_ids = interner.intern(tokenize_lower(ref));
    auto hyp_counts = count_ngrams(hyp_ids, n);
    auto ref_counts = count_ngrams(ref_ids, n);
    int64_t hyp_total = total_count(hyp_counts);
    int64_t ref_total = total_count(ref_counts);
    if (hyp_total == 0 || ref_total == 0) return 0.0;
    int64_t match = clipped_overlap(hyp_counts, ref_counts);
    return f1(static_cast<double>(match) / hyp_total, static_cast<double>(match) / ref_total);
}

inline size_t lcs_length(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
    if (a.empty() || b.empty()) return 0;
    // Two-row DP; rows follow the shorter sequence to bound memory.
    const auto& rows = a.size() <= b.size() ? b : a;
    const auto& cols = a.size() <= b.size() ? a : b;
    std::vector<size_t> prev(cols.size() + 1, 0), cur(cols.size() + 1, 0);
    for (size_t i = 1; i <= rows.size(); ++i) {
        for (size_t j = 1; j <= cols.size(); ++j) {
            cur[j] = rows[i - 1] == cols[j - 1] ? prev[j - 1] + 1
                                                : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[cols.size()];
}

inline double rouge_l(std::string_view hyp, std::string_view ref) {
    TokenInterner interner;
    auto hyp_ids = interner.intern(tokenize_lower(hyp));
    auto ref_ids = interner.intern(tokenize_lower(ref));
    if (hyp_ids.empty() || ref_ids.empty()) return 0.0;
    size_t lcs = lcs_length(hyp_ids, ref_ids);
    return f1(static_cast<double>(lcs) / hyp_ids.size(), static_cast<double>(lcs) / ref_ids.size());
}

// Cumulative 4-gram BLEU with brevity penalty; no smoothing, so any empty
// clipped precision zeroes the score.
inline double bleu4(std::string_view hyp, std::string_view ref) {
    TokenInterner interner;
    auto hyp_ids = interner.intern(tokenize_lower(hyp));
    auto ref_ids = interner.intern(tokenize_lower(ref));
    if (hyp_ids.empty()) return 0.0;
    double log_sum = 0.0;
    for (size_t n = 1; n <= 4; ++n) {
        auto hyp_counts = count_ngrams(hyp_ids, n);
        auto ref_counts = count_ngrams(ref_ids, n);
        int64_t total = total_count(hyp_counts);
        if (total == 0) return 0.0;
        int64_t match = clipped_overlap(hyp_counts, ref_counts);
        if (match == 0) return 0.0;
        log_sum += 0.25 * std::log(static_cast<double>(match) / total);
    }
    double bp = hyp_ids.size() >= ref_ids.size()
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_ids.size()) / hyp_ids.size());
    return bp * std::exp(log_sum);
}

// --- abstractiveness ----------------------------------------------------------

// Percentage of distinct summary n-grams absent from the input's n-gram set.
inline double novel_ngram_pct(std::string_view summary, std::string_view input, size_t n) {
    TokenInterner interner;
    auto sum_ids = interner.intern(tokenize_lower(summary));
    auto in_ids = interner.intern(tokenize_lower(input));
    auto sum_counts = count_ngrams(sum_ids, n);
    if (sum_counts.empty()) return 0.0;
    auto in_counts = count_ngrams(in_ids, n);
    size_t novel = 0;
    for (const auto& [key, cnt] : sum_counts)
        if (!in_counts.count(key)) ++novel;
    return 100.0 * novel / sum_counts.size();
}

// --- extractive fragments ------------------------------------------------------

struct FragmentStats {
    double coverage = 0.0;  // Σ|f| / |summary|
    double density = 0.0;   // Σ|f|² / |summary|
    std::vector<size_t> fragment_lengths;
};

// Greedy longest-shared-fragment decomposition of the summary against the
// input. At each summary position the longest input match wins; unmatched
// tokens are skipped.
inline FragmentStats fragment_stats(std::string_view summary, std::string_view input) {
    TokenInterner interner;
    auto s = interner.intern(tokenize_lower(summary));
    auto a = interner.intern(tokenize_lower(input));
    FragmentStats stats;
    if (s.empty()) return stats;
    // Input positions per token id, so candidate starts are looked up not scanned.
    std::vector<std::vector<size_t>> positions(interner.size());
    for (size_t j = 0; j < a.size(); ++j) positions[static_cast<size_t>(a[j])].push_back(j);
    size_t i = 0;
    double len_sum = 0.0, sq_sum = 0.0;
    while (i < s.size()) {
        size_t best = 0;
        for (size_t j : positions[static_cast<size_t>(s[i])]) {
            size_t k = 0;
            while (i + k < s.size() && j + k < a.size() && s[i + k] == a[j + k]) ++k;
            best = std::max(best, k);
        }
        if (best > 0) {
            stats.fragment_lengths.push_back(best);
            len_sum += static_cast<double>(best);
            sq_sum += static_cast<double>(best) * static_cast<double>(best);
            i += best;
        } else {
            ++i;
        }
    }
    stats.coverage = len_sum / s.size();
    stats.density = sq_sum / s.size();
    return stats;
}

}  // namespace findsum
