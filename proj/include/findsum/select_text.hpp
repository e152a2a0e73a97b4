#pragma once

// Corpus-level salient text selection. MMRG greedily picks the part id whose
// addition yields the largest mean n-gram recall gain against the target
// summaries, applying the same ids to every example. TextRank and LexRank are
// the unsupervised per-example baselines it is compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "findsum/errors.hpp"
#include "findsum/text.hpp"

namespace findsum {

struct MmrgExample {
    std::vector<std::string> parts;  // position = part id
    std::string target;
};

struct SegmentSelection {
    std::vector<std::vector<int>> per_summary_segment;  // slot -> ids in pick order
    int budget_words = 0;  // 0 when the budget was expressed in parts
    int ngram_order = 1;
};

struct RecallProfile {
    std::map<int, double> recall_by_n;
    double recall_avg = 0.0;
};

// Clipped n-gram recall of candidate against target; 0 when the target has no
// n-grams of that order.
inline double ngram_recall(std::string_view candidate, std::string_view target, size_t n) {
    TokenInterner interner;
    auto cand = interner.intern(tokenize_lower(candidate));
    auto tgt = interner.intern(tokenize_lower(target));
    auto tgt_counts = count_ngrams(tgt, n);
    int64_t total = total_count(tgt_counts);
    if (total == 0) return 0.0;
    auto cand_counts = count_ngrams(cand, n);
    return static_cast<double>(clipped_overlap(cand_counts, tgt_counts)) / total;
}

namespace selectdetail {

// Tokenized corpus view reused across the greedy loop.
struct Workspace {
    struct Entry {
        std::vector<std::vector<int32_t>> part_ids;   // tokens per part
        std::vector<int32_t> target_ids;
        std::vector<NgramCounts> target_counts;       // one per gain order
        std::vector<int64_t> target_totals;
        std::vector<int32_t> selected;                // concatenated selected tokens
    };
    std::vector<Entry> entries;
    std::vector<size_t> orders;

    Workspace(const std::vector<MmrgExample>& examples, std::vector<size_t> gain_orders)
        : orders(std::move(gain_orders)) {
        entries.resize(examples.size());
        for (size_t i = 0; i < examples.size(); ++i) {
            TokenInterner interner;
            auto& e = entries[i];
            e.part_ids.reserve(examples[i].parts.size());
            for (const auto& p : examples[i].parts)
                e.part_ids.push_back(interner.intern(tokenize_lower(p)));
            e.target_ids = interner.intern(tokenize_lower(examples[i].target));
            for (size_t n : orders) {
                e.target_counts.push_back(count_ngrams(e.target_ids, n));
                e.target_totals.push_back(total_count(e.target_counts.back()));
            }
        }
    }

    size_t part_count() const {
        size_t n = 0;
        for (const auto& e : entries) n = std::max(n, e.part_ids.size());
        return n;
    }

    double recall_of(const std::vector<int32_t>& tokens, const Entry& e) const {
        double sum = 0.0;
        for (size_t k = 0; k < orders.size(); ++k) {
            if (e.target_totals[k] == 0) continue;  // contributes 0
            auto counts = count_ngrams(tokens, orders[k]);
            sum += static_cast<double>(clipped_overlap(counts, e.target_counts[k])) /
                   static_cast<double>(e.target_totals[k]);
        }
        return sum / static_cast<double>(orders.size());
    }

    // Mean over examples of Recall(selected + part_j) - Recall(selected).
    double gain(int j) const {
        double total = 0.0;
        for (const auto& e : entries) {
            if (static_cast<size_t>(j) >= e.part_ids.size()) continue;  // missing part: 0
            std::vector<int32_t> cand = e.selected;
            cand.insert(cand.end(), e.part_ids[j].begin(), e.part_ids[j].end());
            total += recall_of(cand, e) - recall_of(e.selected, e);
        }
        return entries.empty() ? 0.0 : total / static_cast<double>(entries.size());
    }

    void commit(int j) {
        for (auto& e : entries) {
            if (static_cast<size_t>(j) >= e.part_ids.size()) continue;
            e.selected.insert(e.selected.end(), e.part_ids[j].begin(), e.part_ids[j].end());
        }
    }

    double mean_recall() const {
        double total = 0.0;
        for (const auto& e : entries) total += recall_of(e.selected, e);
        return entries.empty() ? 0.0 : total / static_cast<double>(entries.size());
    }

    double mean_selected_words() const {
        double total = 0.0;
        for (const auto& e : entries) total += static_cast<double>(e.selected.size());
        return entries.empty() ? 0.0 : total / static_cast<double>(entries.size());
    }

    // Largest positive mean gain; ties resolved to the smallest id.
    std::optional<int> best_part(const std::set<int>& selected_ids) const {
        double best_gain = 0.0;
        int best = -1;
        const int n = static_cast<int>(part_count());
        for (int j = 0; j < n; ++j) {
            if (selected_ids.count(j)) continue;
            double g = gain(j);
            if (g > best_gain) {
                best_gain = g;
                best = j;
            }
        }
        if (best < 0) return std::nullopt;
        return best;
    }
};

}  // namespace selectdetail

// Mean recall gain the j-th part would bring, given already-selected ids.
// Examples missing part j contribute zero.
inline double recall_gain(const std::vector<MmrgExample>& examples,
                          const std::vector<int>& selected_ids, int j, size_t n) {
    selectdetail::Workspace ws(examples, {n});
    for (int id : selected_ids) ws.commit(id);
    return ws.gain(j);
}

// Argmax of recall_gain over unselected ids; absent when no gain is positive.
inline std::optional<int> select_part(const std::vector<MmrgExample>& examples,
                                      const std::vector<int>& selected_ids, size_t n) {
    selectdetail::Workspace ws(examples, {n});
    std::set<int> sel(selected_ids.begin(), selected_ids.end());
    for (int id : selected_ids) ws.commit(id);
    return ws.best_part(sel);
}

struct MmrgResult {
    std::vector<int> ids;                    // selection order
    std::vector<std::string> selected_text;  // per example, parts joined in pick order
};

namespace selectdetail {

inline MmrgResult run_mmrg(const std::vector<MmrgExample>& examples, size_t n_prime,
                           const std::vector<size_t>& orders, int word_budget = 0) {
    Workspace ws(examples, orders);
    MmrgResult result;
    std::set<int> chosen;
    while (word_budget > 0 || result.ids.size() < n_prime) {
        auto pick = ws.best_part(chosen);
        if (!pick) break;
        ws.commit(*pick);
        chosen.insert(*pick);
        result.ids.push_back(*pick);
        if (word_budget > 0 && ws.mean_selected_words() > word_budget) break;
    }
    result.selected_text.reserve(examples.size());
    for (const auto& e : examples) {
        std::string text;
        for (int id : result.ids) {
            if (static_cast<size_t>(id) >= e.parts.size()) continue;
            if (!text.empty()) text.push_back(' ');
            text += e.parts[id];
        }
        result.selected_text.push_back(std::move(text));
    }
    return result;
}

}  // namespace selectdetail

// Algorithm: greedily add the best part until n_prime parts are selected or no
// part brings positive gain. The chosen ids apply uniformly to every example.
inline MmrgResult mmrg(const std::vector<MmrgExample>& examples, size_t n_prime, size_t n = 1) {
    return selectdetail::run_mmrg(examples, n_prime, {n});
}

inline MmrgResult mmrg_averaged(const std::vector<MmrgExample>& examples, size_t n_prime,
                                const std::vector<size_t>& orders) {
    return selectdetail::run_mmrg(examples, n_prime, orders);
}

// Word-budget wrapper: keeps selecting until the mean selected word count
// exceeds the limit (the crossing part is kept).
inline MmrgResult mmrg_word_budget(const std::vector<MmrgExample>& examples, int budget_words,
                                   size_t n = 1) {
    return selectdetail::run_mmrg(examples, examples.empty() ? 0 : SIZE_MAX, {n}, budget_words);
}

// One MMRG run per summary-segment slot against that slot's targets. No two
// slots may select an identical id set; a duplicate's final pick is swapped
// for the next-best positive-gain id.
inline SegmentSelection mmrg_multi_segment(const std::vector<std::vector<std::string>>& parts,
                                           const std::vector<std::vector<std::string>>& targets_per_slot,
                                           size_t n_prime, size_t n = 1) {
    SegmentSelection selection;
    selection.ngram_order = static_cast<int>(n);
    std::vector<std::set<int>> chosen_sets;
    for (size_t slot = 0; slot < targets_per_slot.size(); ++slot) {
        const auto& targets = targets_per_slot[slot];
        if (targets.size() != parts.size())
            throw ConstraintUnsatisfiable("slot " + std::to_string(slot) +
                                          ": target list length mismatch");
        std::vector<MmrgExample> slot_examples(parts.size());
        for (size_t i = 0; i < parts.size(); ++i)
            slot_examples[i] = MmrgExample{parts[i], targets[i]};
        auto result = mmrg(slot_examples, n_prime, n);
        std::vector<int> ids = result.ids;
        std::set<int> id_set(ids.begin(), ids.end());
        bool duplicate = false;
        for (const auto& prev : chosen_sets)
            if (prev == id_set) { duplicate = true; break; }
        if (duplicate) {
            // Re-rank candidates at the state before the final pick and take
            // the next-best positive-gain id that makes the set distinct.
            selectdetail::Workspace ws(slot_examples, {n});
            std::vector<int> base(ids.begin(), ids.size() ? ids.end() - 1 : ids.end());
            std::set<int> base_set(base.begin(), base.end());
            for (int id : base) ws.commit(id);
            std::vector<std::pair<double, int>> ranked;  // (-gain, id) for stable order
            const int total_parts = static_cast<int>(ws.part_count());
            for (int j = 0; j < total_parts; ++j) {
                if (base_set.count(j)) continue;
                double g = ws.gain(j);
                if (g > 0.0) ranked.emplace_back(-g, j);
            }
            std::sort(ranked.begin(), ranked.end());
            bool fixed = false;
            for (const auto& [neg_gain, j] : ranked) {
                std::set<int> candidate_set = base_set;
                candidate_set.insert(j);
                bool clash = false;
                for (const auto& prev : chosen_sets)
                    if (prev == candidate_set) { clash = true; break; }
                if (!clash) {
                    ids = base;
                    ids.push_back(j);
                    id_set = candidate_set;
                    fixed = true;
                    break;
                }
            }
            if (!fixed)
                throw ConstraintUnsatisfiable(
                    "slot " + std::to_string(slot) +
                    ": no distinct id set with positive gain available");
        }
        chosen_sets.push_back(id_set);
        selection.per_summary_segment.push_back(std::move(ids));
    }
    return selection;
}

// --- extractive baselines -----------------------------------------------------

struct ExtractiveSelection {
    std::vector<int> sentence_indices;  // source order
    std::string text;
};

namespace selectdetail {

inline ExtractiveSelection pack_ranked(const std::vector<std::string>& sentences,
                                       const std::vector<double>& scores, int budget_words) {
    std::vector<int> order(sentences.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> taken;
    int used = 0;
    for (int idx : order) {
        int len = static_cast<int>(word_count(sentences[idx]));
        if (len == 0) continue;
        if (used + len > budget_words) continue;
        taken.push_back(idx);
        used += len;
    }
    std::sort(taken.begin(), taken.end());
    ExtractiveSelection sel;
    sel.sentence_indices = taken;
    for (int idx : taken) {
        if (!sel.text.empty()) sel.text.push_back(' ');
        sel.text += sentences[idx];
    }
    return sel;
}

inline std::vector<double> pagerank(const std::vector<std::vector<double>>& weights,
                                    double damping = 0.85, double tol = 1e-6,
                                    int max_iter = 100) {
    const size_t n = weights.size();
    std::vector<double> out_sum(n, 0.0);
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k) out_sum[j] += weights[j][k];
    std::vector<double> score(n, 1.0), next(n, 0.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        double delta = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (weights[j][i] <= 0.0 || out_sum[j] <= 0.0) continue;
                acc += weights[j][i] / out_sum[j] * score[j];
            }
            next[i] = (1.0 - damping) + damping * acc;
            delta += std::abs(next[i] - score[i]);
        }
        score.swap(next);
        if (delta < tol) break;
    }
    return score;
}

}  // namespace selectdetail

// TextRank: word-overlap similarity normalized by log sentence lengths,
// PageRank scores, top sentences packed into the word budget in source order.
inline ExtractiveSelection textrank_extract(const std::vector<std::string>& sentences,
                                            int budget_words) {
    const size_t n = sentences.size();
    if (n == 0) return {};
    std::vector<std::set<std::string>> words(n);
    std::vector<size_t> lens(n);
    for (size_t i = 0; i < n; ++i) {
        auto toks = tokenize_lower(sentences[i]);
        lens[i] = toks.size();
        words[i] = std::set<std::string>(toks.begin(), toks.end());
    }
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (lens[i] < 2 || lens[j] < 2) continue;  // log(1) = 0 denominators
            size_t common = 0;
            const auto& small = words[i].size() <= words[j].size() ? words[i] : words[j];
            const auto& large = words[i].size() <= words[j].size() ? words[j] : words[i];
            for (const auto& t : small) common += large.count(t);
            if (common == 0) continue;
            double sim = static_cast<double>(common) /
                         (std::log(static_cast<double>(lens[i])) +
                          std::log(static_cast<double>(lens[j])));
            w[i][j] = w[j][i] = sim;
        }
    }
    auto scores = selectdetail::pagerank(w);
    return selectdetail::pack_ranked(sentences, scores, budget_words);
}

// LexRank: TF-IDF cosine similarity thresholded into a binary graph with
// degree normalization (every node keeps a self-loop), then PageRank.
inline ExtractiveSelection lexrank_extract(const std::vector<std::string>& sentences,
                                           int budget_words, double threshold = 0.1) {
    const size_t n = sentences.size();
    if (n == 0) return {};
    std::vector<std::map<std::string, double>> tf(n);
    std::map<std::string, size_t> df;
    for (size_t i = 0; i < n; ++i) {
        for (const auto& t : tokenize_lower(sentences[i])) tf[i][t] += 1.0;
        for (const auto& [t, c] : tf[i]) ++df[t];
    }
    std::vector<std::map<std::string, double>> tfidf(n);
    std::vector<double> norm(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (const auto& [t, c] : tf[i]) {
            double idf = std::log(static_cast<double>(n) / static_cast<double>(df[t]));
            if (idf <= 0.0) continue;
            double v = c * idf;
            tfidf[i][t] = v;
            norm[i] += v * v;
        }
        norm[i] = std::sqrt(norm[i]);
    }
    std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        adj[i][i] = 1.0;  // self-loop keeps isolated nodes connected
        for (size_t j = i + 1; j < n; ++j) {
            if (norm[i] <= 0.0 || norm[j] <= 0.0) continue;
            double dot = 0.0;
            const auto& small = tfidf[i].size() <= tfidf[j].size() ? tfidf[i] : tfidf[j];
            const auto& large = tfidf[i].size() <= tfidf[j].size() ? tfidf[j] : tfidf[i];
            for (const auto& [t, v] : small) {
                auto it = large.find(t);
                if (it != large.end()) dot += v * it->second;
            }
            double cos = dot / (norm[i] * norm[j]);
            if (cos >= threshold) adj[i][j] = adj[j][i] = 1.0;
        }
    }
    auto scores = selectdetail::pagerank(adj);
    return selectdetail::pack_ranked(sentences, scores, budget_words);
}

// Mean recall per order over aligned (selected, target) pairs, plus the mean
// across the configured orders {1,2,3,5}.
inline RecallProfile evaluate_selection(const std::vector<std::string>& selected,
                                        const std::vector<std::string>& targets,
                                        const std::vector<size_t>& orders = {1, 2, 3, 5}) {
    if (selected.size() != targets.size())
        throw Error("evaluate_selection: length mismatch " + std::to_string(selected.size()) +
                    " vs " + std::to_string(targets.size()));
    RecallProfile profile;
    if (selected.empty() || orders.empty()) return profile;
    double order_sum = 0.0;
    for (size_t n : orders) {
        double sum = 0.0;
        for (size_t i = 0; i < selected.size(); ++i) sum += ngram_recall(selected[i], targets[i], n);
        double mean = sum / static_cast<double>(selected.size());
        profile.recall_by_n[static_cast<int>(n)] = mean;
        order_sum += mean;
    }
    profile.recall_avg = order_sum / static_cast<double>(orders.size());
    return profile;
}

}  // namespace findsum
