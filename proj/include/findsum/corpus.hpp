#pragma once

// Corpus assembly: target-section extraction from MD&A, example construction,
// dedup/filter/truncate, company-held-out splitting, and dataset statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "findsum/errors.hpp"
#include "findsum/ingest.hpp"
#include "findsum/metrics.hpp"
#include "findsum/text.hpp"

namespace findsum {

struct Example {
    std::string example_id;
    std::string company_id;
    std::vector<TextSegment> input_segments;  // segment_id = part id within the example
    std::vector<TableTuple> input_tuples;
    std::string target_roo;
    std::string target_liquidity;
};

struct CorpusSplit {
    std::vector<std::string> train, val, test;
    uint64_t seed = 0;
};

struct DatasetStats {
    size_t pairs = 0;
    double avg_doc_words = 0, avg_doc_sents = 0;
    double avg_sum_words = 0, avg_sum_sents = 0, avg_sum_nums = 0;
    double pct_covered_num = 0;
    double frag_coverage = 0, frag_density = 0;
    double novel_ngram_pct[4] = {0, 0, 0, 0};  // orders 1..4
};

enum class TargetKind { kRoo, kLiquidity };

inline const std::string& target_of(const Example& e, TargetKind kind) {
    return kind == TargetKind::kRoo ? e.target_roo : e.target_liquidity;
}

inline std::string input_text_of(const Example& e) {
    std::string out;
    for (const auto& s : e.input_segments) {
        if (!out.empty()) out.push_back('\n');
        out += s.text;
    }
    return out;
}

namespace corpusdetail {

constexpr const char* kRooPhrase = "results of operations";
constexpr const char* kLiquidityPhrase = "liquidity and capital resources";

// Section boundaries inside MD&A: a short block containing any of these
// phrases reads as a sub-heading and ends the running section.
inline const std::vector<std::string>& section_stop_phrases() {
    static const std::vector<std::string> kStops = {
        kRooPhrase,          kLiquidityPhrase,          "critical accounting",
        "off-balance sheet", "contractual obligations", "quantitative and qualitative"};
    return kStops;
}

inline std::vector<std::string> split_blocks(std::string_view text) {
    std::vector<std::string> blocks;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            if (i > start) blocks.emplace_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return blocks;
}

inline bool is_section_heading(const std::string& block) {
    if (word_count(block) > 15) return false;
    std::string low = to_lower(block);
    for (const auto& phrase : section_stop_phrases())
        if (low.find(phrase) != std::string::npos) return true;
    return false;
}

struct MdaPartition {
    std::string roo, liquidity;          // placeholder-free target text
    std::string remainder;               // MD&A text outside both sections
    std::set<int> excluded_table_ids;    // tables whose placeholder sits in a target
};

inline void collect_tables(const std::string& block, std::set<int>& out) {
    size_t pos = 0;
    while ((pos = block.find("[TABLE_", pos)) != std::string::npos) {
        size_t close = block.find(']', pos);
        if (close == std::string::npos) break;
        out.insert(std::stoi(block.substr(pos + 7, close - pos - 7)));
        pos = close + 1;
    }
}

inline MdaPartition partition_mda(const ReportItem& item) {
    MdaPartition part;
    auto blocks = split_blocks(item.text);
    // 0 = remainder, 1 = roo, 2 = liquidity
    int mode = 0;
    std::vector<std::string> roo, liq, rest;
    for (size_t i = 0; i < blocks.size(); ++i) {
        const std::string& block = blocks[i];
        // Block 0 is the item heading itself ("...and Results of Operations"),
        // never a section heading.
        if (i > 0 && is_section_heading(block)) {
            std::string low = to_lower(block);
            if (low.find(kRooPhrase) != std::string::npos)
                mode = 1;
            else if (low.find(kLiquidityPhrase) != std::string::npos)
                mode = 2;
            else
                mode = 0;
            continue;  // headings belong to no section body
        }
        if (mode == 1) {
            roo.push_back(block);
            collect_tables(block, part.excluded_table_ids);
        } else if (mode == 2) {
            liq.push_back(block);
            collect_tables(block, part.excluded_table_ids);
        } else {
            rest.push_back(block);
        }
    }
    auto join = [](const std::vector<std::string>& blocks_in, bool strip_tables) {
        std::string out;
        for (const auto& b : blocks_in) {
            std::string body = strip_tables ? normalize_ws(strip_placeholders(b)) : b;
            if (body.empty()) continue;
            if (!out.empty()) out.push_back('\n');
            out += body;
        }
        return out;
    };
    part.roo = join(roo, true);
    part.liquidity = join(liq, true);
    part.remainder = join(rest, false);
    return part;
}

inline const ReportItem* find_mda_item(const ReportDocument& doc) {
    for (const auto& item : doc.items) {
        auto blocks = split_blocks(item.text);
        if (!blocks.empty() &&
            to_lower(blocks[0]).find("management's discussion") != std::string::npos)
            return &item;
    }
    for (const auto& item : doc.items)
        if (item.item_id == "item7") return &item;
    return nullptr;
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace corpusdetail

// Text under the "results of operations" / "liquidity and capital resources"
// headings of the MD&A item; either may be empty.
inline std::pair<std::string, std::string> extract_targets(const ReportDocument& doc) {
    const ReportItem* mda = corpusdetail::find_mda_item(doc);
    if (!mda) throw NoMdaItem("no MD&A item in " + doc.doc_id);
    auto part = corpusdetail::partition_mda(*mda);
    return {part.roo, part.liquidity};
}

// Builds the summarization example: inputs are every segment and tuple outside
// the two target sections. Throws NoMdaItem / EmptyTargets for drops.
inline Example build_example(const ReportDocument& doc, int max_segment_words = 1000,
                             double rounding_divisor = 1000.0) {
    const ReportItem* mda = corpusdetail::find_mda_item(doc);
    if (!mda) throw NoMdaItem("no MD&A item in " + doc.doc_id);
    auto part = corpusdetail::partition_mda(*mda);
    if (part.roo.empty() && part.liquidity.empty())
        throw EmptyTargets("both target sections empty in " + doc.doc_id);

    Example e;
    e.example_id = doc.doc_id;
    e.company_id = doc.company_id;
    e.target_roo = part.roo;
    e.target_liquidity = part.liquidity;

    for (const auto& item : doc.items) {
        if (&item == mda) {
            auto segs = segment_text(strip_placeholders(part.remainder), max_segment_words);
            for (auto& s : segs) e.input_segments.push_back(std::move(s));
        } else {
            for (const auto& s : item.segments) e.input_segments.push_back(s);
        }
    }
    for (size_t i = 0; i < e.input_segments.size(); ++i)
        e.input_segments[i].segment_id = static_cast<int>(i);

    for (auto& tup : extract_tuples(doc, rounding_divisor))
        if (!part.excluded_table_ids.count(tup.table_id)) e.input_tuples.push_back(std::move(tup));
    return e;
}

// Exact-duplicate removal (hash of whitespace-normalized input text), then
// short-input drop, then truncation of long inputs at segment boundaries.
inline std::vector<Example> dedup_and_filter(std::vector<Example> examples,
                                             size_t min_input_words, size_t max_input_words) {
    std::vector<Example> out;
    std::unordered_set<uint64_t> seen;
    for (auto& e : examples) {
        std::string normalized = normalize_ws(input_text_of(e));
        if (!seen.insert(corpusdetail::fnv1a64(normalized)).second) continue;
        size_t words = word_count(normalized);
        if (words < min_input_words) continue;
        if (words > max_input_words) {
            size_t total = 0;
            size_t keep = 0;
            for (; keep < e.input_segments.size(); ++keep) {
                size_t w = static_cast<size_t>(e.input_segments[keep].word_count);
                if (total + w > max_input_words) break;
                total += w;
            }
            e.input_segments.resize(keep);
        }
        out.push_back(std::move(e));
    }
    return out;
}

// Company-held-out split. Companies are shuffled by a fixed-algorithm
// Fisher-Yates (portable across standard libraries), then greedily assigned
// to the split furthest below its example-count quota.
inline CorpusSplit split_by_company(const std::vector<Example>& examples,
                                    std::array<double, 3> ratios = {0.8, 0.1, 0.1},
                                    uint64_t seed = 0) {
    double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(ratio_sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

    std::map<std::string, std::vector<std::string>> by_company;  // ordered for determinism
    for (const auto& e : examples) by_company[e.company_id].push_back(e.example_id);
    if (by_company.size() < 3)
        throw InsufficientCompanies("need >=3 companies, have " +
                                    std::to_string(by_company.size()));

    std::vector<std::string> companies;
    companies.reserve(by_company.size());
    for (const auto& [c, ids] : by_company) companies.push_back(c);
    std::mt19937_64 rng(seed);
    for (size_t i = companies.size(); i > 1; --i)
        std::swap(companies[i - 1], companies[rng() % i]);

    const double total = static_cast<double>(examples.size());
    double quota[3] = {ratios[0] * total, ratios[1] * total, ratios[2] * total};
    double count[3] = {0, 0, 0};
    CorpusSplit split;
    split.seed = seed;
    std::vector<std::string>* buckets[3] = {&split.train, &split.val, &split.test};
    for (const auto& company : companies) {
        int best = 0;
        double best_deficit = quota[0] - count[0];
        for (int s = 1; s < 3; ++s) {
            double deficit = quota[s] - count[s];
            if (deficit > best_deficit) {
                best = s;
                best_deficit = deficit;
            }
        }
        const auto& ids = by_company[company];
        for (const auto& id : ids) buckets[best]->push_back(id);
        count[best] += static_cast<double>(ids.size());
    }
    return split;
}

// Table-1-style statistics for one target kind; examples without that target
// are not pairs and are skipped.
inline DatasetStats corpus_stats(const std::vector<Example>& examples,
                                 TargetKind kind = TargetKind::kRoo) {
    DatasetStats stats;
    double covered_sum = 0;
    size_t covered_n = 0;
    for (const auto& e : examples) {
        const std::string& target = target_of(e, kind);
        if (target.empty()) continue;
        ++stats.pairs;
        std::string input = input_text_of(e);
        stats.avg_doc_words += static_cast<double>(word_count(input));
        stats.avg_doc_sents += static_cast<double>(split_sentences(input).size());
        stats.avg_sum_words += static_cast<double>(word_count(target));
        stats.avg_sum_sents += static_cast<double>(split_sentences(target).size());
        stats.avg_sum_nums += static_cast<double>(count_number_tokens(target));
        if (auto pct = covered_num_pct(extract_numbers(input), extract_numbers(target))) {
            covered_sum += *pct;
            ++covered_n;
        }
        auto frag = fragment_stats(target, input);
        stats.frag_coverage += frag.coverage;
        stats.frag_density += frag.density;
        for (size_t n = 1; n <= 4; ++n)
            stats.novel_ngram_pct[n - 1] += novel_ngram_pct(target, input, n);
    }
    if (stats.pairs == 0) return stats;
    double n = static_cast<double>(stats.pairs);
    stats.avg_doc_words /= n;
    stats.avg_doc_sents /= n;
    stats.avg_sum_words /= n;
    stats.avg_sum_sents /= n;
    stats.avg_sum_nums /= n;
    stats.pct_covered_num = covered_n > 0 ? covered_sum / covered_n : 0.0;
    stats.frag_coverage /= n;
    stats.frag_density /= n;
    for (auto& v : stats.novel_ngram_pct) v /= n;
    return stats;
}

}  // namespace findsum
