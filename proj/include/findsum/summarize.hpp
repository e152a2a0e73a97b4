#pragma once

// Pipeline assembly around external generators. Three text+table modes plus a
// text-only baseline:
//   GC  - summarize text and tuples separately, concatenate under a ratio
//   CG  - concatenate text and serialized tuples behind a special symbol,
//         summarize once
//   GCG - render tuples to text via a tuple2text generator, append to the
//         input text, summarize
// Summary segments are planned per slot, generated independently (divide and
// conquer), trigram-blocked, and combined in slot order. Without a generator
// the extractive baselines stand in.

#include <future>
#include <optional>
#include <string>
#include <vector>

#include "findsum/errors.hpp"
#include "findsum/generator.hpp"
#include "findsum/ingest.hpp"
#include "findsum/select_text.hpp"
#include "findsum/text.hpp"

namespace findsum {

enum class PipelineMode { kTextOnly, kGc, kCg, kGcg };

inline std::string to_string(PipelineMode mode) {
    switch (mode) {
        case PipelineMode::kGc: return "GC";
        case PipelineMode::kCg: return "CG";
        case PipelineMode::kGcg: return "GCG";
        default: return "TEXT_ONLY";
    }
}

inline PipelineMode pipeline_mode_from(const std::string& s) {
    if (s == "GC") return PipelineMode::kGc;
    if (s == "CG") return PipelineMode::kCg;
    if (s == "GCG") return PipelineMode::kGcg;
    if (s == "TEXT_ONLY") return PipelineMode::kTextOnly;
    throw ConfigError("unknown pipeline mode: " + s);
}

struct PipelineConfig {
    PipelineMode mode = PipelineMode::kTextOnly;
    int k_segments = 2;                     // 2 for ROO, 3 for Liquidity
    std::pair<int, int> gc_ratio = {1, 1};  // text : table
    int input_word_budget = 1200;
    int output_word_budget = 350;           // per summary segment
    int beam_size = 5;                      // opaque generation hint
    std::string special_symbol = "<tuples>";
    int tuple_batch = 8;                    // tuples per tuple2text request
    std::string extractive_method = "textrank";  // fallback: textrank | lexrank

    void validate() const {
        if (k_segments < 1) throw ConfigError("k_segments must be >= 1");
        if (input_word_budget < 1 || output_word_budget < 1)
            throw ConfigError("word budgets must be >= 1");
        if (mode == PipelineMode::kGc && (gc_ratio.first <= 0 || gc_ratio.second <= 0))
            throw ConfigError("gc_ratio must be a positive pair");
        if (extractive_method != "textrank" && extractive_method != "lexrank")
            throw ConfigError("extractive_method must be textrank or lexrank");
    }
};

struct SummarySegmentPlan {
    int slot = 0;
    std::vector<int> segment_ids;
    std::vector<TableTuple> tuples;
    std::string selected_text;
    std::string assembled_input;  // final generator input, <= input_word_budget
};

struct Summary {
    std::vector<std::string> segments;
    std::string combined;
};

// --- assembly helpers -----------------------------------------------------------

// Prefix of whole sentences whose total word count fits the budget.
inline std::string truncate_sentences(std::string_view text, int max_words) {
    std::string out;
    int used = 0;
    for (const auto& s : split_sentences(text)) {
        int words = static_cast<int>(word_count(s));
        if (used + words > max_words) break;
        if (!out.empty()) out.push_back(' ');
        out += s;
        used += words;
    }
    return out;
}

// First four tuple fields, " | " between fields, " , " between tuples.
inline std::string serialize_tuples(const std::vector<TableTuple>& tuples) {
    std::string out;
    for (const auto& t : tuples) {
        if (!out.empty()) out += " , ";
        out += t.row_name + " | " + t.col_name + " | " + t.cell_value + " | " + t.date;
    }
    return out;
}

struct CgTuple {
    std::string row_name, col_name, cell_value, date;
};

// Inverse of serialize_tuples over the tuple block of a CG input.
inline std::vector<CgTuple> parse_cg_tuples(std::string_view block) {
    std::vector<CgTuple> out;
    if (trim(block).empty()) return out;
    size_t start = 0;
    std::string s(block);
    while (start <= s.size()) {
        size_t end = s.find(" , ", start);
        std::string one = end == std::string::npos ? s.substr(start) : s.substr(start, end - start);
        std::vector<std::string> fields;
        size_t fs = 0;
        while (fields.size() < 3) {
            size_t fe = one.find(" | ", fs);
            if (fe == std::string::npos) break;
            fields.push_back(one.substr(fs, fe - fs));
            fs = fe + 3;
        }
        fields.push_back(one.substr(fs));
        while (fields.size() < 4) fields.emplace_back();
        out.push_back(CgTuple{trim(fields[0]), trim(fields[1]), trim(fields[2]), trim(fields[3])});
        if (end == std::string::npos) break;
        start = end + 3;
    }
    return out;
}

// CG input: selected text, the special symbol, then tuples; whole tuples are
// dropped from the tail until the word budget holds.
inline std::string assemble_cg_input(const std::vector<std::string>& segments,
                                     const std::vector<TableTuple>& tuples,
                                     const std::string& special_symbol, int budget) {
    if (budget < 1) throw ConfigError("assemble_cg_input: budget must be >= 1");
    std::string text;
    for (const auto& s : segments) {
        if (!text.empty()) text.push_back(' ');
        text += s;
    }
    int symbol_words = static_cast<int>(word_count(special_symbol));
    int text_words = static_cast<int>(word_count(text));
    if (text_words + symbol_words > budget) {
        text = truncate_sentences(text, budget - symbol_words);
        text_words = static_cast<int>(word_count(text));
    }
    std::string out = text.empty() ? special_symbol : text + " " + special_symbol;
    int used = text_words + symbol_words;
    bool first = true;
    for (const auto& t : tuples) {
        std::string piece = t.row_name + " | " + t.col_name + " | " + t.cell_value + " | " + t.date;
        int cost = static_cast<int>(word_count(piece)) + (first ? 0 : 1);  // "," is a token
        if (used + cost > budget) break;
        out += first ? " " : " , ";
        out += piece;
        used += cost;
        first = false;
    }
    return out;
}

// GC combination: text summary first, then table summary, each truncated at
// sentence boundaries to its ratio share of the total budget.
inline std::string run_gc(const std::string& text_summary, const std::string& table_summary,
                          std::pair<int, int> ratio, int total_budget) {
    if (ratio.first <= 0 || ratio.second <= 0) throw ConfigError("gc ratio must be positive");
    int text_share = total_budget * ratio.first / (ratio.first + ratio.second);
    int table_share = total_budget - text_share;
    std::string text_part = truncate_sentences(text_summary, text_share);
    std::string table_part = truncate_sentences(table_summary, table_share);
    if (text_part.empty()) return table_part;
    if (table_part.empty()) return text_part;
    return text_part + " " + table_part;
}

// GCG augmentation: tuple descriptions from the tuple2text generator are
// appended to the input text, truncated at sentence boundaries.
inline std::string run_gcg(const std::vector<TableTuple>& tuples, GeneratorClient& generator,
                           const std::string& text, int budget, int tuple_batch = 8,
                           const GenerationHints& hints = {}) {
    std::string descriptions;
    for (size_t start = 0; start < tuples.size(); start += static_cast<size_t>(tuple_batch)) {
        size_t end = std::min(tuples.size(), start + static_cast<size_t>(tuple_batch));
        std::vector<TableTuple> batch(tuples.begin() + start, tuples.begin() + end);
        std::string out = generator.request("tuple2text", serialize_tuples(batch), hints);
        if (out.empty()) continue;
        if (!descriptions.empty()) descriptions.push_back(' ');
        descriptions += out;
    }
    std::string combined = text;
    if (!descriptions.empty()) {
        if (!combined.empty()) combined.push_back(' ');
        combined += descriptions;
    }
    return truncate_sentences(combined, budget);
}

// Scanning sentence by sentence, drop any sentence repeating a trigram already
// emitted by a kept sentence.
inline std::string trigram_block(std::string_view text) {
    NgramCounts seen;
    TokenInterner interner;
    std::string out;
    for (const auto& sentence : split_sentences(text)) {
        auto ids = interner.intern(tokenize_lower(sentence));
        auto tris = count_ngrams(ids, 3);
        bool repeat = false;
        for (const auto& [key, cnt] : tris)
            if (seen.count(key)) { repeat = true; break; }
        if (repeat) continue;
        for (const auto& [key, cnt] : tris) seen[key] += cnt;
        if (!out.empty()) out.push_back(' ');
        out += sentence;
    }
    return out;
}

// Text-only extractive path over the concatenated selected input.
inline std::string extractive_summarize(const std::vector<std::string>& segments, int budget,
                                        const std::string& method = "textrank") {
    std::string joined;
    for (const auto& s : segments) {
        if (!joined.empty()) joined.push_back('\n');
        joined += s;
    }
    auto sentences = split_sentences(joined);
    ExtractiveSelection sel = method == "lexrank" ? lexrank_extract(sentences, budget)
                                                  : textrank_extract(sentences, budget);
    return sel.text;
}

// Deterministic tuple rendering used when no tuple2text generator is
// configured: one sentence per tuple over the first four fields.
inline std::string render_tuples_text(const std::vector<TableTuple>& tuples) {
    std::string out;
    for (const auto& t : tuples) {
        std::string sentence = t.row_name;
        if (!t.col_name.empty()) sentence += (sentence.empty() ? "" : " ") + t.col_name;
        sentence += (sentence.empty() ? "" : " ");
        sentence += t.cell_value;
        if (!t.date.empty()) sentence += " " + t.date;
        sentence += ".";
        if (!out.empty()) out.push_back(' ');
        out += sentence;
    }
    return out;
}

struct GenerationOutcome {
    Summary summary;
    std::vector<std::string> slot_errors;  // empty string = slot succeeded
    bool failed = false;
};

namespace summarizedetail {

inline std::string generate_one_slot(SummarySegmentPlan& plan, GeneratorClient* generator,
                                     const PipelineConfig& config) {
    GenerationHints hints;
    hints.beam_size = config.beam_size;
    hints.max_len = config.output_word_budget;
    std::vector<std::string> text_segments{plan.selected_text};

    switch (config.mode) {
        case PipelineMode::kTextOnly: {
            plan.assembled_input = truncate_sentences(plan.selected_text, config.input_word_budget);
            if (generator) return generator->request("summarize", plan.assembled_input, hints);
            return extractive_summarize(text_segments, config.output_word_budget,
                                        config.extractive_method);
        }
        case PipelineMode::kCg: {
            plan.assembled_input = assemble_cg_input(text_segments, plan.tuples,
                                                     config.special_symbol,
                                                     config.input_word_budget);
            if (generator) return generator->request("summarize", plan.assembled_input, hints);
            return extractive_summarize({plan.assembled_input}, config.output_word_budget,
                                        config.extractive_method);
        }
        case PipelineMode::kGcg: {
            if (generator) {
                plan.assembled_input =
                    run_gcg(plan.tuples, *generator, plan.selected_text,
                            config.input_word_budget, config.tuple_batch, hints);
                return generator->request("summarize", plan.assembled_input, hints);
            }
            std::string augmented = plan.selected_text;
            std::string rendered = render_tuples_text(plan.tuples);
            if (!rendered.empty()) {
                if (!augmented.empty()) augmented.push_back(' ');
                augmented += rendered;
            }
            plan.assembled_input = truncate_sentences(augmented, config.input_word_budget);
            return extractive_summarize({plan.assembled_input}, config.output_word_budget,
                                        config.extractive_method);
        }
        case PipelineMode::kGc: {
            plan.assembled_input = truncate_sentences(plan.selected_text, config.input_word_budget);
            std::string text_summary, table_summary;
            if (generator) {
                text_summary = generator->request("summarize", plan.assembled_input, hints);
                table_summary =
                    generator->request("summarize", serialize_tuples(plan.tuples), hints);
            } else {
                text_summary = extractive_summarize(text_segments, config.output_word_budget,
                                                    config.extractive_method);
                table_summary = render_tuples_text(plan.tuples);
            }
            return run_gc(text_summary, table_summary, config.gc_ratio,
                          config.output_word_budget);
        }
    }
    return {};
}

}  // namespace summarizedetail

// One generation per slot, independently dispatchable; outputs are
// trigram-blocked and combined in slot order. Failed slots leave an empty
// segment and their error; the run is marked failed.
inline GenerationOutcome generate_segments(std::vector<SummarySegmentPlan>& plans,
                                           GeneratorClient* generator,
                                           const PipelineConfig& config) {
    if (plans.empty()) throw ConfigError("generate_segments: no plans");
    config.validate();
    GenerationOutcome outcome;
    outcome.summary.segments.assign(plans.size(), "");
    outcome.slot_errors.assign(plans.size(), "");

    std::vector<std::future<std::string>> futures(plans.size());
    for (size_t i = 0; i < plans.size(); ++i) {
        futures[i] = std::async(std::launch::async, [&plans, i, generator, &config] {
            return summarizedetail::generate_one_slot(plans[i], generator, config);
        });
    }
    for (size_t i = 0; i < plans.size(); ++i) {
        try {
            outcome.summary.segments[i] = trigram_block(futures[i].get());
        } catch (const GeneratorFailure& e) {
            outcome.slot_errors[i] = "slot " + std::to_string(plans[i].slot) + ": " + e.what();
            outcome.failed = true;
        }
    }
    for (const auto& seg : outcome.summary.segments) {
        if (seg.empty()) continue;
        if (!outcome.summary.combined.empty()) outcome.summary.combined.push_back(' ');
        outcome.summary.combined += seg;
    }
    return outcome;
}

// Splits a target summary into k contiguous sentence-aligned chunks of
// near-equal word count (the per-slot targets for divide-and-conquer runs).
inline std::vector<std::string> split_target_segments(const std::string& target, int k) {
    std::vector<std::string> chunks(static_cast<size_t>(std::max(1, k)));
    auto sentences = split_sentences(target);
    size_t total = 0;
    for (const auto& s : sentences) total += word_count(s);
    if (sentences.empty()) return chunks;
    double per_chunk = static_cast<double>(total) / std::max(1, k);
    size_t chunk = 0, used = 0;
    for (const auto& s : sentences) {
        size_t words = word_count(s);
        if (chunk + 1 < chunks.size() && used > 0 &&
            static_cast<double>(used + words) > per_chunk * static_cast<double>(chunk + 1)) {
            ++chunk;
        }
        if (!chunks[chunk].empty()) chunks[chunk].push_back(' ');
        chunks[chunk] += s;
        used += words;
    }
    return chunks;
}

}  // namespace findsum
