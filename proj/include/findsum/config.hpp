#pragma once

// Run configuration: one JSON file, validated strictly (unknown keys are
// rejected), with FINDSUM_WORKDIR and command-line flags layered on top
// (flag > env > file > default). Every artifact records the digest of the
// effective config that produced it; downstream stages refuse to mix digests
// unless forced.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "findsum/errors.hpp"
#include "findsum/summarize.hpp"

namespace findsum {

struct RunConfig {
    std::string input_dir = ".";
    std::string work_dir = ".";
    int jobs = 1;

    // ingest
    int max_segment_words = 1000;
    double rounding_divisor = 1000.0;

    // corpus
    size_t min_input_words = 1000;
    size_t max_input_words = 60000;
    uint64_t split_seed = 13;
    std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};

    // selection
    size_t n_prime = 10;
    size_t ngram_order = 1;
    int k_roo = 2;
    int k_liquidity = 3;

    // tuple classifier
    std::string tuples_target = "roo";
    size_t undersample_ratio = 10;
    uint64_t tuples_seed = 7;
    double learning_rate = 0.5;
    int epochs = 300;
    double l2 = 1e-4;
    std::vector<size_t> top_n = {100, 200};
    bool use_positional = true;
    bool use_embedding = false;
    std::string vector_file;
    bool use_onehot = false;
    size_t onehot_k = 50;
    std::string classifier_kind = "logistic-regression";
    std::string classifier_command;

    // summarize
    std::string summarize_target = "roo";
    std::string mode = "TEXT_ONLY";
    int k_segments = 0;             // 0 = per-target default (2 ROO / 3 Liquidity)
    std::array<int, 2> gc_ratio = {1, 1};
    int input_word_budget = 1200;
    int output_word_budget = 0;     // 0 = per-target default (350 ROO / 360 Liquidity)
    int beam_size = 5;
    std::string special_symbol = "<tuples>";
    std::string generator_command;
    double generator_timeout_sec = 30.0;
    int max_concurrent = 4;
    std::string extractive_method = "textrank";
    size_t tuple_top_n = 100;
    int tuple_batch = 8;

    // evaluate
    std::string evaluate_target = "roo";
    bool eval_bleu = true;
    bool eval_fragments = true;

    int segments_for(const std::string& target) const {
        if (k_segments > 0) return k_segments;
        return target == "liquidity" ? k_liquidity : k_roo;
    }
    int output_budget_for(const std::string& target) const {
        if (output_word_budget > 0) return output_word_budget;
        return target == "liquidity" ? 360 : 350;
    }
    PipelineConfig pipeline_config(const std::string& target) const {
        PipelineConfig pc;
        pc.mode = pipeline_mode_from(mode);
        pc.k_segments = segments_for(target);
        pc.gc_ratio = {gc_ratio[0], gc_ratio[1]};
        pc.input_word_budget = input_word_budget;
        pc.output_word_budget = output_budget_for(target);
        pc.beam_size = beam_size;
        pc.special_symbol = special_symbol;
        pc.tuple_batch = tuple_batch;
        pc.extractive_method = extractive_method;
        return pc;
    }
};

namespace configdetail {

inline void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known,
                           const std::string& scope) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError("unknown config key: " + scope + it.key());
    }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
        }
    }
}

}  // namespace configdetail

inline RunConfig config_from_json(const nlohmann::json& j) {
    using configdetail::maybe;
    using configdetail::reject_unknown;
    RunConfig c;
    reject_unknown(j, {"input_dir", "work_dir", "jobs", "ingest", "corpus", "select", "tuples",
                       "summarize", "evaluate"},
                   "");
    maybe(j, "input_dir", c.input_dir);
    maybe(j, "work_dir", c.work_dir);
    maybe(j, "jobs", c.jobs);
    if (j.contains("ingest")) {
        const auto& s = j.at("ingest");
        reject_unknown(s, {"max_segment_words", "rounding_divisor"}, "ingest.");
        maybe(s, "max_segment_words", c.max_segment_words);
        maybe(s, "rounding_divisor", c.rounding_divisor);
    }
    if (j.contains("corpus")) {
        const auto& s = j.at("corpus");
        reject_unknown(s, {"min_input_words", "max_input_words", "split_seed", "split_ratios"},
                       "corpus.");
        maybe(s, "min_input_words", c.min_input_words);
        maybe(s, "max_input_words", c.max_input_words);
        maybe(s, "split_seed", c.split_seed);
        maybe(s, "split_ratios", c.split_ratios);
    }
    if (j.contains("select")) {
        const auto& s = j.at("select");
        reject_unknown(s, {"n_prime", "ngram_order", "k_roo", "k_liquidity"}, "select.");
        maybe(s, "n_prime", c.n_prime);
        maybe(s, "ngram_order", c.ngram_order);
        maybe(s, "k_roo", c.k_roo);
        maybe(s, "k_liquidity", c.k_liquidity);
    }
    if (j.contains("tuples")) {
        const auto& s = j.at("tuples");
        reject_unknown(s,
                       {"target", "ratio", "seed", "learning_rate", "epochs", "l2", "top_n",
                        "use_positional", "use_embedding", "vector_file", "use_onehot",
                        "onehot_k", "classifier_kind", "classifier_command"},
                       "tuples.");
        maybe(s, "target", c.tuples_target);
        maybe(s, "ratio", c.undersample_ratio);
        maybe(s, "seed", c.tuples_seed);
        maybe(s, "learning_rate", c.learning_rate);
        maybe(s, "epochs", c.epochs);
        maybe(s, "l2", c.l2);
        maybe(s, "top_n", c.top_n);
        maybe(s, "use_positional", c.use_positional);
        maybe(s, "use_embedding", c.use_embedding);
        maybe(s, "vector_file", c.vector_file);
        maybe(s, "use_onehot", c.use_onehot);
        maybe(s, "onehot_k", c.onehot_k);
        maybe(s, "classifier_kind", c.classifier_kind);
        maybe(s, "classifier_command", c.classifier_command);
    }
    if (j.contains("summarize")) {
        const auto& s = j.at("summarize");
        reject_unknown(s,
                       {"target", "mode", "k_segments", "gc_ratio", "input_word_budget",
                        "output_word_budget", "beam_size", "special_symbol", "generator_command",
                        "timeout_sec", "max_concurrent", "extractive_method", "tuple_top_n",
                        "tuple_batch"},
                       "summarize.");
        maybe(s, "target", c.summarize_target);
        maybe(s, "mode", c.mode);
        maybe(s, "k_segments", c.k_segments);
        maybe(s, "gc_ratio", c.gc_ratio);
        maybe(s, "input_word_budget", c.input_word_budget);
        maybe(s, "output_word_budget", c.output_word_budget);
        maybe(s, "beam_size", c.beam_size);
        maybe(s, "special_symbol", c.special_symbol);
        maybe(s, "generator_command", c.generator_command);
        maybe(s, "timeout_sec", c.generator_timeout_sec);
        maybe(s, "max_concurrent", c.max_concurrent);
        maybe(s, "extractive_method", c.extractive_method);
        maybe(s, "tuple_top_n", c.tuple_top_n);
        maybe(s, "tuple_batch", c.tuple_batch);
    }
    if (j.contains("evaluate")) {
        const auto& s = j.at("evaluate");
        reject_unknown(s, {"target", "bleu", "fragments"}, "evaluate.");
        maybe(s, "target", c.evaluate_target);
        maybe(s, "bleu", c.eval_bleu);
        maybe(s, "fragments", c.eval_fragments);
    }
    return c;
}

inline void validate_config(const RunConfig& c) {
    auto check_target = [](const std::string& t, const char* what) {
        if (t != "roo" && t != "liquidity")
            throw ConfigError(std::string(what) + " must be roo or liquidity, got " + t);
    };
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    if (c.max_segment_words < 1) throw ConfigError("ingest.max_segment_words must be >= 1");
    if (c.rounding_divisor <= 0) throw ConfigError("ingest.rounding_divisor must be positive");
    if (c.min_input_words >= c.max_input_words)
        throw ConfigError("corpus.min_input_words must be < max_input_words");
    double rs = c.split_ratios[0] + c.split_ratios[1] + c.split_ratios[2];
    if (std::abs(rs - 1.0) > 1e-9) throw ConfigError("corpus.split_ratios must sum to 1");
    if (c.ngram_order < 1) throw ConfigError("select.ngram_order must be >= 1");
    if (c.k_roo < 1 || c.k_liquidity < 1) throw ConfigError("select.k_* must be >= 1");
    check_target(c.tuples_target, "tuples.target");
    check_target(c.summarize_target, "summarize.target");
    check_target(c.evaluate_target, "evaluate.target");
    if (c.undersample_ratio < 1) throw ConfigError("tuples.ratio must be >= 1");
    if (c.classifier_kind != "logistic-regression" && c.classifier_kind != "external")
        throw ConfigError("tuples.classifier_kind must be logistic-regression or external");
    if (c.classifier_kind == "external" && c.classifier_command.empty())
        throw ConfigError("tuples.classifier_command required for external kind");
    if (c.use_embedding && c.vector_file.empty())
        throw ConfigError("tuples.vector_file required when use_embedding is set");
    pipeline_mode_from(c.mode);  // validates
    if (c.gc_ratio[0] <= 0 || c.gc_ratio[1] <= 0)
        throw ConfigError("summarize.gc_ratio must be positive");
    if (c.input_word_budget < 1) throw ConfigError("summarize.input_word_budget must be >= 1");
    if (c.beam_size < 1) throw ConfigError("summarize.beam_size must be >= 1");
    if (c.extractive_method != "textrank" && c.extractive_method != "lexrank")
        throw ConfigError("summarize.extractive_method must be textrank or lexrank");
}

// Effective config as canonical JSON (sorted keys) and its digest.
inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;  // plain json sorts keys: canonical for hashing
    j["input_dir"] = c.input_dir;
    j["work_dir"] = c.work_dir;
    j["jobs"] = c.jobs;
    j["ingest"] = {{"max_segment_words", c.max_segment_words},
                   {"rounding_divisor", c.rounding_divisor}};
    j["corpus"] = {{"min_input_words", c.min_input_words},
                   {"max_input_words", c.max_input_words},
                   {"split_seed", c.split_seed},
                   {"split_ratios", c.split_ratios}};
    j["select"] = {{"n_prime", c.n_prime},
                   {"ngram_order", c.ngram_order},
                   {"k_roo", c.k_roo},
                   {"k_liquidity", c.k_liquidity}};
    j["tuples"] = {{"target", c.tuples_target},
                   {"ratio", c.undersample_ratio},
                   {"seed", c.tuples_seed},
                   {"learning_rate", c.learning_rate},
                   {"epochs", c.epochs},
                   {"l2", c.l2},
                   {"top_n", c.top_n},
                   {"use_positional", c.use_positional},
                   {"use_embedding", c.use_embedding},
                   {"vector_file", c.vector_file},
                   {"use_onehot", c.use_onehot},
                   {"onehot_k", c.onehot_k},
                   {"classifier_kind", c.classifier_kind},
                   {"classifier_command", c.classifier_command}};
    j["summarize"] = {{"target", c.summarize_target},
                      {"mode", c.mode},
                      {"k_segments", c.k_segments},
                      {"gc_ratio", c.gc_ratio},
                      {"input_word_budget", c.input_word_budget},
                      {"output_word_budget", c.output_word_budget},
                      {"beam_size", c.beam_size},
                      {"special_symbol", c.special_symbol},
                      {"generator_command", c.generator_command},
                      {"timeout_sec", c.generator_timeout_sec},
                      {"max_concurrent", c.max_concurrent},
                      {"extractive_method", c.extractive_method},
                      {"tuple_top_n", c.tuple_top_n},
                      {"tuple_batch", c.tuple_batch}};
    j["evaluate"] = {{"target", c.evaluate_target},
                     {"bleu", c.eval_bleu},
                     {"fragments", c.eval_fragments}};
    return j;
}

inline std::string config_digest(const RunConfig& c) {
    std::string dump = config_to_json(c).dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace findsum
