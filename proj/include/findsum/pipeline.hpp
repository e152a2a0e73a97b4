#pragma once

// Filesystem-level pipeline stages behind the CLI subcommands. Every stage
// writes its outputs plus a <stage>_manifest.json carrying the effective
// config digest; downstream stages refuse to consume artifacts produced under
// a different digest unless forced.
//
// Work directory layout:
//   docs/<doc_id>.jsonl, docs/<doc_id>.tuples.tsv        (ingest)
//   corpus/examples.jsonl, corpus/split.json, corpus/stats.json
//   select/selection_<target>.json, select/selected_text_<target>.jsonl
//   tuples/model_<target>.json, tuples/eval_<target>.json
//   tuples/ranked_<target>/<example_id>.jsonl
//   summaries/<target>/<example_id>.json
//   reports/metrics_<target>.json, reports/metrics_<target>.csv

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "findsum/config.hpp"
#include "findsum/corpus.hpp"
#include "findsum/generator.hpp"
#include "findsum/ingest.hpp"
#include "findsum/metrics.hpp"
#include "findsum/select_text.hpp"
#include "findsum/select_tuple.hpp"
#include "findsum/serialize.hpp"
#include "findsum/summarize.hpp"

namespace findsum {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kPartial = 1, kConfigError = 2, kIoError = 3 };

namespace pipedetail {

inline void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& w : workers) w.join();
}

inline void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

inline void write_stage_manifest(const RunConfig& config, const std::string& stage,
                                 const std::vector<std::string>& outputs) {
    json m{{"stage", stage},
           {"config_digest", config_digest(config)},
           {"outputs", outputs}};
    write_file((fs::path(config.work_dir) / (stage + "_manifest.json")).string(),
               m.dump(2) + "\n");
}

inline void check_upstream(const RunConfig& config, const std::string& stage, bool force) {
    fs::path path = fs::path(config.work_dir) / (stage + "_manifest.json");
    if (!fs::exists(path))
        throw IoError("missing " + path.string() + "; run the " + stage + " stage first");
    json m = json::parse(read_file(path.string()));
    std::string produced = m.value("config_digest", "");
    if (produced != config_digest(config) && !force)
        throw ConfigError("artifacts of stage '" + stage + "' were produced under config digest " +
                          produced + ", current is " + config_digest(config) +
                          " (use --force to override)");
}

inline std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
    std::vector<fs::path> files;
    if (!fs::exists(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == extension)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline std::map<std::string, ParsedDocumentFile> load_documents(const RunConfig& config) {
    std::map<std::string, ParsedDocumentFile> docs;
    for (const auto& path : sorted_files(fs::path(config.work_dir) / "docs", ".jsonl")) {
        std::ifstream in(path);
        auto parsed = document_from_jsonl(in);
        docs[parsed.doc.doc_id] = std::move(parsed);
    }
    if (docs.empty())
        throw IoError("no documents in " + (fs::path(config.work_dir) / "docs").string());
    return docs;
}

inline std::vector<Example> load_examples(const RunConfig& config) {
    fs::path path = fs::path(config.work_dir) / "corpus" / "examples.jsonl";
    if (!fs::exists(path)) throw IoError("missing " + path.string());
    std::ifstream in(path);
    return examples_from_jsonl(in);
}

inline CorpusSplit load_split(const RunConfig& config) {
    fs::path path = fs::path(config.work_dir) / "corpus" / "split.json";
    if (!fs::exists(path)) throw IoError("missing " + path.string());
    return split_from_json(json::parse(read_file(path.string())));
}

inline TargetKind target_kind(const std::string& target) {
    return target == "liquidity" ? TargetKind::kLiquidity : TargetKind::kRoo;
}

inline std::string format6(double v) {
    char buf[40];
    snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace pipedetail

// --- ingest ---------------------------------------------------------------------

inline int cmd_ingest(const std::vector<std::string>& inputs, const RunConfig& config,
                      std::ostream& log = std::cerr) {
    using namespace pipedetail;
    std::vector<std::string> files;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            for (const auto& p : sorted_files(input, ".html")) files.push_back(p.string());
            for (const auto& p : sorted_files(input, ".htm")) files.push_back(p.string());
        } else {
            files.push_back(input);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no input files");

    fs::path docs_dir = fs::path(config.work_dir) / "docs";
    ensure_dir(docs_dir);
    IngestConfig icfg;
    icfg.max_segment_words = config.max_segment_words;
    icfg.rounding_divisor = config.rounding_divisor;

    std::vector<std::string> outputs(files.size());
    std::vector<std::string> failures(files.size());
    parallel_for(files.size(), config.jobs, [&](size_t i) {
        const std::string& file = files[i];
        try {
            std::string doc_id = fs::path(file).stem().string();
            auto bytes = read_file(file);
            auto doc = parse_filing(bytes, doc_id, icfg);
            int warnings = 0;
            auto tuples = extract_tuples(doc, config.rounding_divisor, &warnings);
            write_file((docs_dir / (doc_id + ".jsonl")).string(), document_to_jsonl(doc, tuples));
            write_file((docs_dir / (doc_id + ".tuples.tsv")).string(), tuples_to_tsv(tuples));
            outputs[i] = doc_id;
        } catch (const Error& e) {
            failures[i] = std::string(e.what());
        }
    });

    size_t ok = 0, failed = 0;
    std::vector<std::string> written;
    for (size_t i = 0; i < files.size(); ++i) {
        if (!failures[i].empty()) {
            ++failed;
            log << "ingest: FAILED " << files[i] << ": " << failures[i] << "\n";
        } else {
            ++ok;
            written.push_back("docs/" + outputs[i] + ".jsonl");
        }
    }
    log << "ingest: " << ok << " parsed, " << failed << " failed\n";
    if (ok == 0) return kIoError;
    write_stage_manifest(config, "ingest", written);
    return failed == 0 ? kOk : kPartial;
}

// --- corpus ---------------------------------------------------------------------

inline int cmd_build_corpus(const RunConfig& config, bool force, std::ostream& log = std::cerr) {
    using namespace pipedetail;
    check_upstream(config, "ingest", force);
    auto docs = load_documents(config);

    std::vector<Example> examples;
    size_t dropped = 0;
    for (auto& [doc_id, parsed] : docs) {
        try {
            examples.push_back(
                build_example(parsed.doc, config.max_segment_words, config.rounding_divisor));
        } catch (const NoMdaItem& e) {
            ++dropped;
            log << "build-corpus: dropped " << doc_id << " (no MD&A)\n";
        } catch (const EmptyTargets& e) {
            ++dropped;
            log << "build-corpus: dropped " << doc_id << " (empty targets)\n";
        }
        if (!examples.empty() && examples.back().input_segments.empty())
            log << "build-corpus: warning: " << doc_id << " has empty inputs\n";
    }
    if (examples.empty()) throw IoError("no usable examples");

    examples = dedup_and_filter(examples, config.min_input_words, config.max_input_words);
    if (examples.empty()) throw IoError("all examples filtered out; lower corpus.min_input_words");
    auto split = split_by_company(examples, config.split_ratios, config.split_seed);

    fs::path corpus_dir = fs::path(config.work_dir) / "corpus";
    ensure_dir(corpus_dir);
    write_file((corpus_dir / "examples.jsonl").string(), examples_to_jsonl(examples));
    json split_json = to_json(split);
    split_json["config_digest"] = config_digest(config);
    write_file((corpus_dir / "split.json").string(), split_json.dump(2) + "\n");

    json stats{{"roo", to_json(corpus_stats(examples, TargetKind::kRoo))},
               {"liquidity", to_json(corpus_stats(examples, TargetKind::kLiquidity))},
               {"config_digest", config_digest(config)}};
    write_file((corpus_dir / "stats.json").string(), stats.dump(2) + "\n");

    log << "build-corpus: " << examples.size() << " examples (" << dropped << " dropped), split "
        << split.train.size() << "/" << split.val.size() << "/" << split.test.size() << "\n";
    write_stage_manifest(config, "build_corpus",
                         {"corpus/examples.jsonl", "corpus/split.json", "corpus/stats.json"});
    return kOk;
}

inline int cmd_stats(const RunConfig& config, bool force, std::ostream& out = std::cout) {
    using namespace pipedetail;
    check_upstream(config, "build_corpus", force);
    auto examples = load_examples(config);
    json stats{{"roo", to_json(corpus_stats(examples, TargetKind::kRoo))},
               {"liquidity", to_json(corpus_stats(examples, TargetKind::kLiquidity))}};
    out << stats.dump(2) << "\n";
    return kOk;
}

// --- selection --------------------------------------------------------------------

// MMRG runs on the training split's examples (ids then apply corpus-wide).
inline int cmd_select_text(const RunConfig& config, bool force, std::ostream& log = std::cerr) {
    using namespace pipedetail;
    check_upstream(config, "build_corpus", force);
    auto examples = load_examples(config);
    auto split = load_split(config);
    std::set<std::string> train_ids(split.train.begin(), split.train.end());

    fs::path select_dir = fs::path(config.work_dir) / "select";
    ensure_dir(select_dir);
    std::vector<std::string> outputs;
    for (const std::string target : {"roo", "liquidity"}) {
        TargetKind kind = target_kind(target);
        int k = config.segments_for(target);
        std::vector<std::vector<std::string>> parts;
        std::vector<std::vector<std::string>> targets_per_slot(static_cast<size_t>(k));
        for (const auto& e : examples) {
            if (!train_ids.count(e.example_id)) continue;
            const std::string& tgt = target_of(e, kind);
            if (tgt.empty()) continue;
            std::vector<std::string> p;
            for (const auto& s : e.input_segments) p.push_back(s.text);
            parts.push_back(std::move(p));
            auto chunks = split_target_segments(tgt, k);
            for (int slot = 0; slot < k; ++slot)
                targets_per_slot[static_cast<size_t>(slot)].push_back(chunks[static_cast<size_t>(slot)]);
        }
        if (parts.empty()) {
            log << "select-text: no training examples with a " << target << " target; skipped\n";
            continue;
        }
        auto selection =
            mmrg_multi_segment(parts, targets_per_slot, config.n_prime, config.ngram_order);
        json manifest{{"target", target},
                      {"slots", selection.per_summary_segment},
                      {"ngram_order", selection.ngram_order},
                      {"budget_words", selection.budget_words},
                      {"n_prime", config.n_prime},
                      {"config_digest", config_digest(config)}};
        std::string manifest_name = "selection_" + target + ".json";
        write_file((select_dir / manifest_name).string(), manifest.dump(2) + "\n");
        outputs.push_back("select/" + manifest_name);

        // Selected text for every example, slot by slot, under the chosen ids.
        std::ostringstream jsonl;
        for (const auto& e : examples) {
            json slots = json::array();
            for (const auto& ids : selection.per_summary_segment) {
                std::string text;
                for (int id : ids) {
                    if (static_cast<size_t>(id) >= e.input_segments.size()) continue;
                    if (!text.empty()) text.push_back(' ');
                    text += e.input_segments[static_cast<size_t>(id)].text;
                }
                slots.push_back(text);
            }
            jsonl << json{{"example_id", e.example_id}, {"slots", slots}}.dump() << "\n";
        }
        std::string text_name = "selected_text_" + target + ".jsonl";
        write_file((select_dir / text_name).string(), jsonl.str());
        outputs.push_back("select/" + text_name);
        log << "select-text: " << target << " slots=";
        for (const auto& ids : selection.per_summary_segment) log << ids.size() << " ";
        log << "(train examples: " << parts.size() << ")\n";
    }
    if (outputs.empty()) throw IoError("select-text produced nothing");
    write_stage_manifest(config, "select_text", outputs);
    return kOk;
}

// --- tuple selection ---------------------------------------------------------------

inline json feature_config_to_json(const TupleFeatureConfig& fc) {
    return json{{"use_positional", fc.use_positional},
                {"use_embedding", fc.use_embedding},
                {"use_onehot", fc.use_onehot},
                {"onehot_phrases", fc.onehot_phrases}};
}

inline TupleFeatureConfig feature_config_from_json(const json& j) {
    TupleFeatureConfig fc;
    fc.use_positional = j.at("use_positional").get<bool>();
    fc.use_embedding = j.at("use_embedding").get<bool>();
    fc.use_onehot = j.at("use_onehot").get<bool>();
    fc.onehot_phrases = j.at("onehot_phrases").get<std::vector<std::string>>();
    return fc;
}

inline json classifier_to_json(const TupleClassifier& model) {
    return json{{"kind", model.kind},
                {"weights", model.weights},
                {"bias", model.bias},
                {"feature_config", feature_config_to_json(model.feature_config)},
                {"seed", model.seed},
                {"command", model.command}};
}

inline TupleClassifier classifier_from_json(const json& j) {
    TupleClassifier model;
    model.kind = j.at("kind").get<std::string>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    model.feature_config = feature_config_from_json(j.at("feature_config"));
    model.seed = j.at("seed").get<uint64_t>();
    model.command = j.value("command", "");
    return model;
}

namespace pipedetail {

struct TupleSetup {
    std::vector<Example> examples;
    std::map<std::string, DocContext> contexts;  // by example/doc id
    std::optional<VectorTable> vectors;
    TupleFeatureConfig feature_config;
};

inline TupleSetup tuple_setup(const RunConfig& config) {
    TupleSetup setup;
    setup.examples = load_examples(config);
    for (auto& [doc_id, parsed] : load_documents(config))
        setup.contexts[doc_id] = DocContext::from_document(parsed.doc);
    setup.feature_config.use_positional = config.use_positional;
    setup.feature_config.use_embedding = config.use_embedding;
    setup.feature_config.use_onehot = config.use_onehot;
    if (config.use_embedding) {
        std::ifstream in(config.vector_file);
        if (!in) throw IoError("cannot open vector file: " + config.vector_file);
        setup.vectors = load_vector_table(in);
    }
    return setup;
}

inline DocContext context_for(const TupleSetup& setup, const Example& e) {
    auto it = setup.contexts.find(e.example_id);
    if (it != setup.contexts.end()) return it->second;
    return DocContext::from_tuples(e.input_tuples);
}

}  // namespace pipedetail

inline int cmd_train_tuples(const RunConfig& config, bool force, std::ostream& log = std::cerr) {
    using namespace pipedetail;
    check_upstream(config, "build_corpus", force);
    auto setup = tuple_setup(config);
    TargetKind kind = target_kind(config.tuples_target);
    auto split = load_split(config);
    std::set<std::string> train_ids(split.train.begin(), split.train.end());

    // Pool labeled tuples over the training split.
    std::vector<LabeledTuple> pooled;
    std::vector<std::string> owners;
    for (const auto& e : setup.examples) {
        if (!train_ids.count(e.example_id)) continue;
        const std::string& target = target_of(e, kind);
        if (target.empty()) continue;
        for (auto& lt : label_tuples(e.input_tuples, target)) {
            pooled.push_back(std::move(lt));
            owners.push_back(e.example_id);
        }
    }
    if (pooled.empty()) throw IoError("no training tuples for target " + config.tuples_target);

    if (config.use_onehot)
        setup.feature_config.onehot_phrases = frequent_salient_phrases(pooled, config.onehot_k);

    TupleClassifier model;
    if (config.classifier_kind == "external") {
        model.kind = "external";
        model.command = config.classifier_command;
        model.feature_config = setup.feature_config;
        model.seed = config.tuples_seed;
    } else {
        // Undersample negatives, then featurize with each tuple's own doc context.
        std::vector<LabeledTuple> sampled;
        std::vector<std::string> sampled_owners;
        {
            std::vector<bool> salient(pooled.size());
            for (size_t i = 0; i < pooled.size(); ++i) salient[i] = pooled[i].salient;
            auto keep =
                undersample_keep_mask(salient, config.undersample_ratio, config.tuples_seed);
            for (size_t i = 0; i < pooled.size(); ++i) {
                if (!keep[i]) continue;
                sampled.push_back(pooled[i]);
                sampled_owners.push_back(owners[i]);
            }
        }
        std::vector<std::vector<double>> x;
        std::vector<bool> y;
        const VectorTable* vectors = setup.vectors ? &*setup.vectors : nullptr;
        for (size_t i = 0; i < sampled.size(); ++i) {
            DocContext ctx;
            auto it = setup.contexts.find(sampled_owners[i]);
            ctx = it != setup.contexts.end() ? it->second : DocContext{};
            x.push_back(featurize(sampled[i].tuple, ctx, vectors, setup.feature_config).values);
            y.push_back(sampled[i].salient);
        }
        TrainConfig tc;
        tc.learning_rate = config.learning_rate;
        tc.epochs = config.epochs;
        tc.l2 = config.l2;
        tc.seed = config.tuples_seed;
        model = train_classifier(x, y, tc, setup.feature_config);
        log << "train-tuples: " << sampled.size() << " sampled tuples ("
            << pooled.size() << " pooled)\n";
    }

    fs::path tuples_dir = fs::path(config.work_dir) / "tuples";
    ensure_dir(tuples_dir);
    json model_json = classifier_to_json(model);
    model_json["config_digest"] = config_digest(config);
    std::string model_name = "model_" + config.tuples_target + ".json";
    write_file((tuples_dir / model_name).string(), model_json.dump(2) + "\n");

    // Per-example top-n evaluation over the whole corpus, macro-averaged.
    const VectorTable* vectors = setup.vectors ? &*setup.vectors : nullptr;
    std::map<size_t, std::pair<double, double>> sums;  // n -> (acc, recall)
    std::map<size_t, size_t> recall_defined;
    size_t evaluated = 0;
    for (const auto& e : setup.examples) {
        const std::string& target = target_of(e, kind);
        if (target.empty() || e.input_tuples.empty()) continue;
        auto labeled = label_tuples(e.input_tuples, target);
        DocContext ctx = context_for(setup, e);
        std::vector<std::vector<double>> feats;
        for (const auto& t : e.input_tuples)
            feats.push_back(featurize(t, ctx, vectors, model.feature_config).values);
        auto ranked = rank_tuples(model, e.input_tuples, feats, e.input_tuples.size());
        std::vector<size_t> order;
        for (const auto& r : ranked) order.push_back(r.source_index);
        auto evals = evaluate_topn(order, labeled, config.top_n);
        for (const auto& ev : evals) {
            sums[ev.n].first += ev.accuracy;
            if (ev.recall) {
                sums[ev.n].second += *ev.recall;
                ++recall_defined[ev.n];
            }
        }
        ++evaluated;
    }
    json eval{{"target", config.tuples_target},
              {"examples", evaluated},
              {"config_digest", config_digest(config)},
              {"top_n", json::array()}};
    for (size_t n : config.top_n) {
        json row{{"n", n},
                 {"accuracy", evaluated ? sums[n].first / double(evaluated) : 0.0},
                 {"recall", recall_defined[n] ? sums[n].second / double(recall_defined[n]) : 0.0},
                 {"recall_undefined", evaluated - recall_defined[n]}};
        eval["top_n"].push_back(row);
    }
    std::string eval_name = "eval_" + config.tuples_target + ".json";
    write_file((tuples_dir / eval_name).string(), eval.dump(2) + "\n");

    write_stage_manifest(config, "train_tuples",
                         {"tuples/" + model_name, "tuples/" + eval_name});
    return kOk;
}

inline int cmd_select_tuples(const RunConfig& config, bool force, std::ostream& log = std::cerr) {
    using namespace pipedetail;
    check_upstream(config, "train_tuples", force);
    auto setup = tuple_setup(config);
    fs::path tuples_dir = fs::path(config.work_dir) / "tuples";
    std::string model_name = "model_" + config.tuples_target + ".json";
    TupleClassifier model =
        classifier_from_json(json::parse(read_file((tuples_dir / model_name).string())));

    fs::path ranked_dir = tuples_dir / ("ranked_" + config.tuples_target);
    ensure_dir(ranked_dir);
    const VectorTable* vectors = setup.vectors ? &*setup.vectors : nullptr;
    std::vector<std::string> outputs;
    for (const auto& e : setup.examples) {
        DocContext ctx = context_for(setup, e);
        std::vector<std::vector<double>> feats;
        for (const auto& t : e.input_tuples)
            feats.push_back(featurize(t, ctx, vectors, model.feature_config).values);
        auto ranked = rank_tuples(model, e.input_tuples, feats, e.input_tuples.size());
        std::ostringstream jsonl;
        for (const auto& r : ranked) {
            json row = to_json(r.tuple);
            row["proba"] = r.proba;
            jsonl << row.dump() << "\n";
        }
        write_file((ranked_dir / (e.example_id + ".jsonl")).string(), jsonl.str());
        outputs.push_back("tuples/ranked_" + config.tuples_target + "/" + e.example_id + ".jsonl");
    }
    log << "select-tuples: ranked tuples for " << outputs.size() << " examples\n";
    write_stage_manifest(config, "select_tuples", outputs);
    return kOk;
}

// --- summarize ---------------------------------------------------------------------

inline int cmd_summarize(const RunConfig& config, bool force, std::ostream& log = std::cerr) {
    using namespace pipedetail;
    check_upstream(config, "select_text", force);
    const std::string& target = config.summarize_target;
    PipelineConfig pc = config.pipeline_config(target);
    pc.validate();
    bool needs_tuples = pc.mode != PipelineMode::kTextOnly;
    if (needs_tuples) check_upstream(config, "select_tuples", force);

    auto examples = load_examples(config);
    TargetKind kind = target_kind(target);
    fs::path select_dir = fs::path(config.work_dir) / "select";
    fs::path selection_path = select_dir / ("selection_" + target + ".json");
    if (!fs::exists(selection_path)) throw IoError("missing " + selection_path.string());
    json selection_json = json::parse(read_file(selection_path.string()));
    std::vector<std::vector<int>> slots =
        selection_json.at("slots").get<std::vector<std::vector<int>>>();

    fs::path ranked_dir =
        fs::path(config.work_dir) / "tuples" / ("ranked_" + config.tuples_target);
    fs::path out_dir = fs::path(config.work_dir) / "summaries" / target;
    ensure_dir(out_dir);

    std::optional<GeneratorClient> client;
    if (!config.generator_command.empty()) {
        GeneratorHandle handle;
        handle.command = config.generator_command;
        handle.timeout_sec = config.generator_timeout_sec;
        handle.max_concurrent = config.max_concurrent;
        client.emplace(std::move(handle));
    }

    size_t written = 0, failures = 0, skipped = 0;
    std::vector<std::string> outputs;
    for (const auto& e : examples) {
        if (target_of(e, kind).empty()) {
            ++skipped;
            continue;
        }
        std::vector<TableTuple> tuples;
        if (needs_tuples) {
            fs::path ranked_path = ranked_dir / (e.example_id + ".jsonl");
            if (fs::exists(ranked_path)) {
                std::ifstream in(ranked_path);
                std::string line;
                while (std::getline(in, line) && tuples.size() < config.tuple_top_n) {
                    if (trim(line).empty()) continue;
                    tuples.push_back(tuple_from_json(json::parse(line)));
                }
            } else {
                throw IoError("missing ranked tuples for " + e.example_id +
                              "; run select-tuples");
            }
        }
        std::vector<SummarySegmentPlan> plans(slots.size());
        for (size_t s = 0; s < slots.size(); ++s) {
            plans[s].slot = static_cast<int>(s);
            plans[s].segment_ids = slots[s];
            plans[s].tuples = tuples;
            std::string text;
            for (int id : slots[s]) {
                if (static_cast<size_t>(id) >= e.input_segments.size()) continue;
                if (!text.empty()) text.push_back(' ');
                text += e.input_segments[static_cast<size_t>(id)].text;
            }
            plans[s].selected_text = std::move(text);
        }
        GenerationOutcome outcome;
        try {
            outcome = generate_segments(plans, client ? &*client : nullptr, pc);
        } catch (const GeneratorFailure& e2) {
            outcome.failed = true;
            outcome.slot_errors.assign(plans.size(), e2.what());
            outcome.summary.segments.assign(plans.size(), "");
        }
        json out{{"example_id", e.example_id},
                 {"target", target},
                 {"mode", to_string(pc.mode)},
                 {"segments", outcome.summary.segments},
                 {"combined", outcome.summary.combined},
                 {"config_digest", config_digest(config)}};
        if (outcome.failed) {
            out["slot_errors"] = outcome.slot_errors;
            ++failures;
            log << "summarize: FAILED " << e.example_id << "\n";
        }
        write_file((out_dir / (e.example_id + ".json")).string(), out.dump(2) + "\n");
        outputs.push_back("summaries/" + target + "/" + e.example_id + ".json");
        ++written;
    }
    log << "summarize: " << written << " summaries (" << failures << " failed, " << skipped
        << " without a " << target << " target)\n";
    if (written == 0) return kIoError;
    write_stage_manifest(config, "summarize", outputs);
    return failures == 0 ? kOk : kPartial;
}

// --- evaluate ----------------------------------------------------------------------

struct MetricRow {
    std::string example_id;
    double r1 = 0, r2 = 0, rl = 0, bleu = 0;
    NumMetrics nums;
    double frag_coverage = 0, frag_density = 0;
};

inline int cmd_evaluate(const RunConfig& config, bool force, std::ostream& log = std::cerr) {
    using namespace pipedetail;
    check_upstream(config, "summarize", force);
    const std::string& target = config.evaluate_target;
    TargetKind kind = target_kind(target);
    auto examples = load_examples(config);
    fs::path summaries_dir = fs::path(config.work_dir) / "summaries" / target;

    std::vector<const Example*> scored;
    std::vector<std::string> hyps;
    for (const auto& e : examples) {
        if (target_of(e, kind).empty()) continue;
        fs::path path = summaries_dir / (e.example_id + ".json");
        if (!fs::exists(path)) {
            log << "evaluate: missing summary for " << e.example_id << "\n";
            continue;
        }
        json j = json::parse(read_file(path.string()));
        scored.push_back(&e);
        hyps.push_back(j.at("combined").get<std::string>());
    }
    if (scored.empty()) throw IoError("no summaries to evaluate for target " + target);

    std::vector<MetricRow> rows(scored.size());
    parallel_for(scored.size(), config.jobs, [&](size_t i) {
        const Example& e = *scored[i];
        const std::string& hyp = hyps[i];
        const std::string& ref = target_of(e, kind);
        MetricRow row;
        row.example_id = e.example_id;
        row.r1 = rouge_n(hyp, ref, 1);
        row.r2 = rouge_n(hyp, ref, 2);
        row.rl = rouge_l(hyp, ref);
        if (config.eval_bleu) row.bleu = bleu4(hyp, ref);
        // D = input text plus both tuple value forms
        std::string input = input_text_of(e);
        NumberSet doc_numbers = extract_numbers(input);
        for (const auto& t : e.input_tuples) {
            size_t sep = t.cell_value.find(" & ");
            if (sep == std::string::npos) continue;
            if (auto a = parse_report_number(t.cell_value.substr(0, sep)))
                doc_numbers.insert(a->normalized);
            if (auto b = parse_report_number(t.cell_value.substr(sep + 3)))
                doc_numbers.insert(b->normalized);
        }
        row.nums = num_metrics(doc_numbers, extract_numbers(ref), extract_numbers(hyp));
        if (config.eval_fragments) {
            auto frag = fragment_stats(hyp, input);
            row.frag_coverage = frag.coverage;
            row.frag_density = frag.density;
        }
        rows[i] = std::move(row);
    });

    // Aggregate: means over defined values, with undefined counts.
    auto mean_of = [&](auto getter) {
        double sum = 0;
        size_t defined = 0;
        for (const auto& r : rows) {
            if (auto v = getter(r)) {
                sum += *v;
                ++defined;
            }
        }
        return std::pair<double, size_t>(defined ? sum / double(defined) : 0.0,
                                         rows.size() - defined);
    };
    auto always = [](double v) { return std::optional<double>(v); };
    auto [r1_mean, z1] = mean_of([&](const MetricRow& r) { return always(r.r1); });
    auto [r2_mean, z2] = mean_of([&](const MetricRow& r) { return always(r.r2); });
    auto [rl_mean, z3] = mean_of([&](const MetricRow& r) { return always(r.rl); });
    auto [bleu_mean, z4] = mean_of([&](const MetricRow& r) { return always(r.bleu); });
    auto [np_mean, np_undef] = mean_of([](const MetricRow& r) { return r.nums.np; });
    auto [nr_mean, nr_undef] = mean_of([](const MetricRow& r) { return r.nums.nr; });
    auto [nc_mean, nc_undef] = mean_of([](const MetricRow& r) { return r.nums.nc; });
    auto [ns_mean, ns_undef] = mean_of([](const MetricRow& r) { return r.nums.ns; });
    auto [fc_mean, z5] = mean_of([&](const MetricRow& r) { return always(r.frag_coverage); });
    auto [fd_mean, z6] = mean_of([&](const MetricRow& r) { return always(r.frag_density); });

    json report{{"target", target},
                {"examples", rows.size()},
                {"config_digest", config_digest(config)},
                {"aggregate",
                 {{"r1", r1_mean},
                  {"r2", r2_mean},
                  {"rl", rl_mean},
                  {"bleu4", bleu_mean},
                  {"np", np_mean},
                  {"nr", nr_mean},
                  {"nc", nc_mean},
                  {"ns", ns_mean},
                  {"frag_coverage", fc_mean},
                  {"frag_density", fd_mean},
                  {"undefined_counts",
                   {{"np", np_undef}, {"nr", nr_undef}, {"nc", nc_undef}, {"ns", ns_undef}}}}},
                {"per_example", json::array()}};
    for (const auto& r : rows) {
        json row{{"example_id", r.example_id}, {"r1", r.r1},  {"r2", r.r2},
                 {"rl", r.rl},                 {"bleu4", r.bleu},
                 {"frag_coverage", r.frag_coverage},
                 {"frag_density", r.frag_density}};
        row["np"] = r.nums.np ? json(*r.nums.np) : json(nullptr);
        row["nr"] = r.nums.nr ? json(*r.nums.nr) : json(nullptr);
        row["nc"] = r.nums.nc ? json(*r.nums.nc) : json(nullptr);
        row["ns"] = r.nums.ns ? json(*r.nums.ns) : json(nullptr);
        report["per_example"].push_back(row);
    }

    std::ostringstream csv;
    csv << "example_id,r1,r2,rl,bleu4,np,nr,nc,ns,frag_coverage,frag_density\n";
    auto cell = [](const std::optional<double>& v) { return v ? format6(*v) : std::string(); };
    for (const auto& r : rows) {
        csv << r.example_id << "," << format6(r.r1) << "," << format6(r.r2) << ","
            << format6(r.rl) << "," << format6(r.bleu) << "," << cell(r.nums.np) << ","
            << cell(r.nums.nr) << "," << cell(r.nums.nc) << "," << cell(r.nums.ns) << ","
            << format6(r.frag_coverage) << "," << format6(r.frag_density) << "\n";
    }
    csv << "AGGREGATE," << format6(r1_mean) << "," << format6(r2_mean) << "," << format6(rl_mean)
        << "," << format6(bleu_mean) << "," << format6(np_mean) << "," << format6(nr_mean) << ","
        << format6(nc_mean) << "," << format6(ns_mean) << "," << format6(fc_mean) << ","
        << format6(fd_mean) << "\n";

    fs::path reports_dir = fs::path(config.work_dir) / "reports";
    ensure_dir(reports_dir);
    write_file((reports_dir / ("metrics_" + target + ".json")).string(), report.dump(2) + "\n");
    write_file((reports_dir / ("metrics_" + target + ".csv")).string(), csv.str());
    log << "evaluate: " << rows.size() << " examples scored for " << target << "\n";
    write_stage_manifest(config, "evaluate",
                         {"reports/metrics_" + target + ".json",
                          "reports/metrics_" + target + ".csv"});
    return kOk;
}

}  // namespace findsum
