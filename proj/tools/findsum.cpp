// findsum: report-document summarization pipeline driver.
//
//   findsum ingest [files...]    parse filings into document JSONL + tuple TSV
//   findsum build-corpus         assemble examples, split by company, stats
//   findsum stats                print dataset statistics
//   findsum select-text          corpus-level MMRG segment selection
//   findsum train-tuples         train/persist the salient-tuple classifier
//   findsum select-tuples        rank tuples per example
//   findsum summarize            run GC/CG/GCG/TEXT_ONLY generation
//   findsum evaluate             ROUGE/BLEU/NP/NC/NS reports (JSON + CSV)
//
// Option precedence: flag > FINDSUM_WORKDIR env > config file > default.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "findsum/pipeline.hpp"

using namespace findsum;

int main(int argc, char** argv) {
    CLI::App app{"findsum: long text and multi-table summarization pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, work_dir, input_dir;
    int jobs = 0;
    bool force = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--work-dir", work_dir, "work directory (overrides env + config)");
    app.add_option("--input-dir", input_dir, "input directory");
    app.add_option("--jobs", jobs, "parallel jobs per stage");
    app.add_flag("--force", force, "ignore config-digest mismatches");

    auto* ingest = app.add_subcommand("ingest", "parse report HTML files");
    std::vector<std::string> ingest_files;
    ingest->add_option("files", ingest_files, "HTML files or directories");

    auto* build = app.add_subcommand("build-corpus", "assemble examples and split");
    uint64_t split_seed = 0;
    bool seed_set = false;
    build->add_option("--seed", split_seed, "split seed")->each([&](const std::string&) {
        seed_set = true;
    });

    app.add_subcommand("stats", "print dataset statistics");
    app.add_subcommand("select-text", "MMRG text-segment selection");

    std::string target_flag, mode_flag, generator_flag;
    auto add_target = [&](CLI::App* cmd) {
        cmd->add_option("--target", target_flag, "roo | liquidity");
    };
    auto* train = app.add_subcommand("train-tuples", "train the tuple classifier");
    add_target(train);
    auto* sel_tuples = app.add_subcommand("select-tuples", "rank tuples per example");
    add_target(sel_tuples);
    auto* summarize = app.add_subcommand("summarize", "generate summaries");
    add_target(summarize);
    summarize->add_option("--mode", mode_flag, "TEXT_ONLY | GC | CG | GCG");
    summarize->add_option("--generator", generator_flag, "generator command line");
    auto* evaluate = app.add_subcommand("evaluate", "score summaries");
    add_target(evaluate);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config;
        if (!config_path.empty()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(config_path));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config parse error: " + std::string(e.what()));
            }
            config = config_from_json(j);
        }
        if (const char* env = std::getenv("FINDSUM_WORKDIR"); env && *env)
            config.work_dir = env;
        if (!work_dir.empty()) config.work_dir = work_dir;
        if (!input_dir.empty()) config.input_dir = input_dir;
        if (jobs > 0) config.jobs = jobs;
        if (seed_set) config.split_seed = split_seed;
        if (!target_flag.empty()) {
            config.tuples_target = target_flag;
            config.summarize_target = target_flag;
            config.evaluate_target = target_flag;
        }
        if (!mode_flag.empty()) config.mode = mode_flag;
        if (!generator_flag.empty()) config.generator_command = generator_flag;
        validate_config(config);

        if (app.got_subcommand("ingest")) {
            if (ingest_files.empty()) ingest_files.push_back(config.input_dir);
            return cmd_ingest(ingest_files, config);
        }
        if (app.got_subcommand("build-corpus")) return cmd_build_corpus(config, force);
        if (app.got_subcommand("stats")) return cmd_stats(config, force);
        if (app.got_subcommand("select-text")) return cmd_select_text(config, force);
        if (app.got_subcommand("train-tuples")) return cmd_train_tuples(config, force);
        if (app.got_subcommand("select-tuples")) return cmd_select_tuples(config, force);
        if (app.got_subcommand("summarize")) return cmd_summarize(config, force);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(config, force);
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
}
