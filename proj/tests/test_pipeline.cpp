#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "findsum/pipeline.hpp"

using namespace findsum;
namespace fs = std::filesystem;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FINDSUM_FIXTURES_DIR) + "/" + name;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("findsum_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunConfig fixture_config(const fs::path& work_dir) {
    RunConfig c;
    c.work_dir = work_dir.string();
    c.max_segment_words = 30;
    c.min_input_words = 5;
    c.max_input_words = 5000;
    c.split_seed = 7;
    c.split_ratios = {0.34, 0.33, 0.33};
    c.n_prime = 2;
    c.k_roo = 2;
    c.k_liquidity = 2;
    c.epochs = 200;
    c.input_word_budget = 200;
    c.output_word_budget = 30;
    return c;
}

std::vector<std::string> fixture_files() {
    return {fixture_path("filing_alpha.html"), fixture_path("filing_beta.html"),
            fixture_path("filing_gamma.html")};
}

std::ostringstream null_log;

int run_full_pipeline(const RunConfig& config, const std::string& generator_command) {
    std::ostringstream log;
    int rc = cmd_ingest(fixture_files(), config, log);
    if (rc != kOk) return rc;
    rc = cmd_build_corpus(config, false, log);
    if (rc != kOk) return rc;
    rc = cmd_select_text(config, false, log);
    if (rc != kOk) return rc;
    rc = cmd_train_tuples(config, false, log);
    if (rc != kOk) return rc;
    rc = cmd_select_tuples(config, false, log);
    if (rc != kOk) return rc;
    RunConfig gen = config;
    gen.mode = "GCG";
    gen.generator_command = generator_command;
    rc = cmd_summarize(gen, true, log);  // mode flag changes the digest: forced
    if (rc != kOk) return rc;
    return cmd_evaluate(gen, true, log);
}

}  // namespace

TEST_CASE("ingest stage writes documents and manifest") {
    TempDir dir("ingest");
    RunConfig config = fixture_config(dir.path);
    std::ostringstream log;
    CHECK(cmd_ingest(fixture_files(), config, log) == kOk);
    CHECK(fs::exists(dir.path / "docs" / "filing_alpha.jsonl"));
    CHECK(fs::exists(dir.path / "docs" / "filing_alpha.tuples.tsv"));
    CHECK(fs::exists(dir.path / "ingest_manifest.json"));
    json manifest = json::parse(read_file((dir.path / "ingest_manifest.json").string()));
    CHECK(manifest["config_digest"] == config_digest(config));
    CHECK(manifest["outputs"].size() == 3);
}

TEST_CASE("ingest mixed good and bad inputs is partial") {
    TempDir dir("ingest_bad");
    RunConfig config = fixture_config(dir.path);
    fs::path bad = dir.path / "bad.html";
    write_file(bad.string(), "<html><body><p>no headings at all</p></body></html>");
    std::ostringstream log;
    int rc = cmd_ingest({fixture_path("filing_alpha.html"), bad.string()}, config, log);
    CHECK(rc == kPartial);
    CHECK(log.str().find("FAILED") != std::string::npos);
    // all bad -> io error
    std::ostringstream log2;
    CHECK(cmd_ingest({bad.string()}, config, log2) == kIoError);
    // nothing at all -> throws
    CHECK_THROWS_AS(cmd_ingest({}, config, log2), IoError);
}

TEST_CASE("build_corpus before ingest fails with a pointer to the missing stage") {
    TempDir dir("order");
    RunConfig config = fixture_config(dir.path);
    std::ostringstream log;
    CHECK_THROWS_AS(cmd_build_corpus(config, false, log), IoError);
}

TEST_CASE("digest mismatch is refused unless forced") {
    TempDir dir("digest");
    RunConfig config = fixture_config(dir.path);
    std::ostringstream log;
    REQUIRE(cmd_ingest(fixture_files(), config, log) == kOk);
    RunConfig changed = config;
    changed.n_prime = 9;  // any config change flips the digest
    CHECK_THROWS_AS(cmd_build_corpus(changed, false, log), ConfigError);
    CHECK(cmd_build_corpus(changed, true, log) == kOk);
}

TEST_CASE("full pipeline runs and reports are deterministic") {
    TempDir dir_a("runa"), dir_b("runb");
    RunConfig a = fixture_config(dir_a.path);
    RunConfig b = fixture_config(dir_b.path);
    std::string stub = STUB_GENERATOR_PATH;
    REQUIRE(run_full_pipeline(a, stub) == kOk);
    REQUIRE(run_full_pipeline(b, stub) == kOk);
    for (const std::string rel :
         {"corpus/examples.jsonl", "corpus/split.json", "corpus/stats.json",
          "select/selection_roo.json", "select/selected_text_roo.jsonl",
          "tuples/model_roo.json", "tuples/eval_roo.json",
          "summaries/roo/filing_alpha.json", "summaries/roo/filing_beta.json",
          "summaries/roo/filing_gamma.json", "reports/metrics_roo.json",
          "reports/metrics_roo.csv"}) {
        INFO(rel);
        CHECK(read_file((dir_a.path / rel).string()) == read_file((dir_b.path / rel).string()));
    }
}

TEST_CASE("summaries carry segments, combined text, and the digest") {
    TempDir dir("summ");
    RunConfig config = fixture_config(dir.path);
    std::ostringstream log;
    REQUIRE(cmd_ingest(fixture_files(), config, log) == kOk);
    REQUIRE(cmd_build_corpus(config, false, log) == kOk);
    REQUIRE(cmd_select_text(config, false, log) == kOk);
    REQUIRE(cmd_summarize(config, false, log) == kOk);  // TEXT_ONLY, extractive fallback
    json summary =
        json::parse(read_file((dir.path / "summaries" / "roo" / "filing_alpha.json").string()));
    CHECK(summary["mode"] == "TEXT_ONLY");
    CHECK(summary["segments"].size() == 2);
    std::string joined;
    for (const auto& s : summary["segments"]) {
        std::string seg = s.get<std::string>();
        if (seg.empty()) continue;
        if (!joined.empty()) joined.push_back(' ');
        joined += seg;
    }
    CHECK(summary["combined"].get<std::string>() == joined);
    CHECK(summary["config_digest"] == config_digest(config));

    // evaluate agrees with direct metric calls
    REQUIRE(cmd_evaluate(config, false, log) == kOk);
    json report = json::parse(read_file((dir.path / "reports" / "metrics_roo.json").string()));
    auto examples = pipedetail::load_examples(config);
    const Example* alpha = nullptr;
    for (const auto& e : examples)
        if (e.example_id == "filing_alpha") alpha = &e;
    REQUIRE(alpha != nullptr);
    double direct_r1 = rouge_n(summary["combined"].get<std::string>(), alpha->target_roo, 1);
    for (const auto& row : report["per_example"]) {
        if (row["example_id"] == "filing_alpha")
            CHECK(row["r1"].get<double>() == Catch::Approx(direct_r1).margin(1e-12));
    }
}

TEST_CASE("summarize with a failing generator saves partials and exits partial") {
    TempDir dir("fail");
    RunConfig config = fixture_config(dir.path);
    std::ostringstream log;
    REQUIRE(cmd_ingest(fixture_files(), config, log) == kOk);
    REQUIRE(cmd_build_corpus(config, false, log) == kOk);
    REQUIRE(cmd_select_text(config, false, log) == kOk);
    RunConfig gen = config;
    gen.generator_command = std::string(STUB_GENERATOR_PATH) + " --error";
    int rc = cmd_summarize(gen, true, log);
    CHECK(rc == kPartial);
    json summary =
        json::parse(read_file((dir.path / "summaries" / "roo" / "filing_alpha.json").string()));
    CHECK(summary.contains("slot_errors"));
}

TEST_CASE("stats subcommand prints both subsets") {
    TempDir dir("stats");
    RunConfig config = fixture_config(dir.path);
    std::ostringstream log;
    REQUIRE(cmd_ingest(fixture_files(), config, log) == kOk);
    REQUIRE(cmd_build_corpus(config, false, log) == kOk);
    std::ostringstream out;
    CHECK(cmd_stats(config, false, out) == kOk);
    json stats = json::parse(out.str());
    CHECK(stats["roo"]["pairs"] == 3);
    CHECK(stats["liquidity"]["pairs"] == 2);  // gamma has no liquidity section
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"unknown_key": 1})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"ingest": {"typo": 1}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"jobs": "many"})")), ConfigError);
    auto c = config_from_json(json::parse(R"({"select": {"n_prime": 4}})"));
    CHECK(c.n_prime == 4);
    RunConfig bad;
    bad.mode = "BANANAS";
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
    RunConfig bad2;
    bad2.split_ratios = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(validate_config(bad2), ConfigError);
    RunConfig bad3;
    bad3.classifier_kind = "external";
    CHECK_THROWS_AS(validate_config(bad3), ConfigError);  // missing command
}

TEST_CASE("config digest is stable and sensitive") {
    RunConfig a, b;
    CHECK(config_digest(a) == config_digest(b));
    b.n_prime = 11;
    CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("cli binary: exit codes and workdir env override") {
    TempDir dir("cli");
    std::string cli = FINDSUM_CLI_PATH;
    // config error from validation:
    fs::path cfg = dir.path / "bad.json";
    write_file(cfg.string(), R"({"summarize": {"mode": "NOPE"}})");
    int rc = std::system((cli + " --config " + cfg.string() + " stats 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == kConfigError);
    // io error: stats before any stage, workdir from env
    setenv("FINDSUM_WORKDIR", dir.path.c_str(), 1);
    rc = std::system((cli + " stats 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == kIoError);
    // happy path: ingest via env workdir
    rc = std::system((cli + " ingest " + fixture_path("filing_alpha.html") + " 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == kOk);
    CHECK(fs::exists(dir.path / "docs" / "filing_alpha.jsonl"));
    // flag overrides env
    TempDir dir2("cli2");
    rc = std::system((cli + " --work-dir " + dir2.path.string() + " ingest " +
                      fixture_path("filing_beta.html") + " 2>/dev/null")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == kOk);
    CHECK(fs::exists(dir2.path / "docs" / "filing_beta.jsonl"));
    CHECK_FALSE(fs::exists(dir.path / "docs" / "filing_beta.jsonl"));
    unsetenv("FINDSUM_WORKDIR");
}
