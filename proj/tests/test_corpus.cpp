#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <random>
#include <set>

#include "findsum/corpus.hpp"
#include "findsum/serialize.hpp"

using namespace findsum;

namespace {

std::string fixture(const std::string& name) {
    return read_file(std::string(FINDSUM_FIXTURES_DIR) + "/" + name);
}

ReportDocument fixture_doc(const std::string& stem) {
    IngestConfig cfg;
    cfg.max_segment_words = 30;
    return parse_filing(fixture(stem + ".html"), stem.substr(stem.find('_') + 1), cfg);
}

Example synthetic_example(const std::string& id, const std::string& company,
                          std::vector<std::string> segments, std::string roo = "target text",
                          std::string liq = "") {
    Example e;
    e.example_id = id;
    e.company_id = company;
    for (size_t i = 0; i < segments.size(); ++i)
        e.input_segments.push_back(TextSegment{static_cast<int>(i), segments[i],
                                               static_cast<int>(word_count(segments[i]))});
    e.target_roo = std::move(roo);
    e.target_liquidity = std::move(liq);
    return e;
}

}  // namespace

TEST_CASE("extract_targets golden fixtures") {
    json golden = json::parse(fixture("targets.golden.json"));
    for (const std::string stem : {"filing_alpha", "filing_beta", "filing_gamma"}) {
        std::string key = stem.substr(stem.find('_') + 1);
        auto doc = fixture_doc(stem);
        auto [roo, liq] = extract_targets(doc);
        INFO(key);
        CHECK(roo == golden[key]["roo"].get<std::string>());
        CHECK(liq == golden[key]["liquidity"].get<std::string>());
    }
}

TEST_CASE("extract_targets with only one heading") {
    auto doc = fixture_doc("filing_gamma");
    auto [roo, liq] = extract_targets(doc);
    CHECK_FALSE(roo.empty());
    CHECK(liq.empty());
}

TEST_CASE("extract_targets without MD&A throws") {
    auto doc = parse_filing("<body><p>Item 1. Business</p><p>Text.</p></body>", "x");
    CHECK_THROWS_AS(extract_targets(doc), NoMdaItem);
}

TEST_CASE("build_example excludes target content from inputs") {
    auto doc = fixture_doc("filing_alpha");
    auto e = build_example(doc, 30);
    CHECK(e.example_id == "alpha");
    CHECK(e.company_id == "acme");
    // Targets never appear among input segments.
    for (const auto& s : e.input_segments) {
        CHECK(s.text.find("Operating revenue increased") == std::string::npos);
        CHECK(s.text.find("Cash used in operating") == std::string::npos);
    }
    // The ROO-section table (table 0) is excluded; item8's table 1 remains.
    REQUIRE(e.input_tuples.size() == 2);
    CHECK(e.input_tuples[0].table_id == 1);
    CHECK(e.input_tuples[0].row_name == "interest bearing deposits with banks");
    CHECK(e.input_tuples[1].row_name == "operating revenue");
    // Part ids are consecutive example-level positions.
    for (size_t i = 0; i < e.input_segments.size(); ++i)
        CHECK(e.input_segments[i].segment_id == static_cast<int>(i));
    // doc order: item1, MD&A remainder, item8
    CHECK(e.input_segments.front().text.find("Item 1.") == 0);
}

TEST_CASE("build_example golden trace for alpha") {
    auto doc = fixture_doc("filing_alpha");
    auto e = build_example(doc, 30);
    REQUIRE(e.input_segments.size() == 3);
    CHECK(e.input_segments[0].text ==
          "Item 1. Business Acme Corp makes widgets. We operate in 12 states.");
    CHECK(e.input_segments[1].text ==
          "Item 7. Management's Discussion and Analysis of Financial Condition and Results of "
          "Operations The following discussion should be read together with our financial "
          "statements.");
    CHECK(e.input_segments[2].text ==
          "Item 8. Financial Statements See accompanying notes. Totals reflect rounding.");
    CHECK(e.target_roo ==
          "Operating revenue increased $17.1 million (3.2%) to $545.7 million for 2019.");
    CHECK(e.target_liquidity == "Cash used in operating activities was $85.0 million in 2019.");
}

TEST_CASE("build_example drops docs without MD&A or targets") {
    auto no_mda = parse_filing("<body><p>Item 1. Business</p><p>Text.</p></body>", "x");
    CHECK_THROWS_AS(build_example(no_mda), NoMdaItem);
    auto no_targets = parse_filing(
        "<body><p>Item 7. Management's Discussion and Analysis</p><p>General words only.</p></body>",
        "x");
    CHECK_THROWS_AS(build_example(no_targets), EmptyTargets);
}

TEST_CASE("build_example retains MD&A-only doc with empty inputs") {
    auto doc = parse_filing(
        "<body><p>Item 7. Management's Discussion and Analysis</p>"
        "<p>Results of Operations</p><p>Revenue held at $5.0 million.</p></body>",
        "x");
    auto e = build_example(doc);
    CHECK(e.target_roo == "Revenue held at $5.0 million.");
    // remainder = just the item heading
    CHECK(e.input_segments.size() == 1);
}

TEST_CASE("dedup_and_filter removes duplicates and outliers") {
    std::vector<Example> ex;
    ex.push_back(synthetic_example("a", "c1", {"alpha beta gamma delta epsilon zeta"}));
    ex.push_back(synthetic_example("b", "c2", {"alpha  beta gamma delta epsilon zeta"}));  // dup
    ex.push_back(synthetic_example("c", "c3", {"tiny"}));
    auto out = dedup_and_filter(ex, 3, 100);
    REQUIRE(out.size() == 1);
    CHECK(out[0].example_id == "a");
}

TEST_CASE("dedup_and_filter truncates at segment boundaries") {
    std::vector<Example> ex;
    ex.push_back(synthetic_example("a", "c1",
                                   {"w1 w2 w3 w4 w5", "v1 v2 v3 v4 v5", "u1 u2 u3 u4 u5"}));
    auto out = dedup_and_filter(ex, 1, 12);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].input_segments.size() == 2);
    size_t words = 0;
    for (const auto& s : out[0].input_segments) words += s.word_count;
    CHECK(words <= 12);
}

TEST_CASE("dedup idempotence") {
    std::vector<Example> ex;
    for (int i = 0; i < 6; ++i)
        ex.push_back(synthetic_example("e" + std::to_string(i), "c" + std::to_string(i % 3),
                                       {"text number " + std::to_string(i % 4) + " body words"}));
    auto once = dedup_and_filter(ex, 1, 100);
    auto twice = dedup_and_filter(once, 1, 100);
    REQUIRE(once.size() == twice.size());
    for (size_t i = 0; i < once.size(); ++i) CHECK(once[i].example_id == twice[i].example_id);
}

TEST_CASE("split_by_company balanced case") {
    std::vector<Example> ex;
    for (int i = 0; i < 10; ++i)
        ex.push_back(synthetic_example("e" + std::to_string(i), "co" + std::to_string(i), {"w"}));
    auto split = split_by_company(ex, {0.8, 0.1, 0.1}, 42);
    CHECK(split.train.size() == 8);
    CHECK(split.val.size() == 1);
    CHECK(split.test.size() == 1);
    auto again = split_by_company(ex, {0.8, 0.1, 0.1}, 42);
    CHECK(split.train == again.train);
    CHECK(split.val == again.val);
    CHECK(split.test == again.test);
}

TEST_CASE("split_by_company requires three companies") {
    std::vector<Example> ex;
    ex.push_back(synthetic_example("a", "c1", {"w"}));
    ex.push_back(synthetic_example("b", "c2", {"w"}));
    CHECK_THROWS_AS(split_by_company(ex), InsufficientCompanies);
}

TEST_CASE("split_by_company disjoint and near quota under skew") {
    std::mt19937 rng(777);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Example> ex;
        std::uniform_int_distribution<int> companies_d(4, 20), size_d(1, 5);
        int n_companies = companies_d(rng);
        size_t max_company = 0;
        for (int c = 0; c < n_companies; ++c) {
            int sz = size_d(rng);
            max_company = std::max(max_company, static_cast<size_t>(sz));
            for (int k = 0; k < sz; ++k)
                ex.push_back(synthetic_example("e" + std::to_string(c) + "_" + std::to_string(k),
                                               "co" + std::to_string(c), {"w"}));
        }
        auto split = split_by_company(ex, {0.8, 0.1, 0.1}, 1000 + trial);
        // brute-force company -> split map; every company in exactly one split
        std::map<std::string, std::set<int>> seen;
        auto note = [&](const std::vector<std::string>& ids, int s) {
            for (const auto& id : ids) {
                std::string company = "co" + id.substr(1, id.find('_') - 1);
                seen[company].insert(s);
            }
        };
        note(split.train, 0);
        note(split.val, 1);
        note(split.test, 2);
        CHECK(seen.size() == static_cast<size_t>(n_companies));
        for (const auto& [c, splits] : seen) CHECK(splits.size() == 1);
        // union covers all examples exactly once
        CHECK(split.train.size() + split.val.size() + split.test.size() == ex.size());
        // counts within one company of quota
        double total = static_cast<double>(ex.size());
        double quotas[3] = {0.8 * total, 0.1 * total, 0.1 * total};
        size_t counts[3] = {split.train.size(), split.val.size(), split.test.size()};
        for (int s = 0; s < 3; ++s)
            CHECK(std::abs(static_cast<double>(counts[s]) - quotas[s]) <=
                  static_cast<double>(max_company) + 1e-9);
    }
}

TEST_CASE("corpus_stats on fully copied summary") {
    auto e = synthetic_example("a", "c",
                               {"revenue rose by 17.1 million dollars this year overall"},
                               "revenue rose by 17.1 million dollars this year overall");
    auto stats = corpus_stats({e}, TargetKind::kRoo);
    CHECK(stats.pairs == 1);
    CHECK(stats.pct_covered_num == 100.0);
    CHECK(stats.frag_coverage == Catch::Approx(1.0));
    for (double v : stats.novel_ngram_pct) CHECK(v == 0.0);
}

TEST_CASE("corpus_stats disjoint summary") {
    auto e = synthetic_example("a", "c", {"alpha beta gamma"}, "delta epsilon zeta");
    auto stats = corpus_stats({e}, TargetKind::kRoo);
    CHECK(stats.novel_ngram_pct[0] == 100.0);
    CHECK(stats.frag_coverage == 0.0);
}

TEST_CASE("corpus_stats matches independent recount on a 3-example corpus") {
    std::vector<Example> ex;
    ex.push_back(synthetic_example("a", "c1", {"sales were 5 million units", "costs fell"},
                                   "sales were 5 million units sold"));
    ex.push_back(synthetic_example("b", "c2", {"profit of 2.5 million"},
                                   "profit reached 2.5 million overall"));
    ex.push_back(synthetic_example("c", "c3", {"neutral text only"}, "other words entirely"));
    auto stats = corpus_stats(ex, TargetKind::kRoo);
    CHECK(stats.pairs == 3);

    // Independent recount with direct calls per example.
    double words = 0, sents = 0, sw = 0, ss = 0, nums = 0, cov = 0, fc = 0, fd = 0;
    double novel1 = 0;
    size_t covn = 0;
    for (const auto& e : ex) {
        std::string in = input_text_of(e);
        words += double(word_count(in));
        sents += double(split_sentences(in).size());
        sw += double(word_count(e.target_roo));
        ss += double(split_sentences(e.target_roo).size());
        nums += double(count_number_tokens(e.target_roo));
        auto p = covered_num_pct(extract_numbers(in), extract_numbers(e.target_roo));
        if (p) { cov += *p; ++covn; }
        auto f = fragment_stats(e.target_roo, in);
        fc += f.coverage;
        fd += f.density;
        novel1 += novel_ngram_pct(e.target_roo, in, 1);
    }
    CHECK(stats.avg_doc_words == Catch::Approx(words / 3));
    CHECK(stats.avg_doc_sents == Catch::Approx(sents / 3));
    CHECK(stats.avg_sum_words == Catch::Approx(sw / 3));
    CHECK(stats.avg_sum_sents == Catch::Approx(ss / 3));
    CHECK(stats.avg_sum_nums == Catch::Approx(nums / 3));
    CHECK(stats.pct_covered_num == Catch::Approx(cov / covn));
    CHECK(stats.frag_coverage == Catch::Approx(fc / 3));
    CHECK(stats.frag_density == Catch::Approx(fd / 3));
    CHECK(stats.novel_ngram_pct[0] == Catch::Approx(novel1 / 3));
}

TEST_CASE("corpus_stats linearity: single example equals direct measures") {
    auto e = synthetic_example("a", "c", {"the quick brown fox", "jumps over 12 lazy dogs"},
                               "the quick fox jumps over 12 dogs");
    auto stats = corpus_stats({e}, TargetKind::kRoo);
    std::string in = input_text_of(e);
    CHECK(stats.avg_doc_words == double(word_count(in)));
    CHECK(stats.avg_sum_nums == double(count_number_tokens(e.target_roo)));
    CHECK(stats.frag_density ==
          Catch::Approx(fragment_stats(e.target_roo, in).density));
}

TEST_CASE("example jsonl round trip") {
    auto doc = fixture_doc("filing_beta");
    auto e = build_example(doc, 30);
    auto text = examples_to_jsonl({e});
    std::istringstream in(text);
    auto back = examples_from_jsonl(in);
    REQUIRE(back.size() == 1);
    CHECK(to_json(back[0]) == to_json(e));
}
