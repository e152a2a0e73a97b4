#include <catch2/catch_amalgamated.hpp>

#include "findsum/numbers.hpp"

using namespace findsum;

TEST_CASE("round_cell_value reproduces the reference pairs") {
    CHECK(round_cell_value("15,700").value() == "15.7");
    CHECK(round_cell_value("2,038").value() == "2");
    CHECK(round_cell_value("10,168").value() == "10.2");
    CHECK(round_cell_value("545,700").value() == "545.7");
    CHECK(round_cell_value("3,659").value() == "3.7");
    CHECK(round_cell_value("17,838").value() == "17.8");
}

TEST_CASE("round_cell_value handles negatives, currency and custom divisor") {
    CHECK(round_cell_value("(2,038)").value() == "-2");
    CHECK(round_cell_value("$1,500").value() == "1.5");
    CHECK(round_cell_value("50", 100.0).value() == "0.5");
    CHECK(round_cell_value("150", 1.0).value() == "150");
    CHECK_FALSE(round_cell_value("n/a").has_value());
    CHECK_FALSE(round_cell_value("").has_value());
    CHECK_FALSE(round_cell_value("3.2%").has_value());
}

TEST_CASE("round_cell_value rounds half away from zero") {
    CHECK(round_cell_value("1,250", 10000.0).value() == "0.1");
    CHECK(round_cell_value("(1,250)", 10000.0).value() == "-0.1");
    CHECK(round_cell_value("50", 1000.0).value() == "0.1");
}

TEST_CASE("parse_report_number forms") {
    CHECK(parse_report_number("1,234.56")->value == Catch::Approx(1234.56));
    CHECK(parse_report_number("(17.1)")->value == Catch::Approx(-17.1));
    CHECK(parse_report_number("$ 2,038")->value == Catch::Approx(2038.0));
    CHECK(parse_report_number("-5")->normalized == "-5");
    CHECK_FALSE(parse_report_number("12,34").has_value());
    CHECK_FALSE(parse_report_number("1.2.3").has_value());
    CHECK_FALSE(parse_report_number("total").has_value());
}

TEST_CASE("extract_numbers on report prose") {
    auto set = extract_numbers("revenue increased $17.1 million (3.2%) to $545.7 million");
    CHECK(set == NumberSet{"17.1", "3.2", "545.7"});
}

TEST_CASE("extract_numbers skips numbers inside words") {
    CHECK(extract_numbers("COVID-19 impact").empty());
    CHECK(extract_numbers("our 10-K and FY2019 filings").empty());
    CHECK(extract_numbers("a 52-week high").empty());
}

TEST_CASE("extract_numbers normalizes commas and zeros") {
    auto set = extract_numbers("totaled $ 2,038 million and $ 15,700 million");
    CHECK(set == NumberSet{"2038", "15700"});
    CHECK(extract_numbers("545.70 and 545.7") == NumberSet{"545.7"});
    CHECK(extract_numbers("+5 and 5.0") == NumberSet{"5"});
}

TEST_CASE("extract_numbers parenthesized plain numbers negate, percentages do not") {
    CHECK(extract_numbers("a loss of (2,038) in total") == NumberSet{"-2038"});
    CHECK(extract_numbers("grew (3.2%) overall") == NumberSet{"3.2"});
}

TEST_CASE("extract_numbers handles sentence punctuation") {
    auto set = extract_numbers("as of December 31, 2019. Totals held.");
    CHECK(set == NumberSet{"31", "2019"});
}

TEST_CASE("extract_numbers idempotent over its own serialization") {
    auto first = extract_numbers("had $1,250.50 and (300) plus 41.0% in 2019, down 2");
    std::string joined;
    for (const auto& v : first) joined += v + " ";
    CHECK(extract_numbers(joined) == first);
}

TEST_CASE("count_number_tokens counts occurrences not types") {
    CHECK(count_number_tokens("5 and 5 and 5") == 3);
    CHECK(count_number_tokens("no numerals here") == 0);
}
