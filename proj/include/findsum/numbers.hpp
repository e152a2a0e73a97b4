#pragma once

// Numeric token handling shared by the ingest and metrics modules: parsing
// report-style numerals ("(2,038)", "$545.7"), the cell rounding rule, and
// extraction of number sets from running text.
//
// Normalized form: commas stripped, leading '+' dropped, parentheses turned
// into a minus sign, trailing fractional zeros (and a bare trailing '.')
// trimmed, leading integer zeros reduced. "545.70" and "545.7" normalize
// identically; "545,700" and "545.7" do not (no unit-scale inference).

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "findsum/text.hpp"

namespace findsum {

namespace detail {

// Digits with optional 3-digit comma grouping and optional decimal part.
inline bool is_plain_number(std::string_view s) {
    size_t i = 0;
    const size_t n = s.size();
    if (n == 0) return false;
    size_t digits = 0;
    while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (digits == 0) return false;
    if (i < n && s[i] == ',') {
        if (digits > 3) return false;
        while (i < n && s[i] == ',') {
            if (n - i < 4) return false;
            for (size_t k = 1; k <= 3; ++k)
                if (!std::isdigit(static_cast<unsigned char>(s[i + k]))) return false;
            i += 4;
        }
    }
    if (i < n && s[i] == '.') {
        ++i;
        size_t frac = 0;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++frac;
        if (frac == 0) return false;
    }
    return i == n;
}

inline std::string strip_commas(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != ',') out.push_back(c);
    return out;
}

// Canonical string for a "digits[.digits]" body with an optional sign.
inline std::string canonicalize(bool negative, std::string_view body) {
    std::string intpart, fracpart;
    size_t dot = body.find('.');
    if (dot == std::string_view::npos) {
        intpart = std::string(body);
    } else {
        intpart = std::string(body.substr(0, dot));
        fracpart = std::string(body.substr(dot + 1));
    }
    size_t lead = 0;
    while (lead + 1 < intpart.size() && intpart[lead] == '0') ++lead;
    intpart.erase(0, lead);
    while (!fracpart.empty() && fracpart.back() == '0') fracpart.pop_back();
    std::string out;
    bool zero = intpart == "0" && fracpart.empty();
    if (negative && !zero) out.push_back('-');
    out += intpart;
    if (!fracpart.empty()) {
        out.push_back('.');
        out += fracpart;
    }
    return out;
}

}  // namespace detail

struct ParsedNumber {
    double value = 0.0;
    std::string normalized;  // canonical string form
};

// Parses one numeral the way report tables print them: optional currency
// marker, comma grouping, parentheses meaning negative. Returns absent for
// anything else (words, dates with slashes, ranges).
inline std::optional<ParsedNumber> parse_report_number(std::string_view raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    bool negative = false;
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        negative = true;
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    }
    while (!s.empty() && (s.front() == '$' || s.front() == '+' || s.front() == '-')) {
        if (s.front() == '-') negative = !negative;
        s = trim(std::string_view(s).substr(1));
    }
    if (!detail::is_plain_number(s)) return std::nullopt;
    std::string body = detail::strip_commas(s);
    ParsedNumber out;
    out.normalized = detail::canonicalize(negative, body);
    out.value = std::stod(body) * (negative ? -1.0 : 1.0);
    return out;
}

// Cell rounding: value / divisor to one decimal, half away from zero, with a
// trailing ".0" dropped ("15,700" -> "15.7", "2,038" -> "2"). Non-numeric
// cells round to absent.
inline std::optional<std::string> round_cell_value(std::string_view raw, double divisor = 1000.0) {
    auto parsed = parse_report_number(raw);
    if (!parsed || divisor <= 0.0) return std::nullopt;
    long long tenths = std::llround(parsed->value / divisor * 10.0);
    long long whole = tenths / 10;
    long long frac = std::llabs(tenths % 10);
    std::string out;
    if (tenths < 0) out.push_back('-');
    out += std::to_string(std::llabs(whole));
    if (frac != 0) {
        out.push_back('.');
        out += std::to_string(frac);
    }
    return out;
}

// A NumberSet holds normalized numeric strings; set semantics throughout.
using NumberSet = std::set<std::string>;

namespace detail {

// One whitespace token -> normalized number, or absent. Mirrors the §4.4
// footnote: digits glued to letters or hyphenated into words do not count.
inline std::optional<std::string> number_from_token(std::string_view tok) {
    // Reject anything containing a letter or an internal hyphen outright.
    for (size_t i = 0; i < tok.size(); ++i) {
        char c = tok[i];
        if (std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;
        if (c == '-' && i > 0) return std::nullopt;
        if (c == '/' || c == '\\' || c == '_') return std::nullopt;
    }
    std::string s(tok);
    // Trailing sentence punctuation, quotes, brackets.
    auto is_trail = [](char c) {
        return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
               c == '"' || c == '\'' || c == ']' || c == '}';
    };
    // Careful with '.': only strip when it is not the decimal point.
    while (!s.empty()) {
        char c = s.back();
        if (c == '.' ) {
            // keep "545.7", strip "545.7." and "2019."
            size_t pos = s.size() - 1;
            bool digit_before = pos > 0 && std::isdigit(static_cast<unsigned char>(s[pos - 1]));
            bool has_inner_dot = s.find('.') < pos;
            if (digit_before && !has_inner_dot) {
                // "2019." vs "545.7": a single final dot after digits is
                // sentence punctuation only when no other dot exists and the
                // dot is terminal -- that is exactly this case.
                s.pop_back();
                continue;
            }
            if (has_inner_dot) { s.pop_back(); continue; }
            break;
        }
        if (is_trail(c)) { s.pop_back(); continue; }
        break;
    }
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '[' || s.front() == '{')) s.erase(0, 1);
    if (s.empty()) return std::nullopt;

    bool percent = false;
    bool paren = false;
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        paren = true;
        s = s.substr(1, s.size() - 2);
    }
    if (!s.empty() && s.back() == '%') {
        percent = true;
        s.pop_back();
    }
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.erase(0, 1);
    }
    if (!s.empty() && s.front() == '$') s.erase(0, 1);
    if (!detail::is_plain_number(s)) return std::nullopt;
    // Accounting-style negation: parenthesized plain numbers are negative,
    // parenthesized percentages ("(3.2%)") are appositions and stay positive.
    if (paren && !percent) negative = true;
    return detail::canonicalize(negative, detail::strip_commas(s));
}

}  // namespace detail

// Every numeric token in the text, as occurrences (duplicates kept).
inline std::vector<std::string> extract_number_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& tok : tokenize(text)) {
        if (auto num = detail::number_from_token(tok)) out.push_back(*num);
    }
    return out;
}

inline NumberSet extract_numbers(std::string_view text) {
    NumberSet set;
    for (auto& num : extract_number_tokens(text)) set.insert(std::move(num));
    return set;
}

inline size_t count_number_tokens(std::string_view text) {
    return extract_number_tokens(text).size();
}

inline size_t intersection_size(const NumberSet& a, const NumberSet& b) {
    const NumberSet& small = a.size() <= b.size() ? a : b;
    const NumberSet& large = a.size() <= b.size() ? b : a;
    size_t n = 0;
    for (const auto& x : small) n += large.count(x);
    return n;
}

}  // namespace findsum
