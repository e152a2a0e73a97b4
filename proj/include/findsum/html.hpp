#pragma once

// Tolerant HTML reader for report filings. This is not a DOM: the output is a
// flat stream of text blocks and tables in source order, which is all the
// ingest layer needs. Broken markup is recovered best-effort: unknown tags
// are treated as inline, unclosed tags never error, attribute junk is skipped.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "findsum/text.hpp"

namespace findsum {

struct RawTable {
    std::string caption;
    std::vector<std::vector<std::string>> rows;  // colspan-expanded cell text
};

struct HtmlBlock {
    std::string text;                   // empty when this block is a table
    std::optional<RawTable> table;
};

struct HtmlDocument {
    std::vector<HtmlBlock> blocks;
    std::map<std::string, std::string> meta;  // <meta name= content=>
};

namespace htmldetail {

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline const std::unordered_map<std::string, std::string>& named_entities() {
    static const std::unordered_map<std::string, std::string> kEntities = {
        {"amp", "&"},    {"lt", "<"},     {"gt", ">"},      {"quot", "\""},
        {"apos", "'"},   {"nbsp", " "},   {"ndash", "-"},   {"mdash", "-"},
        {"minus", "-"},  {"lsquo", "'"},  {"rsquo", "'"},   {"ldquo", "\""},
        {"rdquo", "\""}, {"shy", ""},     {"bull", "*"},    {"middot", "*"},
        {"times", "x"},  {"copy", "(c)"}, {"reg", "(r)"},   {"trade", "(tm)"},
        {"sect", "S"},   {"para", "P"},   {"cent", "c"},    {"pound", "GBP"},
        {"euro", "EUR"}, {"plusmn", "+/-"}};
    return kEntities;
}

// Decodes &name; &#ddd; &#xhh; starting at s[i] (s[i]=='&'). Returns length
// consumed, 0 when it is not a well-formed entity.
inline size_t decode_entity(std::string_view s, size_t i, std::string& out) {
    size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) return 0;
    std::string_view body = s.substr(i + 1, semi - i - 1);
    if (body.empty()) return 0;
    if (body[0] == '#') {
        uint32_t cp = 0;
        bool ok = false;
        if (body.size() > 1 && (body[1] == 'x' || body[1] == 'X')) {
            for (size_t k = 2; k < body.size(); ++k) {
                if (!std::isxdigit(static_cast<unsigned char>(body[k]))) return 0;
                cp = cp * 16 + (std::isdigit(static_cast<unsigned char>(body[k]))
                                    ? body[k] - '0'
                                    : (std::tolower(body[k]) - 'a' + 10));
                ok = true;
            }
        } else {
            for (size_t k = 1; k < body.size(); ++k) {
                if (!std::isdigit(static_cast<unsigned char>(body[k]))) return 0;
                cp = cp * 10 + (body[k] - '0');
                ok = true;
            }
        }
        if (!ok || cp == 0 || cp > 0x10FFFF) return 0;
        if (cp == 160) cp = ' ';                       // nbsp
        if (cp == 0x2019 || cp == 0x2018) cp = '\'';   // curly quotes
        if (cp == 0x201C || cp == 0x201D) cp = '"';
        if (cp == 0x2013 || cp == 0x2014) cp = '-';
        append_utf8(out, cp);
        return semi - i + 1;
    }
    auto it = named_entities().find(to_lower(body));
    if (it == named_entities().end()) return 0;
    out += it->second;
    return semi - i + 1;
}

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size();) {
        if (s[i] == '&') {
            size_t used = decode_entity(s, i, out);
            if (used > 0) {
                i += used;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

inline bool is_block_tag(const std::string& tag) {
    static const std::unordered_set<std::string> kBlock = {
        "p",  "div", "br", "hr", "li", "ul", "ol", "h1", "h2", "h3", "h4",
        "h5", "h6",  "dt", "dd", "dl", "tr", "section", "article", "center",
        "blockquote", "pre", "body", "html", "head", "title", "form"};
    return kBlock.count(tag) > 0;
}

struct Attr {
    std::string name, value;
};

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    std::vector<Attr> attrs;
};

// Parses the tag starting at s[pos] ('<'); advances pos past '>'. Returns
// absent for stray '<' that does not open a tag.
inline std::optional<Tag> read_tag(std::string_view s, size_t& pos) {
    size_t i = pos + 1;
    const size_t n = s.size();
    if (i >= n) return std::nullopt;
    Tag tag;
    if (s[i] == '/') {
        tag.closing = true;
        ++i;
    }
    if (i >= n || !std::isalpha(static_cast<unsigned char>(s[i]))) return std::nullopt;
    while (i < n && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':'))
        tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++]))));
    // attributes
    while (i < n && s[i] != '>') {
        if (s[i] == '/' && i + 1 < n && s[i + 1] == '>') {
            tag.self_closing = true;
            i += 2;
            pos = i;
            return tag;
        }
        if (is_space(s[i])) {
            ++i;
            continue;
        }
        Attr a;
        while (i < n && !is_space(s[i]) && s[i] != '=' && s[i] != '>' && s[i] != '/')
            a.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++]))));
        while (i < n && is_space(s[i])) ++i;
        if (i < n && s[i] == '=') {
            ++i;
            while (i < n && is_space(s[i])) ++i;
            if (i < n && (s[i] == '"' || s[i] == '\'')) {
                char q = s[i++];
                while (i < n && s[i] != q) a.value.push_back(s[i++]);
                if (i < n) ++i;
            } else {
                while (i < n && !is_space(s[i]) && s[i] != '>') a.value.push_back(s[i++]);
            }
        }
        if (!a.name.empty()) tag.attrs.push_back(std::move(a));
    }
    if (i < n) ++i;  // consume '>'
    pos = i;
    return tag;
}

inline std::string attr_value(const Tag& tag, std::string_view name) {
    for (const auto& a : tag.attrs)
        if (a.name == name) return a.value;
    return {};
}

}  // namespace htmldetail

// Parses HTML into an ordered stream of text blocks and tables.
inline HtmlDocument parse_html(std::string_view html) {
    using namespace htmldetail;
    HtmlDocument doc;
    std::string cur;  // text of the block being accumulated

    auto flush_block = [&] {
        std::string text = normalize_ws(decode_entities(cur));
        cur.clear();
        if (!text.empty()) doc.blocks.push_back(HtmlBlock{std::move(text), std::nullopt});
    };

    // Table accumulation state; nested tables fold into the enclosing cell.
    int table_depth = 0;
    RawTable table;
    std::vector<std::pair<std::string, int>> row;  // cell text + colspan
    bool in_row = false, in_cell = false, in_caption = false;
    std::string cell, caption;

    auto close_cell = [&] {
        if (in_cell) {
            row.back().first = normalize_ws(decode_entities(cell));
            in_cell = false;
        }
        cell.clear();
    };
    auto close_row = [&] {
        close_cell();
        if (in_row) {
            std::vector<std::string> expanded;
            for (auto& [text, span] : row)
                for (int k = 0; k < std::max(1, span); ++k) expanded.push_back(text);
            if (!expanded.empty()) table.rows.push_back(std::move(expanded));
            row.clear();
            in_row = false;
        }
    };
    auto close_table = [&] {
        close_row();
        table.caption = normalize_ws(decode_entities(caption));
        doc.blocks.push_back(HtmlBlock{"", std::move(table)});
        table = RawTable{};
        caption.clear();
        in_caption = false;
    };

    const size_t n = html.size();
    size_t i = 0;
    while (i < n) {
        char c = html[i];
        if (c != '<') {
            if (in_caption)
                caption.push_back(c);
            else if (table_depth > 0 && in_cell)
                cell.push_back(c);
            else if (table_depth == 0)
                cur.push_back(c);
            ++i;
            continue;
        }
        // comments and doctype
        if (html.compare(i, 4, "<!--") == 0) {
            size_t end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (i + 1 < n && html[i + 1] == '!') {
            size_t end = html.find('>', i);
            i = end == std::string_view::npos ? n : end + 1;
            continue;
        }
        size_t tag_start = i;
        auto tag = read_tag(html, i);
        if (!tag) {  // stray '<'
            if (table_depth > 0 && in_cell)
                cell.push_back('<');
            else if (table_depth == 0)
                cur.push_back('<');
            i = tag_start + 1;
            continue;
        }
        const std::string& name = tag->name;
        // raw-text elements: skip to the matching close tag
        if (!tag->closing && (name == "script" || name == "style" || name == "title")) {
            std::string close = "</" + name;
            size_t end = i;
            while (end < n) {
                size_t cand = html.find('<', end);
                if (cand == std::string_view::npos) { end = n; break; }
                if (cand + close.size() <= n) {
                    bool match = true;
                    for (size_t k = 0; k < close.size(); ++k)
                        if (std::tolower(static_cast<unsigned char>(html[cand + k])) != close[k]) {
                            match = false;
                            break;
                        }
                    if (match) {
                        size_t gt = html.find('>', cand);
                        end = gt == std::string_view::npos ? n : gt + 1;
                        break;
                    }
                }
                end = cand + 1;
            }
            i = end;
            continue;
        }
        if (name == "meta" && !tag->closing) {
            std::string key = to_lower(attr_value(*tag, "name"));
            std::string value = attr_value(*tag, "content");
            if (!key.empty()) doc.meta[key] = normalize_ws(decode_entities(value));
            continue;
        }
        if (name == "table") {
            if (!tag->closing) {
                ++table_depth;
                if (table_depth == 1) flush_block();
                else if (in_cell) cell.push_back(' ');  // nested table folds into cell
            } else {
                if (table_depth == 1) close_table();
                else if (table_depth > 1 && in_cell) cell.push_back(' ');
                table_depth = std::max(0, table_depth - 1);
            }
            continue;
        }
        if (table_depth == 1) {
            if (name == "caption") {
                in_caption = !tag->closing;
                continue;
            }
            if (name == "tr") {
                close_row();
                if (!tag->closing) in_row = true;
                continue;
            }
            if (name == "td" || name == "th") {
                close_cell();
                if (!tag->closing) {
                    if (!in_row) in_row = true;  // tolerate missing <tr>
                    int span = 1;
                    std::string s = attr_value(*tag, "colspan");
                    if (!s.empty()) {
                        try { span = std::max(1, std::stoi(s)); } catch (...) { span = 1; }
                        span = std::min(span, 64);
                    }
                    row.emplace_back("", span);
                    in_cell = true;
                }
                continue;
            }
            // block tags inside a cell act as spaces
            if (in_cell && is_block_tag(name)) cell.push_back(' ');
            continue;
        }
        if (table_depth > 1) {
            if (in_cell && (name == "tr" || name == "td" || name == "th" || is_block_tag(name)))
                cell.push_back(' ');
            continue;
        }
        if (is_block_tag(name)) {
            flush_block();
            continue;
        }
        // inline tag: ensure adjacency does not glue words ("<b>a</b>b")
        // only when the markup carried separation; rely on source whitespace.
    }
    if (table_depth > 0) close_table();  // unclosed table at EOF
    flush_block();
    return doc;
}

}  // namespace findsum
