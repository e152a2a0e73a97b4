#pragma once

// Filing ingestion: one report HTML file -> structured document model with
// per-item text, tables lifted out behind placeholder tokens, and table cells
// flattened into 7-field tuples.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "findsum/errors.hpp"
#include "findsum/html.hpp"
#include "findsum/numbers.hpp"
#include "findsum/text.hpp"

namespace findsum {

struct TextSegment {
    int segment_id = 0;  // 0-based within its item
    std::string text;
    int word_count = 0;
};

struct Table {
    int table_id = 0;  // 0-based within the document
    std::vector<std::vector<std::string>> row_headers;  // one path per data row
    std::vector<std::vector<std::string>> col_headers;  // one path per data column
    std::vector<std::vector<std::optional<std::string>>> cells;
    std::optional<std::string> detected_date;
};

struct TableTuple {
    std::string row_name;
    std::string col_name;
    std::string cell_value;  // "<original> & <rounded>" when numeric
    std::string date;
    int table_id = 0;
    int row_id = 0;
    int col_id = 0;
};

struct ReportItem {
    std::string item_id;  // e.g. "item7"
    std::string text;     // cleaned, newline-separated blocks, with placeholders
    std::vector<TextSegment> segments;
    std::vector<Table> tables;
};

struct ReportDocument {
    std::string doc_id;
    std::string company_id;
    std::string filing_date;  // ISO-8601 when known, else empty
    std::vector<ReportItem> items;
};

struct IngestConfig {
    int max_segment_words = 1000;
    double rounding_divisor = 1000.0;
};

inline std::string placeholder_token(int table_id) {
    return "[TABLE_" + std::to_string(table_id) + "]";
}

namespace ingestdetail {

// "item" + number (+ optional letter) at block start, case-insensitive, and
// short enough to be a heading rather than a cross-reference paragraph.
inline std::optional<std::string> item_heading_id(std::string_view block) {
    std::string s = trim(block);
    if (s.size() < 6) return std::nullopt;
    std::string low = to_lower(std::string_view(s).substr(0, 4));
    if (low != "item") return std::nullopt;
    size_t i = 4;
    if (!is_space(s[i])) return std::nullopt;
    while (i < s.size() && is_space(s[i])) ++i;
    size_t d = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == d) return std::nullopt;
    std::string id = "item" + std::string(s.substr(d, i - d));
    if (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) {
        id.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
        ++i;
    }
    if (i < s.size() && !is_space(s[i]) && s[i] != '.' && s[i] != ':' && s[i] != ')' &&
        s[i] != ',' && s[i] != '-')
        return std::nullopt;  // "item7x9" or similar junk
    if (word_count(s) > 25) return std::nullopt;
    return id;
}

// Removes style runs: >=4 repeats of the same non-alphanumeric, non-space char.
inline std::string strip_style_runs(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        size_t j = i;
        while (j < s.size() && s[j] == c) ++j;
        size_t run = j - i;
        bool style = run >= 4 && !std::isalnum(static_cast<unsigned char>(c)) && !is_space(c);
        if (!style)
            out.append(run, c);
        i = j;
    }
    return out;
}

inline bool is_junk_cell(const std::string& s) {
    if (s.empty()) return true;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) return false;
        if (c != '$' && c != '%' && c != '-' && c != '*' && c != '(' && c != ')' &&
            c != ' ' && c != '.' && c != ',' && !(static_cast<unsigned char>(c) & 0x80))
            return false;
    }
    // pure punctuation / currency / dash decoration
    return s.find_first_of("0123456789") == std::string::npos;
}

inline std::optional<std::string> find_year(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        if (j - i == 4) {
            int year = std::stoi(std::string(s.substr(i, 4)));
            if (year >= 1900 && year <= 2099) return std::string(s.substr(i, 4));
        }
        i = j;
    }
    return std::nullopt;
}

// Structures a raw cell grid: caption rows, column-header rows, row-label
// hierarchy, and the data cell region.
inline Table build_table(const RawTable& raw, int table_id) {
    Table t;
    t.table_id = table_id;

    // Rectangularize and drop decoration-only rows/columns.
    std::vector<std::vector<std::string>> grid;
    size_t width = 0;
    for (const auto& r : raw.rows) width = std::max(width, r.size());
    for (const auto& r : raw.rows) {
        std::vector<std::string> row = r;
        row.resize(width);
        bool all_junk = true;
        for (const auto& c : row)
            if (!is_junk_cell(c)) { all_junk = false; break; }
        if (!all_junk) grid.push_back(std::move(row));
    }
    if (!grid.empty()) {
        std::vector<bool> keep_col(width, false);
        for (size_t j = 0; j < width; ++j)
            for (const auto& row : grid)
                if (!is_junk_cell(row[j])) { keep_col[j] = true; break; }
        std::vector<std::vector<std::string>> pruned;
        for (const auto& row : grid) {
            std::vector<std::string> out;
            for (size_t j = 0; j < width; ++j)
                if (keep_col[j]) out.push_back(row[j]);
            pruned.push_back(std::move(out));
        }
        grid = std::move(pruned);
        width = grid.empty() ? 0 : grid[0].size();
    }

    std::string caption = raw.caption;
    size_t r = 0;
    // Leading caption rows: text starts in the label column and every
    // non-empty cell repeats it (a colspan-expanded spanning row). Header
    // rows never qualify since their label cell is empty.
    while (r < grid.size() && width > 1) {
        const auto& row = grid[r];
        if (row[0].empty()) break;
        bool uniform = true;
        for (const auto& c : row)
            if (!c.empty() && c != row[0]) { uniform = false; break; }
        if (!uniform) break;
        // require a following row so a caption cannot swallow the whole table
        if (r + 1 >= grid.size()) break;
        if (!caption.empty()) caption += " ";
        caption += row[0];
        ++r;
    }
    // Column-header rows: leading rows with an empty label cell.
    size_t header_begin = r;
    while (r < grid.size() && width > 1 && grid[r][0].empty()) ++r;
    size_t header_end = r;

    // Label column: present when most data rows carry non-numeric label text.
    size_t labeled = 0, data_rows = 0;
    for (size_t k = header_end; k < grid.size(); ++k) {
        ++data_rows;
        const std::string& c0 = grid[k][0];
        if (!c0.empty() && !parse_report_number(c0)) ++labeled;
    }
    bool has_label_col = width > 1 && data_rows > 0 && labeled * 2 >= data_rows;
    size_t data_col0 = has_label_col ? 1 : 0;
    size_t ncols = width - data_col0;

    for (size_t j = data_col0; j < width; ++j) {
        std::vector<std::string> path;
        for (size_t k = header_begin; k < header_end; ++k)
            if (!grid[k][j].empty()) path.push_back(grid[k][j]);
        t.col_headers.push_back(std::move(path));
    }

    std::vector<std::string> prefix;
    bool prefix_fresh = false;  // true while accumulating consecutive section rows
    for (size_t k = header_end; k < grid.size(); ++k) {
        const auto& row = grid[k];
        std::string label = has_label_col ? row[0] : std::string();
        bool has_data = false;
        for (size_t j = data_col0; j < width; ++j)
            if (!row[j].empty()) { has_data = true; break; }
        if (has_label_col && !label.empty() && !has_data) {
            // Section row: starts or extends the row-name prefix.
            if (!prefix_fresh) prefix.clear();
            prefix.push_back(label);
            prefix_fresh = true;
            continue;
        }
        prefix_fresh = false;
        std::vector<std::string> path = prefix;
        if (!label.empty()) path.push_back(label);
        t.row_headers.push_back(std::move(path));
        std::vector<std::optional<std::string>> cells;
        for (size_t j = data_col0; j < width; ++j) {
            if (row[j].empty())
                cells.push_back(std::nullopt);
            else
                cells.push_back(row[j]);
        }
        cells.resize(ncols);
        t.cells.push_back(std::move(cells));
    }
    if (t.cells.empty()) {
        t.col_headers.clear();  // keep dimensions consistent for empty tables
    }

    if (auto y = find_year(caption))
        t.detected_date = *y;
    else {
        for (size_t k = header_begin; k < header_end && !t.detected_date; ++k)
            for (const auto& c : grid[k])
                if (auto y2 = find_year(c)) { t.detected_date = *y2; break; }
    }
    return t;
}

inline bool utf8_valid(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > s.size()) return false;
        for (size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
        i += len;
    }
    return true;
}

inline std::string latin1_to_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (c < 0x80)
            out.push_back(static_cast<char>(c));
        else
            htmldetail::append_utf8(out, c);
    }
    return out;
}

}  // namespace ingestdetail

// Normalizes raw text the way item text is stored: content before the first
// item heading removed, style runs stripped, horizontal whitespace collapsed,
// newlines kept as single block separators.
inline std::string clean_text(std::string_view raw) {
    std::vector<std::string> lines;
    size_t start = 0;
    for (size_t i = 0; i <= raw.size(); ++i) {
        if (i == raw.size() || raw[i] == '\n') {
            lines.emplace_back(raw.substr(start, i - start));
            start = i + 1;
        }
    }
    size_t first_item = 0;
    bool found = false;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string stripped = normalize_ws(ingestdetail::strip_style_runs(lines[i]));
        if (ingestdetail::item_heading_id(stripped)) {
            first_item = i;
            found = true;
            break;
        }
    }
    std::string out;
    for (size_t i = found ? first_item : 0; i < lines.size(); ++i) {
        std::string block = normalize_ws(ingestdetail::strip_style_runs(lines[i]));
        if (block.empty()) continue;
        if (!out.empty()) out.push_back('\n');
        out += block;
    }
    return out;
}

// Greedy sentence packing. Lossless: concatenating the segments reproduces the
// input modulo whitespace; an over-long sentence becomes its own segment.
inline std::vector<TextSegment> segment_text(std::string_view item_text, int max_words) {
    std::vector<TextSegment> segments;
    if (max_words < 1) max_words = 1;
    std::string cur;
    int cur_words = 0;
    auto flush = [&] {
        if (cur_words > 0) {
            segments.push_back(TextSegment{static_cast<int>(segments.size()), cur, cur_words});
        }
        cur.clear();
        cur_words = 0;
    };
    for (const auto& sentence : split_sentences(item_text)) {
        int words = static_cast<int>(word_count(sentence));
        if (words == 0) continue;
        if (cur_words > 0 && cur_words + words > max_words) flush();
        if (!cur.empty()) cur.push_back(' ');
        cur += sentence;
        cur_words += words;
        if (cur_words >= max_words) flush();
    }
    flush();
    return segments;
}

inline std::string strip_placeholders(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 7, "[TABLE_") == 0) {
            size_t close = text.find(']', i + 7);
            if (close != std::string_view::npos) {
                bool digits = close > i + 7;
                for (size_t k = i + 7; k < close && digits; ++k)
                    if (!std::isdigit(static_cast<unsigned char>(text[k]))) digits = false;
                if (digits) {
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

// Parses one filing. Tolerant of broken markup; throws UnreadableInput for
// binary input and NoItemsFound when no item heading is detected.
inline ReportDocument parse_filing(std::string_view bytes, std::string doc_id,
                                   const IngestConfig& config = {}) {
    using namespace ingestdetail;
    if (bytes.find('\0') != std::string_view::npos)
        throw UnreadableInput("input contains NUL bytes: " + doc_id);
    std::string utf8;
    if (utf8_valid(bytes))
        utf8.assign(bytes);
    else
        utf8 = latin1_to_utf8(bytes);

    HtmlDocument html = parse_html(utf8);

    ReportDocument doc;
    doc.doc_id = doc_id;
    if (auto it = html.meta.find("company"); it != html.meta.end()) {
        doc.company_id = it->second;
    } else {
        size_t us = doc_id.rfind('_');
        doc.company_id = us == std::string::npos ? doc_id : doc_id.substr(0, us);
    }
    if (auto it = html.meta.find("filing-date"); it != html.meta.end())
        doc.filing_date = it->second;

    // Route blocks into item drafts; a repeated item id (TOC then body)
    // replaces the earlier, emptier occurrence.
    struct Draft {
        std::string id;
        std::vector<std::variant<std::string, RawTable>> parts;
    };
    std::vector<Draft> drafts;
    int open = -1;
    for (const auto& block : html.blocks) {
        if (!block.table) {
            std::string text = normalize_ws(strip_style_runs(block.text));
            if (text.empty()) continue;
            if (auto id = item_heading_id(text)) {
                for (size_t k = 0; k < drafts.size(); ++k) {
                    if (drafts[k].id == *id) {
                        drafts.erase(drafts.begin() + static_cast<long>(k));
                        break;
                    }
                }
                drafts.push_back(Draft{*id, {}});
                open = static_cast<int>(drafts.size()) - 1;
                drafts[open].parts.emplace_back(text);
                continue;
            }
            if (open >= 0) drafts[open].parts.emplace_back(std::move(text));
        } else if (open >= 0) {
            drafts[open].parts.emplace_back(*block.table);
        }
    }
    if (drafts.empty()) throw NoItemsFound("no item headings detected: " + doc_id);

    int next_table_id = 0;
    for (auto& draft : drafts) {
        ReportItem item;
        item.item_id = draft.id;
        std::string text;
        for (auto& part : draft.parts) {
            std::string block;
            if (std::holds_alternative<std::string>(part)) {
                block = std::get<std::string>(part);
            } else {
                Table t = build_table(std::get<RawTable>(part), next_table_id);
                block = placeholder_token(next_table_id);
                ++next_table_id;
                item.tables.push_back(std::move(t));
            }
            if (block.empty()) continue;
            if (!text.empty()) text.push_back('\n');
            text += block;
        }
        item.text = std::move(text);
        item.segments = segment_text(strip_placeholders(item.text), config.max_segment_words);
        doc.items.push_back(std::move(item));
    }
    return doc;
}

// Flattens every non-empty data cell into a tuple. Hierarchical header paths
// join with " & "; numeric cells carry "<original> & <rounded>".
inline std::vector<TableTuple> extract_tuples(const ReportDocument& doc,
                                              double rounding_divisor = 1000.0,
                                              int* unnamed_warnings = nullptr) {
    std::vector<TableTuple> tuples;
    auto join_path = [](const std::vector<std::string>& path) {
        std::string out;
        for (const auto& p : path) {
            if (!out.empty()) out += " & ";
            out += p;
        }
        return out;
    };
    auto sanitize = [](std::string s) {
        // Keep the " & " separator reserved for numeric original/rounded pairs.
        size_t pos = 0;
        while ((pos = s.find(" & ", pos)) != std::string::npos) s.replace(pos, 3, " and ");
        return s;
    };
    for (const auto& item : doc.items) {
        for (const auto& table : item.tables) {
            for (size_t r = 0; r < table.cells.size(); ++r) {
                for (size_t c = 0; c < table.cells[r].size(); ++c) {
                    const auto& cell = table.cells[r][c];
                    if (!cell || cell->empty()) continue;
                    TableTuple tup;
                    tup.table_id = table.table_id;
                    tup.row_id = static_cast<int>(r);
                    tup.col_id = static_cast<int>(c);
                    tup.row_name = r < table.row_headers.size() ? join_path(table.row_headers[r]) : "";
                    tup.col_name = c < table.col_headers.size() ? join_path(table.col_headers[c]) : "";
                    if (tup.row_name.empty() && tup.col_name.empty() && unnamed_warnings)
                        ++*unnamed_warnings;
                    std::string raw = trim(*cell);
                    if (auto rounded = round_cell_value(raw, rounding_divisor))
                        tup.cell_value = raw + " & " + *rounded;
                    else
                        tup.cell_value = sanitize(raw);
                    if (c < table.col_headers.size()) {
                        for (const auto& part : table.col_headers[c]) {
                            if (auto y = ingestdetail::find_year(part)) {
                                tup.date = *y;
                                break;
                            }
                        }
                    }
                    if (tup.date.empty() && table.detected_date) tup.date = *table.detected_date;
                    tuples.push_back(std::move(tup));
                }
            }
        }
    }
    return tuples;
}

}  // namespace findsum
