#pragma once

// JSON/JSONL/TSV serialization of the domain types. Field names mirror the
// struct fields one-to-one; JSONL records carry a "kind" discriminator plus
// the owning ids needed to reassemble a document from a flat file.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "findsum/corpus.hpp"
#include "findsum/errors.hpp"
#include "findsum/ingest.hpp"

namespace findsum {

using json = nlohmann::ordered_json;

inline json to_json(const TextSegment& s) {
    return json{{"segment_id", s.segment_id}, {"text", s.text}, {"word_count", s.word_count}};
}

inline TextSegment segment_from_json(const json& j) {
    TextSegment s;
    s.segment_id = j.at("segment_id").get<int>();
    s.text = j.at("text").get<std::string>();
    s.word_count = j.at("word_count").get<int>();
    return s;
}

inline json to_json(const Table& t) {
    json cells = json::array();
    for (const auto& row : t.cells) {
        json r = json::array();
        for (const auto& c : row) {
            if (c)
                r.push_back(*c);
            else
                r.push_back(nullptr);
        }
        cells.push_back(std::move(r));
    }
    json j{{"table_id", t.table_id},
           {"row_headers", t.row_headers},
           {"col_headers", t.col_headers},
           {"cells", cells}};
    if (t.detected_date)
        j["detected_date"] = *t.detected_date;
    else
        j["detected_date"] = nullptr;
    return j;
}

inline Table table_from_json(const json& j) {
    Table t;
    t.table_id = j.at("table_id").get<int>();
    t.row_headers = j.at("row_headers").get<std::vector<std::vector<std::string>>>();
    t.col_headers = j.at("col_headers").get<std::vector<std::vector<std::string>>>();
    for (const auto& row : j.at("cells")) {
        std::vector<std::optional<std::string>> r;
        for (const auto& c : row) {
            if (c.is_null())
                r.push_back(std::nullopt);
            else
                r.push_back(c.get<std::string>());
        }
        t.cells.push_back(std::move(r));
    }
    if (!j.at("detected_date").is_null()) t.detected_date = j.at("detected_date").get<std::string>();
    return t;
}

inline json to_json(const TableTuple& t) {
    return json{{"row_name", t.row_name}, {"col_name", t.col_name},
                {"cell_value", t.cell_value}, {"date", t.date},
                {"table_id", t.table_id}, {"row_id", t.row_id}, {"col_id", t.col_id}};
}

inline TableTuple tuple_from_json(const json& j) {
    TableTuple t;
    t.row_name = j.at("row_name").get<std::string>();
    t.col_name = j.at("col_name").get<std::string>();
    t.cell_value = j.at("cell_value").get<std::string>();
    t.date = j.at("date").get<std::string>();
    t.table_id = j.at("table_id").get<int>();
    t.row_id = j.at("row_id").get<int>();
    t.col_id = j.at("col_id").get<int>();
    return t;
}

inline json to_json(const ReportItem& item) {
    json segs = json::array(), tabs = json::array();
    for (const auto& s : item.segments) segs.push_back(to_json(s));
    for (const auto& t : item.tables) tabs.push_back(to_json(t));
    return json{{"item_id", item.item_id}, {"text", item.text},
                {"segments", segs}, {"tables", tabs}};
}

inline json to_json(const ReportDocument& doc) {
    json items = json::array();
    for (const auto& it : doc.items) items.push_back(to_json(it));
    return json{{"doc_id", doc.doc_id}, {"company_id", doc.company_id},
                {"filing_date", doc.filing_date}, {"items", items}};
}

inline ReportDocument document_from_json(const json& j) {
    ReportDocument doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.company_id = j.at("company_id").get<std::string>();
    doc.filing_date = j.at("filing_date").get<std::string>();
    for (const auto& ji : j.at("items")) {
        ReportItem item;
        item.item_id = ji.at("item_id").get<std::string>();
        item.text = ji.at("text").get<std::string>();
        for (const auto& js : ji.at("segments")) item.segments.push_back(segment_from_json(js));
        for (const auto& jt : ji.at("tables")) item.tables.push_back(table_from_json(jt));
        doc.items.push_back(std::move(item));
    }
    return doc;
}

// --- JSONL document records --------------------------------------------------

// One JSON-lines file per document; record kinds item/segment/table/tuple.
inline std::string document_to_jsonl(const ReportDocument& doc,
                                     const std::vector<TableTuple>& tuples) {
    std::ostringstream out;
    for (const auto& item : doc.items) {
        json j{{"kind", "item"},
               {"doc_id", doc.doc_id},
               {"company_id", doc.company_id},
               {"filing_date", doc.filing_date},
               {"item_id", item.item_id},
               {"text", item.text}};
        out << j.dump() << "\n";
        for (const auto& s : item.segments) {
            json js = to_json(s);
            js["kind"] = "segment";
            js["doc_id"] = doc.doc_id;
            js["item_id"] = item.item_id;
            out << js.dump() << "\n";
        }
        for (const auto& t : item.tables) {
            json jt = to_json(t);
            jt["kind"] = "table";
            jt["doc_id"] = doc.doc_id;
            jt["item_id"] = item.item_id;
            out << jt.dump() << "\n";
        }
    }
    for (const auto& t : tuples) {
        json jt = to_json(t);
        jt["kind"] = "tuple";
        jt["doc_id"] = doc.doc_id;
        out << jt.dump() << "\n";
    }
    return out.str();
}

struct ParsedDocumentFile {
    ReportDocument doc;
    std::vector<TableTuple> tuples;
};

inline ParsedDocumentFile document_from_jsonl(std::istream& in) {
    ParsedDocumentFile out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "item") {
            out.doc.doc_id = j.at("doc_id").get<std::string>();
            out.doc.company_id = j.at("company_id").get<std::string>();
            out.doc.filing_date = j.at("filing_date").get<std::string>();
            ReportItem item;
            item.item_id = j.at("item_id").get<std::string>();
            item.text = j.at("text").get<std::string>();
            out.doc.items.push_back(std::move(item));
        } else if (kind == "segment") {
            if (out.doc.items.empty()) throw IoError("segment record before item record");
            std::string item_id = j.at("item_id").get<std::string>();
            for (auto& item : out.doc.items)
                if (item.item_id == item_id) {
                    item.segments.push_back(segment_from_json(j));
                    break;
                }
        } else if (kind == "table") {
            std::string item_id = j.at("item_id").get<std::string>();
            for (auto& item : out.doc.items)
                if (item.item_id == item_id) {
                    item.tables.push_back(table_from_json(j));
                    break;
                }
        } else if (kind == "tuple") {
            out.tuples.push_back(tuple_from_json(j));
        } else {
            throw IoError("unknown record kind: " + kind);
        }
    }
    return out;
}

// 7-column TSV in field order; embedded tabs/newlines inside fields collapse
// to spaces so the column structure survives.
inline std::string tuples_to_tsv(const std::vector<TableTuple>& tuples) {
    std::ostringstream out;
    auto field = [](const std::string& s) {
        std::string f = s;
        for (char& c : f)
            if (c == '\t' || c == '\n' || c == '\r') c = ' ';
        return f;
    };
    for (const auto& t : tuples) {
        out << field(t.row_name) << '\t' << field(t.col_name) << '\t' << field(t.cell_value)
            << '\t' << field(t.date) << '\t' << t.table_id << '\t' << t.row_id << '\t'
            << t.col_id << "\n";
    }
    return out.str();
}

// --- corpus records --------------------------------------------------------------

inline json to_json(const Example& e) {
    json segs = json::array(), tups = json::array();
    for (const auto& s : e.input_segments) segs.push_back(to_json(s));
    for (const auto& t : e.input_tuples) tups.push_back(to_json(t));
    return json{{"example_id", e.example_id},
                {"company_id", e.company_id},
                {"input_segments", segs},
                {"input_tuples", tups},
                {"target_roo", e.target_roo},
                {"target_liquidity", e.target_liquidity}};
}

inline Example example_from_json(const json& j) {
    Example e;
    e.example_id = j.at("example_id").get<std::string>();
    e.company_id = j.at("company_id").get<std::string>();
    for (const auto& js : j.at("input_segments")) e.input_segments.push_back(segment_from_json(js));
    for (const auto& jt : j.at("input_tuples")) e.input_tuples.push_back(tuple_from_json(jt));
    e.target_roo = j.at("target_roo").get<std::string>();
    e.target_liquidity = j.at("target_liquidity").get<std::string>();
    return e;
}

inline std::string examples_to_jsonl(const std::vector<Example>& examples) {
    std::ostringstream out;
    for (const auto& e : examples) out << to_json(e).dump() << "\n";
    return out.str();
}

inline std::vector<Example> examples_from_jsonl(std::istream& in) {
    std::vector<Example> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(example_from_json(json::parse(line)));
    }
    return out;
}

inline json to_json(const CorpusSplit& s) {
    return json{{"train", s.train}, {"val", s.val}, {"test", s.test}, {"seed", s.seed}};
}

inline CorpusSplit split_from_json(const json& j) {
    CorpusSplit s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.seed = j.at("seed").get<uint64_t>();
    return s;
}

inline json to_json(const DatasetStats& s) {
    return json{{"pairs", s.pairs},
                {"avg_doc_words", s.avg_doc_words},
                {"avg_doc_sents", s.avg_doc_sents},
                {"avg_sum_words", s.avg_sum_words},
                {"avg_sum_sents", s.avg_sum_sents},
                {"avg_sum_nums", s.avg_sum_nums},
                {"pct_covered_num", s.pct_covered_num},
                {"frag_coverage", s.frag_coverage},
                {"frag_density", s.frag_density},
                {"novel_ngram_pct",
                 {s.novel_ngram_pct[0], s.novel_ngram_pct[1], s.novel_ngram_pct[2],
                  s.novel_ngram_pct[3]}}};
}

// --- generic file helpers ------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace findsum
