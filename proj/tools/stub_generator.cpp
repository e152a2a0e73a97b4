// Deterministic stand-in for a neural generator, speaking the line-delimited
// JSON protocol. Useful for pipeline tests and dry runs without a model:
//
//   kind "summarize":  echoes the first max_len words of the input
//   kind "tuple2text": renders each " , "-separated tuple as one sentence
//
// Flags exercise failure paths: --fail (exit nonzero immediately), --error
// (error responses), --garbage (non-JSON output), --sleep-ms N (slow replies).

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

std::vector<std::string> words_of(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::string take_words(const std::string& s, size_t n) {
    auto ws = words_of(s);
    std::string out;
    for (size_t i = 0; i < ws.size() && i < n; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += ws[i];
    }
    return out;
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
    return parts;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::string tuple2text(const std::string& input) {
    std::string out;
    for (const auto& tuple : split_on(input, " , ")) {
        auto fields = split_on(tuple, " | ");
        std::string row = fields.size() > 0 ? trim(fields[0]) : "";
        std::string col = fields.size() > 1 ? trim(fields[1]) : "";
        std::string value = fields.size() > 2 ? trim(fields[2]) : "";
        std::string date = fields.size() > 3 ? trim(fields[3]) : "";
        if (row.empty() && value.empty()) continue;
        std::string sentence = row;
        if (!col.empty()) sentence += (sentence.empty() ? "" : " ") + col;
        sentence += (sentence.empty() ? "totaled " : " totaled ") + value;
        if (!date.empty()) sentence += " in " + date;
        sentence += ".";
        if (!out.empty()) out.push_back(' ');
        out += sentence;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    bool error_mode = false, garbage_mode = false;
    int sleep_ms = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--fail") return 2;
        if (arg == "--error") error_mode = true;
        if (arg == "--garbage") garbage_mode = true;
        if (arg == "--sleep-ms" && i + 1 < argc) sleep_ms = std::stoi(argv[++i]);
    }
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        if (sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
        if (garbage_mode) {
            std::cout << "this is not json\n" << std::flush;
            continue;
        }
        json req = json::parse(line, nullptr, false);
        if (req.is_discarded()) {
            std::cout << json{{"id", -1}, {"error", "bad request"}}.dump() << "\n" << std::flush;
            continue;
        }
        int id = req.value("id", -1);
        if (error_mode) {
            std::cout << json{{"id", id}, {"error", "stub error"}}.dump() << "\n" << std::flush;
            continue;
        }
        std::string kind = req.value("kind", "summarize");
        std::string input = req.value("input", "");
        int max_len = 0;
        if (req.contains("hints") && req["hints"].is_object())
            max_len = req["hints"].value("max_len", 0);
        std::string output;
        if (kind == "tuple2text")
            output = tuple2text(input);
        else
            output = take_words(input, max_len > 0 ? static_cast<size_t>(max_len) : 24);
        std::cout << json{{"id", id}, {"output", output}}.dump() << "\n" << std::flush;
    }
    return 0;
}
