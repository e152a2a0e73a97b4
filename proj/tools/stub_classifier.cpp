// Minimal external classifier speaking the stdin/stdout protocol:
// {"features":[...]} -> {"proba":p}. The probability is a fixed logistic over
// the feature sum, which keeps it deterministic for tests and demonstrates how
// to plug an out-of-process model (e.g. a boosted-tree classifier) into the
// tuple selection stage.

#include <cmath>
#include <iostream>
#include <string>

#include <json.hpp>

using nlohmann::json;

int main() {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json req = json::parse(line, nullptr, false);
        if (req.is_discarded() || !req.contains("features")) {
            std::cout << json{{"proba", 0.0}}.dump() << "\n" << std::flush;
            continue;
        }
        double sum = 0.0;
        for (const auto& v : req["features"]) sum += v.get<double>();
        double proba = 1.0 / (1.0 + std::exp(-sum));
        std::cout << json{{"proba", proba}}.dump() << "\n" << std::flush;
    }
    return 0;
}
