#pragma once

// Salient-tuple selection as binary classification. A tuple is salient when
// its original or rounded value appears in the target summary's number set.
// Features are positional (row/col/table/section indexes, raw + normalized)
// plus optional mean word vectors and one-hot frequent-name indicators. The
// built-in learner is full-batch logistic regression; anything stronger runs
// out of process behind the classifier protocol.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "findsum/corpus.hpp"
#include "findsum/errors.hpp"
#include "findsum/generator.hpp"
#include "findsum/ingest.hpp"
#include "findsum/numbers.hpp"

namespace findsum {

struct LabeledTuple {
    TableTuple tuple;
    bool salient = false;
};

struct VectorTable {
    int dim = 0;
    std::map<std::string, std::vector<double>> vectors;
};

// Plain-text vector format: token then d floats per line.
inline VectorTable load_vector_table(std::istream& in) {
    VectorTable table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        std::string token;
        row >> token;
        std::vector<double> vec;
        double v;
        while (row >> v) vec.push_back(v);
        if (vec.empty()) throw DimensionMismatch("vector line without values: line " +
                                                 std::to_string(lineno));
        if (table.dim == 0) table.dim = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != table.dim)
            throw DimensionMismatch("vector dimension " + std::to_string(vec.size()) +
                                    " != " + std::to_string(table.dim) + " at line " +
                                    std::to_string(lineno));
        table.vectors[to_lower(token)] = std::move(vec);
    }
    return table;
}

struct TupleFeatureConfig {
    bool use_positional = true;
    bool use_embedding = false;
    bool use_onehot = false;
    std::vector<std::string> onehot_phrases;  // learned: top-K salient names
};

struct TupleFeatures {
    std::vector<double> values;
};

// Per-document maxima and table->item mapping used for normalization.
struct DocContext {
    int max_row_id = 0, max_col_id = 0, max_table_id = 0, max_section_index = 0;
    std::map<int, int> table_section;  // table_id -> ordinal of the owning item

    static DocContext from_document(const ReportDocument& doc) {
        DocContext ctx;
        for (size_t s = 0; s < doc.items.size(); ++s) {
            for (const auto& t : doc.items[s].tables) {
                ctx.table_section[t.table_id] = static_cast<int>(s);
                ctx.max_table_id = std::max(ctx.max_table_id, t.table_id);
                ctx.max_row_id =
                    std::max(ctx.max_row_id, static_cast<int>(t.cells.size()) - 1);
                for (const auto& row : t.cells)
                    ctx.max_col_id =
                        std::max(ctx.max_col_id, static_cast<int>(row.size()) - 1);
            }
        }
        ctx.max_section_index = std::max(0, static_cast<int>(doc.items.size()) - 1);
        return ctx;
    }

    // Fallback when only tuples are available: sections default to 0.
    static DocContext from_tuples(const std::vector<TableTuple>& tuples) {
        DocContext ctx;
        for (const auto& t : tuples) {
            ctx.max_row_id = std::max(ctx.max_row_id, t.row_id);
            ctx.max_col_id = std::max(ctx.max_col_id, t.col_id);
            ctx.max_table_id = std::max(ctx.max_table_id, t.table_id);
        }
        return ctx;
    }

    int section_of(int table_id) const {
        auto it = table_section.find(table_id);
        return it == table_section.end() ? 0 : it->second;
    }
};

inline size_t feature_dim(const TupleFeatureConfig& config, const VectorTable* vectors) {
    size_t d = 0;
    if (config.use_positional) d += 8;
    if (config.use_embedding) {
        if (!vectors) throw DimensionMismatch("embedding features need a vector table");
        d += static_cast<size_t>(vectors->dim);
    }
    if (config.use_onehot) d += config.onehot_phrases.size();
    return d;
}

inline TupleFeatures featurize(const TableTuple& tuple, const DocContext& ctx,
                               const VectorTable* vectors, const TupleFeatureConfig& config) {
    TupleFeatures f;
    auto norm = [](int v, int max) { return max > 0 ? double(v) / double(max) : 0.0; };
    if (config.use_positional) {
        int section = ctx.section_of(tuple.table_id);
        f.values.insert(f.values.end(),
                        {double(tuple.row_id), norm(tuple.row_id, ctx.max_row_id),
                         double(tuple.col_id), norm(tuple.col_id, ctx.max_col_id),
                         double(tuple.table_id), norm(tuple.table_id, ctx.max_table_id),
                         double(section), norm(section, ctx.max_section_index)});
    }
    if (config.use_embedding) {
        if (!vectors) throw DimensionMismatch("embedding features need a vector table");
        std::vector<double> mean(static_cast<size_t>(vectors->dim), 0.0);
        auto toks = tokenize_lower(tuple.row_name + " " + tuple.col_name);
        if (!toks.empty()) {
            for (const auto& t : toks) {
                auto it = vectors->vectors.find(t);
                if (it == vectors->vectors.end()) continue;  // OOV = zero vector
                for (size_t k = 0; k < mean.size(); ++k) mean[k] += it->second[k];
            }
            for (auto& v : mean) v /= static_cast<double>(toks.size());
        }
        f.values.insert(f.values.end(), mean.begin(), mean.end());
    }
    if (config.use_onehot) {
        std::string row = to_lower(tuple.row_name), col = to_lower(tuple.col_name);
        for (const auto& phrase : config.onehot_phrases)
            f.values.push_back(phrase == row || phrase == col ? 1.0 : 0.0);
    }
    return f;
}

// Value-match labeling: salient iff the tuple's original or rounded value is
// in the target summary's number set. Non-numeric tuples are never salient.
inline std::vector<LabeledTuple> label_tuples(const std::vector<TableTuple>& tuples,
                                              const std::string& target_summary) {
    NumberSet target = extract_numbers(target_summary);
    std::vector<LabeledTuple> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) {
        LabeledTuple lt;
        lt.tuple = t;
        size_t sep = t.cell_value.find(" & ");
        if (sep != std::string::npos) {
            auto original = parse_report_number(t.cell_value.substr(0, sep));
            auto rounded = parse_report_number(t.cell_value.substr(sep + 3));
            lt.salient = (original && target.count(original->normalized)) ||
                         (rounded && target.count(rounded->normalized));
        }
        out.push_back(std::move(lt));
    }
    return out;
}

// Keep mask: every positive kept; negatives sampled uniformly without
// replacement down to ratio x positives, deterministic per seed.
inline std::vector<bool> undersample_keep_mask(const std::vector<bool>& salient,
                                               size_t ratio, uint64_t seed) {
    size_t positives = 0;
    std::vector<size_t> negative_idx;
    for (size_t i = 0; i < salient.size(); ++i) {
        if (salient[i])
            ++positives;
        else
            negative_idx.push_back(i);
    }
    size_t quota = ratio * positives;
    std::vector<bool> keep(salient.size(), true);
    if (negative_idx.size() > quota) {
        std::mt19937_64 rng(seed);
        for (size_t i = negative_idx.size(); i > 1; --i)
            std::swap(negative_idx[i - 1], negative_idx[rng() % i]);
        for (size_t k = quota; k < negative_idx.size(); ++k) keep[negative_idx[k]] = false;
    }
    return keep;
}

// Keep every positive; sample negatives uniformly without replacement down to
// ratio x positives. Output preserves input order.
inline std::vector<LabeledTuple> undersample(const std::vector<LabeledTuple>& labeled,
                                             size_t ratio = 10, uint64_t seed = 0) {
    std::vector<bool> salient(labeled.size());
    for (size_t i = 0; i < labeled.size(); ++i) salient[i] = labeled[i].salient;
    auto keep = undersample_keep_mask(salient, ratio, seed);
    std::vector<LabeledTuple> out;
    for (size_t i = 0; i < labeled.size(); ++i)
        if (keep[i]) out.push_back(labeled[i]);
    return out;
}

struct TrainConfig {
    double learning_rate = 0.5;
    int epochs = 300;
    double l2 = 1e-4;
    uint64_t seed = 0;
};

struct TupleClassifier {
    std::string kind = "logistic-regression";  // or "external"
    std::vector<double> weights;
    double bias = 0.0;
    TupleFeatureConfig feature_config;
    uint64_t seed = 0;
    std::string command;  // external only
    mutable std::shared_ptr<ExternalClassifierClient> external;

    double predict_proba(const std::vector<double>& features) const {
        if (kind == "external") {
            if (!external) external = std::make_shared<ExternalClassifierClient>(command);
            return external->predict_proba(features);
        }
        if (features.size() != weights.size())
            throw DimensionMismatch("feature size " + std::to_string(features.size()) +
                                    " != weight size " + std::to_string(weights.size()));
        double z = bias;
        for (size_t i = 0; i < features.size(); ++i) z += weights[i] * features[i];
        return 1.0 / (1.0 + std::exp(-z));
    }
};

namespace tupledetail {

inline double logistic_loss(const std::vector<std::vector<double>>& x,
                            const std::vector<bool>& y, const std::vector<double>& w,
                            double b, double l2) {
    double loss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double z = b;
        for (size_t k = 0; k < w.size(); ++k) z += w[k] * x[i][k];
        double p = 1.0 / (1.0 + std::exp(-z));
        p = std::min(1.0 - 1e-12, std::max(1e-12, p));
        loss -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    loss /= static_cast<double>(x.size());
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss + 0.5 * l2 * reg;
}

}  // namespace tupledetail

// Full-batch gradient descent on cross-entropy + L2, with step halving on any
// loss increase so the per-epoch loss is non-increasing.
inline TupleClassifier train_classifier(const std::vector<std::vector<double>>& features,
                                        const std::vector<bool>& labels,
                                        const TrainConfig& config = {},
                                        TupleFeatureConfig feature_config = {}) {
    if (features.size() != labels.size() || features.empty())
        throw DegenerateData("empty or misaligned training data");
    bool has_pos = false, has_neg = false;
    for (bool y : labels) (y ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw DegenerateData("training data has a single class");

    const size_t dim = features[0].size();
    for (const auto& row : features)
        if (row.size() != dim) throw DimensionMismatch("ragged feature matrix");

    TupleClassifier model;
    model.kind = "logistic-regression";
    model.feature_config = std::move(feature_config);
    model.seed = config.seed;
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;

    double lr = config.learning_rate;
    double prev_loss =
        tupledetail::logistic_loss(features, labels, model.weights, model.bias, config.l2);
    const double n = static_cast<double>(features.size());
    for (int epoch = 0; epoch < config.epochs && lr > 1e-12;) {
        std::vector<double> grad(dim, 0.0);
        double grad_b = 0.0;
        for (size_t i = 0; i < features.size(); ++i) {
            double z = model.bias;
            for (size_t k = 0; k < dim; ++k) z += model.weights[k] * features[i][k];
            double p = 1.0 / (1.0 + std::exp(-z));
            double err = p - (labels[i] ? 1.0 : 0.0);
            for (size_t k = 0; k < dim; ++k) grad[k] += err * features[i][k];
            grad_b += err;
        }
        std::vector<double> w_next = model.weights;
        for (size_t k = 0; k < dim; ++k)
            w_next[k] -= lr * (grad[k] / n + config.l2 * model.weights[k]);
        double b_next = model.bias - lr * grad_b / n;
        double loss = tupledetail::logistic_loss(features, labels, w_next, b_next, config.l2);
        if (loss > prev_loss) {
            lr *= 0.5;  // revert and retry smaller
            continue;
        }
        model.weights = std::move(w_next);
        model.bias = b_next;
        prev_loss = loss;
        ++epoch;
    }
    return model;
}

struct RankedTuple {
    TableTuple tuple;
    double proba = 0.0;
    size_t source_index = 0;  // position in the input list
};

// Descending probability; ties resolved by (table_id, row_id, col_id).
inline std::vector<RankedTuple> rank_tuples(const TupleClassifier& model,
                                            const std::vector<TableTuple>& tuples,
                                            const std::vector<std::vector<double>>& features,
                                            size_t n) {
    if (tuples.size() != features.size())
        throw DimensionMismatch("tuples and features misaligned");
    std::vector<RankedTuple> ranked(tuples.size());
    for (size_t i = 0; i < tuples.size(); ++i) {
        ranked[i].tuple = tuples[i];
        ranked[i].proba = model.predict_proba(features[i]);
        ranked[i].source_index = i;
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedTuple& a, const RankedTuple& b) {
        if (a.proba != b.proba) return a.proba > b.proba;
        auto ka = std::tie(a.tuple.table_id, a.tuple.row_id, a.tuple.col_id);
        auto kb = std::tie(b.tuple.table_id, b.tuple.row_id, b.tuple.col_id);
        return ka < kb;
    });
    if (ranked.size() > n) ranked.resize(n);
    return ranked;
}

struct TopNEval {
    size_t n = 0;
    double accuracy = 0.0;
    std::optional<double> recall;  // absent when there are no salient tuples
};

// Treats the top-n as predicted-positive: accuracy over all tuples, recall
// over the salient ones.
inline std::vector<TopNEval> evaluate_topn(const std::vector<size_t>& ranked_source_indices,
                                           const std::vector<LabeledTuple>& all_labeled,
                                           const std::vector<size_t>& n_values = {100, 200}) {
    size_t total_salient = 0;
    for (const auto& lt : all_labeled)
        if (lt.salient) ++total_salient;
    std::vector<TopNEval> out;
    for (size_t n : n_values) {
        TopNEval eval;
        eval.n = n;
        size_t topn = std::min(n, ranked_source_indices.size());
        size_t tp = 0;
        for (size_t i = 0; i < topn; ++i)
            if (all_labeled.at(ranked_source_indices[i]).salient) ++tp;
        size_t fp = topn - tp;
        size_t fn = total_salient - tp;
        size_t tn = all_labeled.size() - topn - fn;
        eval.accuracy = all_labeled.empty()
                            ? 0.0
                            : double(tp + tn) / double(all_labeled.size());
        if (total_salient > 0) eval.recall = double(tp) / double(total_salient);
        out.push_back(eval);
    }
    return out;
}

// Learns the K most frequent salient row/col names for one-hot features.
inline std::vector<std::string> frequent_salient_phrases(const std::vector<LabeledTuple>& labeled,
                                                         size_t k = 50) {
    std::map<std::string, size_t> freq;
    for (const auto& lt : labeled) {
        if (!lt.salient) continue;
        if (!lt.tuple.row_name.empty()) ++freq[to_lower(lt.tuple.row_name)];
        if (!lt.tuple.col_name.empty()) ++freq[to_lower(lt.tuple.col_name)];
    }
    std::vector<std::pair<std::string, size_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (size_t i = 0; i < items.size() && i < k; ++i) out.push_back(items[i].first);
    return out;
}

}  // namespace findsum
