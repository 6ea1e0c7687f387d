#pragma once

#include "smart/dataset.hpp"
#include "smart/predicate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smart {

enum class PredictionSource { ExternalColumn, ExternalFile, BuiltinLogistic, Corrupted };

struct Predictions {
    std::vector<std::uint8_t> values;
    PredictionSource source = PredictionSource::ExternalColumn;

    std::size_t size() const { return values.size(); }
};

// One encoded input feature: a standardized numeric/boolean column or a
// one-hot indicator for a single categorical value.
struct EncodedFeature {
    std::string column;
    ColumnKind kind;
    std::string category_value; // one-hot target, categorical only
    double mean = 0.0;
    double std = 1.0;
};

struct LogisticModel {
    std::vector<EncodedFeature> features;
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<std::string> warnings;
    std::vector<double> loss_history; // mean log-loss, sampled every few epochs
};

LogisticModel fit_logistic(const Dataset& train, std::uint64_t seed, int epochs = 400,
                           double learning_rate = 0.5);

Predictions predict(const LogisticModel& model, const Dataset& data,
                    std::vector<std::string>* warnings = nullptr);

double accuracy(const Predictions& predictions, const std::vector<std::uint8_t>& labels);

// Each slice row is, with probability p, replaced by a Bernoulli(q) draw.
Predictions corrupt_on_slice(const Predictions& base, const Slice& slice, double p,
                             double bernoulli_q, std::uint64_t seed);

// A uniformly chosen floor(tau * |slice|) subset of slice rows gets
// independent Bernoulli(0.5) predictions.
Predictions corrupt_proportion(const Predictions& base, const Slice& slice, double tau,
                               std::uint64_t seed);

// Single-column CSV with header `prediction`, values 0/1, row-aligned.
Predictions load_predictions_file(const std::string& path, std::size_t expected_rows);

Predictions predictions_from_column(const Dataset& dataset, const std::string& column);

void write_predictions_file(const Predictions& predictions, const std::string& path);

} // namespace smart
