#include "smart/model.hpp"

#include "smart/errors.hpp"
#include "smart/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace smart {

namespace {

// Dense row-major design matrix built per the model's feature encoding.
// Categorical one-hots match on category strings, so a separately loaded CSV
// with a different code order encodes identically.
std::vector<double> encode_rows(const std::vector<EncodedFeature>& features,
                                const Dataset& data, std::vector<std::string>* warnings) {
    const std::size_t n = data.n_rows();
    const std::size_t d = features.size();
    std::vector<double> x(n * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const EncodedFeature& f = features[j];
        const Column& col = data.column(f.column);
        if (col.kind != f.kind)
            throw DataError("column '" + f.column + "' has kind " + to_string(col.kind) +
                            ", model expects " + to_string(f.kind));
        switch (f.kind) {
            case ColumnKind::Numeric: {
                const auto& vals = std::get<NumericColumn>(col.data).values;
                for (std::size_t i = 0; i < n; ++i)
                    x[i * d + j] = (vals[i] - f.mean) / f.std;
                break;
            }
            case ColumnKind::Boolean: {
                const auto& vals = std::get<BooleanColumn>(col.data).values;
                for (std::size_t i = 0; i < n; ++i)
                    x[i * d + j] = (static_cast<double>(vals[i]) - f.mean) / f.std;
                break;
            }
            case ColumnKind::Categorical: {
                const auto& c = std::get<CategoricalColumn>(col.data);
                auto code = c.code_of(f.category_value);
                const std::int32_t target = code ? *code : -1;
                for (std::size_t i = 0; i < n; ++i)
                    x[i * d + j] = c.codes[i] == target ? 1.0 : 0.0;
                break;
            }
        }
    }
    if (warnings) {
        std::vector<std::string> checked;
        for (const auto& f : features) {
            if (f.kind != ColumnKind::Categorical) continue;
            if (std::find(checked.begin(), checked.end(), f.column) != checked.end()) continue;
            checked.push_back(f.column);
            const auto& c = std::get<CategoricalColumn>(data.column(f.column).data);
            for (const auto& cat : c.categories) {
                bool known = false;
                for (const auto& g : features)
                    if (g.kind == ColumnKind::Categorical && g.column == f.column &&
                        g.category_value == cat)
                        known = true;
                if (!known) {
                    warnings->push_back("column '" + f.column + "' value '" + cat +
                                        "' unseen at training time; encoded as zeros");
                }
            }
        }
    }
    return x;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

LogisticModel fit_logistic(const Dataset& train, std::uint64_t seed, int epochs,
                           double learning_rate) {
    (void)seed; // full-batch descent from zero init is already deterministic
    if (!train.target_column) throw DataError("fit_logistic requires a target column");
    const std::vector<std::uint8_t> y = train.labels();
    const std::size_t n = train.n_rows();

    std::size_t positives = std::accumulate(y.begin(), y.end(), std::size_t{0});
    if (positives < 2 || n - positives < 2)
        throw SingleClassError("target needs at least two rows per class (got " +
                               std::to_string(positives) + " positive of " + std::to_string(n) + ")");

    LogisticModel model;
    for (const Column& col : train.columns) {
        if (col.name == *train.target_column) continue;
        switch (col.kind) {
            case ColumnKind::Numeric: {
                const auto& vals = std::get<NumericColumn>(col.data).values;
                double mean = std::accumulate(vals.begin(), vals.end(), 0.0) /
                              static_cast<double>(n);
                double var = 0.0;
                for (double v : vals) var += (v - mean) * (v - mean);
                var /= static_cast<double>(n);
                if (var <= 0.0) {
                    model.warnings.push_back("dropping zero-variance numeric column '" +
                                             col.name + "'");
                    continue;
                }
                model.features.push_back({col.name, col.kind, {}, mean, std::sqrt(var)});
                break;
            }
            case ColumnKind::Boolean: {
                const auto& vals = std::get<BooleanColumn>(col.data).values;
                double mean = 0.0;
                for (auto v : vals) mean += v;
                mean /= static_cast<double>(n);
                double var = mean * (1.0 - mean);
                if (var <= 0.0) {
                    model.warnings.push_back("dropping constant boolean column '" + col.name + "'");
                    continue;
                }
                model.features.push_back({col.name, col.kind, {}, mean, std::sqrt(var)});
                break;
            }
            case ColumnKind::Categorical: {
                const auto& c = std::get<CategoricalColumn>(col.data);
                for (const auto& cat : c.categories)
                    model.features.push_back({col.name, col.kind, cat, 0.0, 1.0});
                break;
            }
        }
    }
    if (model.features.empty()) throw DataError("no usable features for fit_logistic");

    const std::size_t d = model.features.size();
    const std::vector<double> x = encode_rows(model.features, train, nullptr);
    model.weights.assign(d, 0.0);
    model.bias = 0.0;

    std::vector<double> grad(d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = model.bias;
            const double* row = &x[i * d];
            for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * row[j];
            const double p = sigmoid(z);
            const double err = p - static_cast<double>(y[i]);
            for (std::size_t j = 0; j < d; ++j) grad[j] += err * row[j];
            grad_bias += err;
            const double eps = 1e-12;
            loss -= y[i] ? std::log(p + eps) : std::log(1.0 - p + eps);
        }
        for (std::size_t j = 0; j < d; ++j) model.weights[j] -= learning_rate * grad[j] * inv_n;
        model.bias -= learning_rate * grad_bias * inv_n;
        if (epoch % 50 == 0 || epoch == epochs - 1)
            model.loss_history.push_back(loss * inv_n);
    }
    return model;
}

Predictions predict(const LogisticModel& model, const Dataset& data,
                    std::vector<std::string>* warnings) {
    const std::size_t n = data.n_rows();
    const std::size_t d = model.features.size();
    const std::vector<double> x = encode_rows(model.features, data, warnings);

    Predictions out;
    out.source = PredictionSource::BuiltinLogistic;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = model.bias;
        const double* row = &x[i * d];
        for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * row[j];
        out.values[i] = z >= 0.0 ? 1 : 0; // sigmoid(z) >= 0.5 ties to class 1
    }
    return out;
}

double accuracy(const Predictions& predictions, const std::vector<std::uint8_t>& labels) {
    if (predictions.size() != labels.size())
        throw DataError("predictions/labels length mismatch");
    if (labels.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        hits += predictions.values[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

Predictions corrupt_on_slice(const Predictions& base, const Slice& slice, double p,
                             double bernoulli_q, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw ConfigError("corruption probability p must lie in [0,1]");
    Predictions out = base;
    out.source = PredictionSource::Corrupted;
    for (std::size_t row : slice.row_indices) {
        Rng rng(derive_seed(seed, 0xc0de01, row));
        if (rng.bernoulli(p)) out.values[row] = rng.bernoulli(bernoulli_q) ? 1 : 0;
    }
    return out;
}

Predictions corrupt_proportion(const Predictions& base, const Slice& slice, double tau,
                               std::uint64_t seed) {
    if (tau < 0.0 || tau > 1.0) throw ConfigError("corruption proportion tau must lie in [0,1]");
    Predictions out = base;
    out.source = PredictionSource::Corrupted;
    const std::size_t k =
        static_cast<std::size_t>(std::floor(tau * static_cast<double>(slice.size())));
    if (k == 0) return out;

    std::vector<std::size_t> rows = slice.row_indices;
    Rng shuffle_rng(derive_seed(seed, 0xc0de02));
    for (std::size_t i = rows.size(); i > 1; --i) {
        std::size_t j =
            static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(rows[i - 1], rows[j]);
    }
    for (std::size_t i = 0; i < k; ++i) {
        Rng rng(derive_seed(seed, 0xc0de03, rows[i]));
        out.values[rows[i]] = rng.bernoulli(0.5) ? 1 : 0;
    }
    return out;
}

Predictions load_predictions_file(const std::string& path, std::size_t expected_rows) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open predictions file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("predictions file '" + path + "' is empty");
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "prediction")
        throw DataError("predictions file '" + path + "' must have header 'prediction'");

    Predictions out;
    out.source = PredictionSource::ExternalFile;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line == "0") out.values.push_back(0);
        else if (line == "1") out.values.push_back(1);
        else throw DataError("predictions file '" + path + "' row " + std::to_string(row_no) +
                             ": expected 0 or 1, got '" + line + "'");
    }
    if (out.size() != expected_rows)
        throw DataError("predictions file '" + path + "' has " + std::to_string(out.size()) +
                        " rows, dataset has " + std::to_string(expected_rows));
    return out;
}

Predictions predictions_from_column(const Dataset& dataset, const std::string& column) {
    const Column& col = dataset.column(column);
    Predictions out;
    out.source = PredictionSource::ExternalColumn;
    out.values.resize(dataset.n_rows());
    if (col.kind == ColumnKind::Boolean) {
        out.values = std::get<BooleanColumn>(col.data).values;
    } else if (col.kind == ColumnKind::Numeric) {
        const auto& vals = std::get<NumericColumn>(col.data).values;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (vals[i] == 0.0) out.values[i] = 0;
            else if (vals[i] == 1.0) out.values[i] = 1;
            else throw DataError("prediction column '" + column + "' is not binary at row " +
                                 std::to_string(i + 1));
        }
    } else {
        throw DataError("prediction column '" + column + "' must be boolean or binary numeric");
    }
    return out;
}

void write_predictions_file(const Predictions& predictions, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write predictions file '" + path + "'");
    out << "prediction\n";
    for (auto v : predictions.values) out << (v ? "1" : "0") << "\n";
}

} // namespace smart
