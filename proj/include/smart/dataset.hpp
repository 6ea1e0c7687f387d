#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smart {

enum class ColumnKind { Numeric, Boolean, Categorical };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& text);

struct NumericColumn {
    std::vector<double> values;
};

// Boolean cells keep the lexemes they were loaded with ("Y"/"N", "true"/...)
// so CSV round-trips and prompt value listings stay faithful.
struct BooleanColumn {
    std::vector<std::uint8_t> values;
    std::string true_lexeme = "true";
    std::string false_lexeme = "false";
};

// Categories are kept in first-appearance order; cells store codes.
struct CategoricalColumn {
    std::vector<std::int32_t> codes;
    std::vector<std::string> categories;

    const std::string& value(std::size_t row) const { return categories[codes[row]]; }
    std::optional<std::int32_t> code_of(const std::string& cat) const;
};

struct Column {
    std::string name;
    ColumnKind kind;
    std::variant<NumericColumn, BooleanColumn, CategoricalColumn> data;

    std::size_t size() const;
    // Printable cell value (numeric cells use shortest round-trip form).
    std::string cell_text(std::size_t row) const;
};

class Dataset {
public:
    std::string name;
    std::vector<Column> columns;
    std::optional<std::string> target_column;

    std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t n_cols() const { return columns.size(); }

    const Column* find_column(const std::string& name) const;
    const Column& column(const std::string& name) const; // throws UnknownColumnError
    bool has_column(const std::string& name) const { return find_column(name) != nullptr; }

    // Binary labels from the target column (numeric 0/1 or boolean).
    std::vector<std::uint8_t> labels() const;

    Dataset select_rows(const std::vector<std::size_t>& rows) const;
};

struct ColumnSummary {
    std::string name;
    ColumnKind kind;
    std::vector<std::string> values; // observed categories / boolean lexemes
    double min = 0.0, max = 0.0, mean = 0.0, median = 0.0; // numeric only
};

struct DataContext {
    std::string description_text;
    std::vector<ColumnSummary> column_summaries;
};

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// ---- operations -------------------------------------------------------------

Dataset load_csv(const std::string& path, const std::string& target,
                 const std::map<std::string, ColumnKind>& type_overrides = {});

void write_csv(const Dataset& dataset, const std::string& path);

// Sidecar schema file: one `column=type` line per override.
std::map<std::string, ColumnKind> load_schema_overrides(const std::string& path);

DataContext describe(const Dataset& dataset, const std::string& task_prose);

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed);

} // namespace smart
