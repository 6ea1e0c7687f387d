#include "smart/dataset.hpp"

#include "smart/errors.hpp"
#include "smart/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace smart {

std::string to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Numeric: return "numeric";
        case ColumnKind::Boolean: return "boolean";
        case ColumnKind::Categorical: return "categorical";
    }
    return "?";
}

ColumnKind column_kind_from_string(const std::string& text) {
    if (text == "numeric") return ColumnKind::Numeric;
    if (text == "boolean") return ColumnKind::Boolean;
    if (text == "categorical") return ColumnKind::Categorical;
    throw ConfigError("unknown column type '" + text + "' (expected numeric|boolean|categorical)");
}

std::optional<std::int32_t> CategoricalColumn::code_of(const std::string& cat) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == cat) return static_cast<std::int32_t>(i);
    return std::nullopt;
}

std::size_t Column::size() const {
    switch (kind) {
        case ColumnKind::Numeric: return std::get<NumericColumn>(data).values.size();
        case ColumnKind::Boolean: return std::get<BooleanColumn>(data).values.size();
        case ColumnKind::Categorical: return std::get<CategoricalColumn>(data).codes.size();
    }
    return 0;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string Column::cell_text(std::size_t row) const {
    switch (kind) {
        case ColumnKind::Numeric:
            return format_double(std::get<NumericColumn>(data).values[row]);
        case ColumnKind::Boolean: {
            const auto& b = std::get<BooleanColumn>(data);
            return b.values[row] ? b.true_lexeme : b.false_lexeme;
        }
        case ColumnKind::Categorical:
            return std::get<CategoricalColumn>(data).value(row);
    }
    return {};
}

const Column* Dataset::find_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

const Column& Dataset::column(const std::string& name) const {
    const Column* c = find_column(name);
    if (!c) throw UnknownColumnError("unknown column '" + name + "'");
    return *c;
}

std::vector<std::uint8_t> Dataset::labels() const {
    if (!target_column) throw DataError("dataset has no target column");
    const Column& c = column(*target_column);
    std::vector<std::uint8_t> out(n_rows());
    if (c.kind == ColumnKind::Boolean) {
        out = std::get<BooleanColumn>(c.data).values;
    } else if (c.kind == ColumnKind::Numeric) {
        const auto& vals = std::get<NumericColumn>(c.data).values;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (vals[i] == 0.0) out[i] = 0;
            else if (vals[i] == 1.0) out[i] = 1;
            else throw DataError("target column '" + *target_column +
                                 "' is not binary at row " + std::to_string(i + 1));
        }
    } else {
        throw DataError("target column '" + *target_column + "' must be boolean or binary numeric");
    }
    return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.name = name;
    out.target_column = target_column;
    out.columns.reserve(columns.size());
    for (const auto& c : columns) {
        Column nc;
        nc.name = c.name;
        nc.kind = c.kind;
        switch (c.kind) {
            case ColumnKind::Numeric: {
                const auto& src = std::get<NumericColumn>(c.data).values;
                NumericColumn dst;
                dst.values.reserve(rows.size());
                for (auto r : rows) dst.values.push_back(src[r]);
                nc.data = std::move(dst);
                break;
            }
            case ColumnKind::Boolean: {
                const auto& src = std::get<BooleanColumn>(c.data);
                BooleanColumn dst;
                dst.true_lexeme = src.true_lexeme;
                dst.false_lexeme = src.false_lexeme;
                dst.values.reserve(rows.size());
                for (auto r : rows) dst.values.push_back(src.values[r]);
                nc.data = std::move(dst);
                break;
            }
            case ColumnKind::Categorical: {
                const auto& src = std::get<CategoricalColumn>(c.data);
                CategoricalColumn dst;
                dst.categories = src.categories; // keep ordering stable across splits
                dst.codes.reserve(rows.size());
                for (auto r : rows) dst.codes.push_back(src.codes[r]);
                nc.data = std::move(dst);
                break;
            }
        }
        out.columns.push_back(std::move(nc));
    }
    return out;
}

// ---- CSV --------------------------------------------------------------------

namespace {

std::vector<std::string> parse_csv_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field += ch;
        }
    }
    fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + text.size() && std::isfinite(out);
}

bool is_bool_lexeme(const std::string& s, bool& value) {
    if (s == "true" || s == "Y" || s == "1") { value = true; return true; }
    if (s == "false" || s == "N" || s == "0") { value = false; return true; }
    return false;
}

Column build_column(const std::string& name, const std::vector<std::string>& cells,
                    std::optional<ColumnKind> forced) {
    Column col;
    col.name = name;

    bool all_numeric = true;
    std::vector<double> numbers(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!parse_number(cells[i], numbers[i])) { all_numeric = false; break; }
    }

    bool all_bool = true;
    std::vector<std::uint8_t> bools(cells.size());
    std::string true_lex, false_lex;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        bool v;
        if (!is_bool_lexeme(cells[i], v)) { all_bool = false; break; }
        bools[i] = v ? 1 : 0;
        if (v && true_lex.empty()) true_lex = cells[i];
        if (!v && false_lex.empty()) false_lex = cells[i];
    }

    ColumnKind kind;
    if (forced) {
        kind = *forced;
    } else if (all_numeric) {
        kind = ColumnKind::Numeric;
    } else if (all_bool) {
        kind = ColumnKind::Boolean;
    } else {
        kind = ColumnKind::Categorical;
    }

    switch (kind) {
        case ColumnKind::Numeric: {
            if (!all_numeric)
                throw DataError("column '" + name + "' cannot be typed numeric: non-numeric cell present");
            col.kind = kind;
            col.data = NumericColumn{std::move(numbers)};
            break;
        }
        case ColumnKind::Boolean: {
            if (!all_bool)
                throw DataError("column '" + name + "' cannot be typed boolean: cell outside {0,1,true,false,Y,N}");
            BooleanColumn b;
            b.values = std::move(bools);
            if (!true_lex.empty()) b.true_lexeme = true_lex;
            if (!false_lex.empty()) b.false_lexeme = false_lex;
            col.kind = kind;
            col.data = std::move(b);
            break;
        }
        case ColumnKind::Categorical: {
            CategoricalColumn c;
            c.codes.resize(cells.size());
            for (std::size_t i = 0; i < cells.size(); ++i) {
                auto code = c.code_of(cells[i]);
                if (!code) {
                    c.categories.push_back(cells[i]);
                    code = static_cast<std::int32_t>(c.categories.size() - 1);
                }
                c.codes[i] = *code;
            }
            col.kind = kind;
            col.data = std::move(c);
            break;
        }
    }
    return col;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& target,
                 const std::map<std::string, ColumnKind>& type_overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("file '" + path + "' is empty");
    std::vector<std::string> header = parse_csv_record(line);
    for (auto& h : header) h = trim(h);

    std::set<std::string> seen;
    for (const auto& h : header) {
        if (h.empty()) throw DataError("empty column name in header of '" + path + "'");
        if (!seen.insert(h).second)
            throw DuplicateColumnError("duplicate column '" + h + "' in header of '" + path + "'");
    }

    std::vector<std::vector<std::string>> cells(header.size());
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = parse_csv_record(line);
        if (fields.size() != header.size())
            throw RaggedRowError("row " + std::to_string(row_no) + " of '" + path + "' has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(header.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            std::string v = trim(fields[c]);
            if (v.empty())
                throw MissingValueError("missing value at row " + std::to_string(row_no) +
                                        ", column '" + header[c] + "' of '" + path + "'");
            cells[c].push_back(std::move(v));
        }
    }
    if (cells.empty() || cells[0].empty()) throw DataError("file '" + path + "' has no data rows");

    for (const auto& [name, kind] : type_overrides) {
        (void)kind;
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw UnknownColumnError("type override references unknown column '" + name + "'");
    }

    Dataset ds;
    {
        std::size_t slash = path.find_last_of("/\\");
        ds.name = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::optional<ColumnKind> forced;
        auto it = type_overrides.find(header[c]);
        if (it != type_overrides.end()) forced = it->second;
        ds.columns.push_back(build_column(header[c], cells[c], forced));
    }

    if (!target.empty()) {
        if (!ds.has_column(target))
            throw UnknownColumnError("target column '" + target + "' not present in '" + path + "'");
        ds.target_column = target;
        ds.labels(); // validates binary-valued target
    }
    return ds;
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path + "'");

    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += "\"\"";
            else q += ch;
        }
        q += "\"";
        return q;
    };

    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
        if (c) out << ',';
        out << quote(dataset.columns[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
            if (c) out << ',';
            out << quote(dataset.columns[c].cell_text(r));
        }
        out << '\n';
    }
}

std::map<std::string, ColumnKind> load_schema_overrides(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open schema file '" + path + "'");
    std::map<std::string, ColumnKind> overrides;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("schema line '" + t + "' is not column=type");
        overrides[trim(t.substr(0, eq))] = column_kind_from_string(trim(t.substr(eq + 1)));
    }
    return overrides;
}

// ---- describe ---------------------------------------------------------------

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

DataContext describe(const Dataset& dataset, const std::string& task_prose) {
    if (dataset.n_rows() == 0) throw DataError("cannot describe an empty dataset");

    DataContext ctx;
    std::ostringstream values;
    std::ostringstream names;
    values << "[";
    for (std::size_t i = 0; i < dataset.columns.size(); ++i) {
        const Column& col = dataset.columns[i];
        ColumnSummary summary;
        summary.name = col.name;
        summary.kind = col.kind;

        if (i) {
            names << ", ";
            values << ", ";
        }
        names << col.name;
        values << "('" << col.name << "', ";

        switch (col.kind) {
            case ColumnKind::Numeric: {
                auto sorted = std::get<NumericColumn>(col.data).values;
                std::sort(sorted.begin(), sorted.end());
                summary.min = sorted.front();
                summary.max = sorted.back();
                summary.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                               static_cast<double>(sorted.size());
                std::size_t n = sorted.size();
                summary.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
                values << "[numeric: min " << format_double(summary.min) << ", max "
                       << format_double(summary.max) << ", mean " << fixed2(summary.mean)
                       << ", median " << fixed2(summary.median) << "]";
                break;
            }
            case ColumnKind::Boolean: {
                const auto& b = std::get<BooleanColumn>(col.data);
                summary.values = {b.true_lexeme, b.false_lexeme};
                values << "['" << b.true_lexeme << "', '" << b.false_lexeme << "']";
                break;
            }
            case ColumnKind::Categorical: {
                const auto& c = std::get<CategoricalColumn>(col.data);
                summary.values = c.categories;
                values << "[";
                for (std::size_t j = 0; j < c.categories.size(); ++j) {
                    if (j) values << ", ";
                    values << "'" << c.categories[j] << "'";
                }
                values << "]";
                break;
            }
        }
        values << ")";
        ctx.column_summaries.push_back(std::move(summary));
    }
    values << "]";

    std::ostringstream text;
    if (!task_prose.empty()) text << task_prose << "\n\n";
    text << "The dataset contains " << dataset.columns.size() << " columns. The columns are "
         << names.str() << ". The values are " << values.str() << ".";
    ctx.description_text = text.str();
    return ctx;
}

// ---- split ------------------------------------------------------------------

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw BadSplitFractionError("test fraction must lie in (0,1), got " +
                                    std::to_string(test_fraction));
    const std::size_t n = dataset.n_rows();
    std::size_t n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * test_fraction));
    if (n_test == 0 || n_test >= n)
        throw DataError("split would leave an empty partition (n=" + std::to_string(n) + ")");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, {0x517117ULL}));
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }

    std::vector<std::uint8_t> is_test(n, 0);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

    std::vector<std::size_t> train_rows, test_rows;
    train_rows.reserve(n - n_test);
    test_rows.reserve(n_test);
    for (std::size_t r = 0; r < n; ++r)
        (is_test[r] ? test_rows : train_rows).push_back(r);

    return {dataset.select_rows(train_rows), dataset.select_rows(test_rows)};
}

} // namespace smart
