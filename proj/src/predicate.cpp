#include "smart/predicate.hpp"

#include "smart/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace smart {

std::string to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "==";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

bool PredicateLiteral::operator==(const PredicateLiteral& other) const {
    if (is_number != other.is_number) return false;
    return is_number ? number == other.number : text == other.text;
}

PredicatePtr make_comparison(std::string column, CompareOp op, PredicateLiteral literal) {
    auto node = std::make_shared<PredicateNode>();
    node->kind = PredicateNode::Kind::Comparison;
    node->column = std::move(column);
    node->op = op;
    node->literal = std::move(literal);
    return node;
}

PredicatePtr make_in_set(std::string column, std::vector<PredicateLiteral> values) {
    if (values.empty()) throw PredicateTypeError("in-set literal list must be non-empty");
    auto node = std::make_shared<PredicateNode>();
    node->kind = PredicateNode::Kind::InSet;
    node->column = std::move(column);
    node->set_values = std::move(values);
    return node;
}

PredicatePtr make_and(PredicatePtr lhs, PredicatePtr rhs) {
    auto node = std::make_shared<PredicateNode>();
    node->kind = PredicateNode::Kind::And;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
}

PredicatePtr make_or(PredicatePtr lhs, PredicatePtr rhs) {
    auto node = std::make_shared<PredicateNode>();
    node->kind = PredicateNode::Kind::Or;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
}

bool structurally_equal(const PredicatePtr& a, const PredicatePtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case PredicateNode::Kind::Comparison:
            return a->column == b->column && a->op == b->op && a->literal == b->literal;
        case PredicateNode::Kind::InSet:
            return a->column == b->column && a->set_values == b->set_values;
        case PredicateNode::Kind::And:
        case PredicateNode::Kind::Or:
            return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
    return false;
}

// ---- lexer / parser -----------------------------------------------------------

namespace {

enum class TokKind { Ident, Number, String, Op, LParen, RParen, LBracket, RBracket, Comma, End };

struct Token {
    TokKind kind;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_ws();
        Token tok;
        tok.offset = pos_;
        if (pos_ >= src_.size()) {
            tok.kind = TokKind::End;
            return tok;
        }
        char ch = src_[pos_];
        if (ch == '(') { ++pos_; tok.kind = TokKind::LParen; return tok; }
        if (ch == ')') { ++pos_; tok.kind = TokKind::RParen; return tok; }
        if (ch == '[') { ++pos_; tok.kind = TokKind::LBracket; return tok; }
        if (ch == ']') { ++pos_; tok.kind = TokKind::RBracket; return tok; }
        if (ch == ',') { ++pos_; tok.kind = TokKind::Comma; return tok; }
        if (ch == '"' || ch == '\'') return lex_string(ch);
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == '+' ||
            (ch == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
            return lex_number();
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return lex_ident();
        if (ch == '=' || ch == '!' || ch == '<' || ch == '>') return lex_op();
        throw PredicateSyntaxError("unexpected character '" + std::string(1, ch) + "'", pos_);
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    Token lex_string(char quote) {
        Token tok;
        tok.kind = TokKind::String;
        tok.offset = pos_;
        ++pos_;
        while (pos_ < src_.size() && src_[pos_] != quote) {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
            tok.text += src_[pos_++];
        }
        if (pos_ >= src_.size())
            throw PredicateSyntaxError("unterminated string literal", tok.offset);
        ++pos_;
        return tok;
    }

    Token lex_number() {
        Token tok;
        tok.kind = TokKind::Number;
        tok.offset = pos_;
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        tok.number = std::strtod(begin, &end);
        if (end == begin || !std::isfinite(tok.number))
            throw PredicateSyntaxError("bad numeric literal", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return tok;
    }

    Token lex_ident() {
        Token tok;
        tok.kind = TokKind::Ident;
        tok.offset = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            tok.text += src_[pos_++];
        return tok;
    }

    Token lex_op() {
        Token tok;
        tok.kind = TokKind::Op;
        tok.offset = pos_;
        char ch = src_[pos_];
        char nxt = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
        if (ch == '=' && nxt == '=') { tok.text = "=="; pos_ += 2; return tok; }
        if (ch == '!' && nxt == '=') { tok.text = "!="; pos_ += 2; return tok; }
        if (ch == '<') { tok.text = nxt == '=' ? "<=" : "<"; pos_ += tok.text.size(); return tok; }
        if (ch == '>') { tok.text = nxt == '=' ? ">=" : ">"; pos_ += tok.text.size(); return tok; }
        throw PredicateSyntaxError("unexpected operator", pos_);
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

CompareOp op_from_text(const std::string& text, std::size_t offset) {
    if (text == "==") return CompareOp::Eq;
    if (text == "!=") return CompareOp::Ne;
    if (text == "<") return CompareOp::Lt;
    if (text == "<=") return CompareOp::Le;
    if (text == ">") return CompareOp::Gt;
    if (text == ">=") return CompareOp::Ge;
    throw PredicateSyntaxError("unknown comparison operator '" + text + "'", offset);
}

class Parser {
public:
    explicit Parser(const std::string& src) : lexer_(src) { advance(); }

    PredicatePtr parse() {
        PredicatePtr expr = parse_or();
        if (cur_.kind != TokKind::End)
            throw PredicateSyntaxError("trailing input after expression", cur_.offset);
        return expr;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    bool at_keyword(const char* kw) const {
        return cur_.kind == TokKind::Ident && cur_.text == kw;
    }

    PredicatePtr parse_or() {
        PredicatePtr lhs = parse_and();
        while (at_keyword("or")) {
            advance();
            lhs = make_or(std::move(lhs), parse_and());
        }
        return lhs;
    }

    PredicatePtr parse_and() {
        PredicatePtr lhs = parse_term();
        while (at_keyword("and")) {
            advance();
            lhs = make_and(std::move(lhs), parse_term());
        }
        return lhs;
    }

    PredicateLiteral parse_literal() {
        if (cur_.kind == TokKind::Number) {
            PredicateLiteral lit = PredicateLiteral::make_number(cur_.number);
            advance();
            return lit;
        }
        if (cur_.kind == TokKind::String) {
            PredicateLiteral lit = PredicateLiteral::make_string(cur_.text);
            advance();
            return lit;
        }
        throw PredicateSyntaxError("expected a literal", cur_.offset);
    }

    PredicatePtr parse_term() {
        if (cur_.kind == TokKind::LParen) {
            advance();
            PredicatePtr inner = parse_or();
            if (cur_.kind != TokKind::RParen)
                throw PredicateSyntaxError("expected ')'", cur_.offset);
            advance();
            return inner;
        }
        if (cur_.kind != TokKind::Ident)
            throw PredicateSyntaxError("expected a column name", cur_.offset);
        if (cur_.text == "and" || cur_.text == "or" || cur_.text == "in")
            throw PredicateSyntaxError("keyword '" + cur_.text + "' cannot start a term",
                                       cur_.offset);
        std::string column = cur_.text;
        advance();

        if (at_keyword("in")) {
            advance();
            if (cur_.kind != TokKind::LBracket)
                throw PredicateSyntaxError("expected '[' after 'in'", cur_.offset);
            advance();
            std::vector<PredicateLiteral> values;
            values.push_back(parse_literal());
            while (cur_.kind == TokKind::Comma) {
                advance();
                values.push_back(parse_literal());
            }
            if (cur_.kind != TokKind::RBracket)
                throw PredicateSyntaxError("expected ']'", cur_.offset);
            advance();
            return make_in_set(std::move(column), std::move(values));
        }

        if (cur_.kind != TokKind::Op)
            throw PredicateSyntaxError("expected a comparison operator", cur_.offset);
        CompareOp op = op_from_text(cur_.text, cur_.offset);
        advance();
        return make_comparison(std::move(column), op, parse_literal());
    }

    Lexer lexer_;
    Token cur_;
};

bool literal_as_bool(const PredicateLiteral& lit, const BooleanColumn& col, bool& out) {
    if (lit.is_number) {
        if (lit.number == 0.0) { out = false; return true; }
        if (lit.number == 1.0) { out = true; return true; }
        return false;
    }
    const std::string& s = lit.text;
    if (s == "true" || s == "Y" || s == "1" || s == col.true_lexeme) { out = true; return true; }
    if (s == "false" || s == "N" || s == "0" || s == col.false_lexeme) { out = false; return true; }
    return false;
}

} // namespace

PredicatePtr parse_predicate_text(const std::string& text) {
    if (text.empty()) throw PredicateSyntaxError("empty predicate", 0);
    Parser parser(text);
    return parser.parse();
}

PredicatePtr parse_predicate(const std::string& text, const Dataset& schema) {
    PredicatePtr ast = parse_predicate_text(text);
    validate_predicate(ast, schema);
    return ast;
}

void validate_predicate(const PredicatePtr& ast, const Dataset& schema) {
    if (!ast) throw PredicateTypeError("null predicate");
    switch (ast->kind) {
        case PredicateNode::Kind::Comparison: {
            const Column& col = schema.column(ast->column);
            const bool ordering = ast->op != CompareOp::Eq && ast->op != CompareOp::Ne;
            switch (col.kind) {
                case ColumnKind::Numeric:
                    if (!ast->literal.is_number)
                        throw PredicateTypeError("column '" + ast->column +
                                                 "' is numeric; literal must be a number");
                    break;
                case ColumnKind::Boolean: {
                    if (ordering)
                        throw PredicateTypeError("ordering comparison on boolean column '" +
                                                 ast->column + "'");
                    bool unused;
                    if (!literal_as_bool(ast->literal, std::get<BooleanColumn>(col.data), unused))
                        throw PredicateTypeError("literal does not denote a boolean value for column '" +
                                                 ast->column + "'");
                    break;
                }
                case ColumnKind::Categorical:
                    if (ordering)
                        throw PredicateTypeError("ordering comparison on categorical column '" +
                                                 ast->column + "'");
                    if (ast->literal.is_number)
                        throw PredicateTypeError("column '" + ast->column +
                                                 "' is categorical; literal must be a string");
                    break;
            }
            break;
        }
        case PredicateNode::Kind::InSet: {
            const Column& col = schema.column(ast->column);
            for (const auto& lit : ast->set_values) {
                switch (col.kind) {
                    case ColumnKind::Numeric:
                        if (!lit.is_number)
                            throw PredicateTypeError("in-set over numeric column '" + ast->column +
                                                     "' requires numeric literals");
                        break;
                    case ColumnKind::Boolean: {
                        bool unused;
                        if (!literal_as_bool(lit, std::get<BooleanColumn>(col.data), unused))
                            throw PredicateTypeError("in-set literal is not boolean for column '" +
                                                     ast->column + "'");
                        break;
                    }
                    case ColumnKind::Categorical:
                        if (lit.is_number)
                            throw PredicateTypeError("in-set over categorical column '" +
                                                     ast->column + "' requires string literals");
                        break;
                }
            }
            break;
        }
        case PredicateNode::Kind::And:
        case PredicateNode::Kind::Or:
            validate_predicate(ast->lhs, schema);
            validate_predicate(ast->rhs, schema);
            break;
    }
}

namespace {

void eval_into(const PredicatePtr& ast, const Dataset& dataset, std::vector<std::uint8_t>& out) {
    const std::size_t n = dataset.n_rows();
    switch (ast->kind) {
        case PredicateNode::Kind::Comparison: {
            const Column& col = dataset.column(ast->column);
            if (col.kind == ColumnKind::Numeric) {
                const auto& vals = std::get<NumericColumn>(col.data).values;
                const double x = ast->literal.number;
                switch (ast->op) {
                    case CompareOp::Eq: for (std::size_t i = 0; i < n; ++i) out[i] = vals[i] == x; break;
                    case CompareOp::Ne: for (std::size_t i = 0; i < n; ++i) out[i] = vals[i] != x; break;
                    case CompareOp::Lt: for (std::size_t i = 0; i < n; ++i) out[i] = vals[i] < x; break;
                    case CompareOp::Le: for (std::size_t i = 0; i < n; ++i) out[i] = vals[i] <= x; break;
                    case CompareOp::Gt: for (std::size_t i = 0; i < n; ++i) out[i] = vals[i] > x; break;
                    case CompareOp::Ge: for (std::size_t i = 0; i < n; ++i) out[i] = vals[i] >= x; break;
                }
            } else if (col.kind == ColumnKind::Boolean) {
                const auto& b = std::get<BooleanColumn>(col.data);
                bool want = false;
                literal_as_bool(ast->literal, b, want);
                const std::uint8_t w = want ? 1 : 0;
                const bool eq = ast->op == CompareOp::Eq;
                for (std::size_t i = 0; i < n; ++i)
                    out[i] = eq ? (b.values[i] == w) : (b.values[i] != w);
            } else {
                const auto& c = std::get<CategoricalColumn>(col.data);
                auto code = c.code_of(ast->literal.text);
                const std::int32_t target = code ? *code : -1;
                const bool eq = ast->op == CompareOp::Eq;
                for (std::size_t i = 0; i < n; ++i)
                    out[i] = eq ? (c.codes[i] == target) : (c.codes[i] != target);
            }
            break;
        }
        case PredicateNode::Kind::InSet: {
            const Column& col = dataset.column(ast->column);
            if (col.kind == ColumnKind::Numeric) {
                const auto& vals = std::get<NumericColumn>(col.data).values;
                for (std::size_t i = 0; i < n; ++i) {
                    bool hit = false;
                    for (const auto& lit : ast->set_values)
                        if (vals[i] == lit.number) { hit = true; break; }
                    out[i] = hit;
                }
            } else if (col.kind == ColumnKind::Boolean) {
                const auto& b = std::get<BooleanColumn>(col.data);
                bool want0 = false, want1 = false;
                for (const auto& lit : ast->set_values) {
                    bool v = false;
                    literal_as_bool(lit, b, v);
                    (v ? want1 : want0) = true;
                }
                for (std::size_t i = 0; i < n; ++i) out[i] = b.values[i] ? want1 : want0;
            } else {
                const auto& c = std::get<CategoricalColumn>(col.data);
                std::vector<std::uint8_t> member(c.categories.size(), 0);
                for (const auto& lit : ast->set_values) {
                    auto code = c.code_of(lit.text);
                    if (code) member[*code] = 1;
                }
                for (std::size_t i = 0; i < n; ++i) out[i] = member[c.codes[i]];
            }
            break;
        }
        case PredicateNode::Kind::And: {
            std::vector<std::uint8_t> rhs(n);
            eval_into(ast->lhs, dataset, out);
            eval_into(ast->rhs, dataset, rhs);
            for (std::size_t i = 0; i < n; ++i) out[i] = out[i] && rhs[i];
            break;
        }
        case PredicateNode::Kind::Or: {
            std::vector<std::uint8_t> rhs(n);
            eval_into(ast->lhs, dataset, out);
            eval_into(ast->rhs, dataset, rhs);
            for (std::size_t i = 0; i < n; ++i) out[i] = out[i] || rhs[i];
            break;
        }
    }
}

} // namespace

std::vector<std::uint8_t> eval_predicate_mask(const PredicatePtr& ast, const Dataset& dataset) {
    std::vector<std::uint8_t> mask(dataset.n_rows());
    eval_into(ast, dataset, mask);
    return mask;
}

Slice eval_predicate(const PredicatePtr& ast, const Dataset& dataset) {
    Slice slice;
    slice.predicate = ast;
    std::vector<std::uint8_t> mask = eval_predicate_mask(ast, dataset);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) slice.row_indices.push_back(i);
    return slice;
}

namespace {

std::string render_literal(const PredicateLiteral& lit) {
    if (lit.is_number) return format_double(lit.number);
    std::string out = "\"";
    for (char ch : lit.text) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    out += '"';
    return out;
}

void render_into(const PredicatePtr& ast, std::string& out) {
    auto wrap_child = [&out](const PredicatePtr& child) {
        const bool compound = child->kind == PredicateNode::Kind::And ||
                              child->kind == PredicateNode::Kind::Or;
        if (compound) out += '(';
        render_into(child, out);
        if (compound) out += ')';
    };
    switch (ast->kind) {
        case PredicateNode::Kind::Comparison:
            out += ast->column;
            out += ' ';
            out += to_string(ast->op);
            out += ' ';
            out += render_literal(ast->literal);
            break;
        case PredicateNode::Kind::InSet:
            out += ast->column;
            out += " in [";
            for (std::size_t i = 0; i < ast->set_values.size(); ++i) {
                if (i) out += ", ";
                out += render_literal(ast->set_values[i]);
            }
            out += ']';
            break;
        case PredicateNode::Kind::And:
            wrap_child(ast->lhs);
            out += " and ";
            wrap_child(ast->rhs);
            break;
        case PredicateNode::Kind::Or:
            wrap_child(ast->lhs);
            out += " or ";
            wrap_child(ast->rhs);
            break;
    }
}

} // namespace

std::string render(const PredicatePtr& ast) {
    std::string out;
    render_into(ast, out);
    return out;
}

namespace {

int count_and_nodes(const PredicatePtr& ast) {
    if (!ast) return 0;
    switch (ast->kind) {
        case PredicateNode::Kind::And:
            return 1 + count_and_nodes(ast->lhs) + count_and_nodes(ast->rhs);
        case PredicateNode::Kind::Or:
            return count_and_nodes(ast->lhs) + count_and_nodes(ast->rhs);
        default:
            return 0;
    }
}

} // namespace

int count_criteria(const PredicatePtr& ast) {
    return count_and_nodes(ast) + 1;
}

std::vector<std::string> referenced_columns(const PredicatePtr& ast) {
    std::vector<std::string> cols;
    auto add = [&cols](const std::string& name) {
        if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
    };
    std::vector<const PredicateNode*> stack{ast.get()};
    while (!stack.empty()) {
        const PredicateNode* node = stack.back();
        stack.pop_back();
        if (!node) continue;
        if (node->kind == PredicateNode::Kind::And || node->kind == PredicateNode::Kind::Or) {
            stack.push_back(node->rhs.get());
            stack.push_back(node->lhs.get());
        } else {
            add(node->column);
        }
    }
    return cols;
}

bool references_column_value(const PredicatePtr& ast, const std::string& column,
                             const std::string& value) {
    if (!ast) return false;
    switch (ast->kind) {
        case PredicateNode::Kind::Comparison:
            if (ast->column != column) return false;
            if (value.empty()) return true;
            return !ast->literal.is_number && ast->literal.text == value;
        case PredicateNode::Kind::InSet:
            if (ast->column != column) return false;
            if (value.empty()) return true;
            for (const auto& lit : ast->set_values)
                if (!lit.is_number && lit.text == value) return true;
            return false;
        case PredicateNode::Kind::And:
        case PredicateNode::Kind::Or:
            return references_column_value(ast->lhs, column, value) ||
                   references_column_value(ast->rhs, column, value);
    }
    return false;
}

} // namespace smart
