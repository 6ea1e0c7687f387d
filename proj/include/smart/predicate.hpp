#pragma once

#include "smart/dataset.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace smart {

// Slice query language:
//
//   expr   := conj ('or' conj)*            -- 'and' binds tighter than 'or'
//   conj   := term ('and' term)*
//   term   := '(' expr ')'
//           | column ('==' | '!=' | '<' | '<=' | '>' | '>=') literal
//           | column 'in' '[' literal (',' literal)* ']'
//   literal:= number | "string"
//
// Parenthesses group; they are not materialized in the tree. Ordering
// operators require a numeric column and a numeric literal.

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string to_string(CompareOp op);

struct PredicateLiteral {
    bool is_number = false;
    double number = 0.0;
    std::string text;

    static PredicateLiteral make_number(double v) { return {true, v, {}}; }
    static PredicateLiteral make_string(std::string s) { return {false, 0.0, std::move(s)}; }

    bool operator==(const PredicateLiteral& other) const;
};

struct PredicateNode;
using PredicatePtr = std::shared_ptr<const PredicateNode>;

struct PredicateNode {
    enum class Kind { Comparison, InSet, And, Or };

    Kind kind;
    // Comparison / InSet
    std::string column;
    CompareOp op = CompareOp::Eq;
    PredicateLiteral literal;
    std::vector<PredicateLiteral> set_values;
    // And / Or
    PredicatePtr lhs, rhs;
};

PredicatePtr make_comparison(std::string column, CompareOp op, PredicateLiteral literal);
PredicatePtr make_in_set(std::string column, std::vector<PredicateLiteral> values);
PredicatePtr make_and(PredicatePtr lhs, PredicatePtr rhs);
PredicatePtr make_or(PredicatePtr lhs, PredicatePtr rhs);

bool structurally_equal(const PredicatePtr& a, const PredicatePtr& b);

struct Slice {
    PredicatePtr predicate;
    std::vector<std::size_t> row_indices; // strictly increasing

    std::size_t size() const { return row_indices.size(); }
};

// Parse without schema checks (syntax only).
PredicatePtr parse_predicate_text(const std::string& text);

// Parse and validate column references and operand types against the schema.
PredicatePtr parse_predicate(const std::string& text, const Dataset& schema);

// Throws UnknownColumnError / PredicateTypeError.
void validate_predicate(const PredicatePtr& ast, const Dataset& schema);

std::vector<std::uint8_t> eval_predicate_mask(const PredicatePtr& ast, const Dataset& dataset);

Slice eval_predicate(const PredicatePtr& ast, const Dataset& dataset);

std::string render(const PredicatePtr& ast);

int count_criteria(const PredicatePtr& ast);

// Column names referenced anywhere in the tree (deduplicated, in-order).
std::vector<std::string> referenced_columns(const PredicatePtr& ast);

// True when some comparison or in-set in the tree touches `column` (and, for
// equality nodes, mentions `value` when non-empty).
bool references_column_value(const PredicatePtr& ast, const std::string& column,
                             const std::string& value = "");

} // namespace smart
