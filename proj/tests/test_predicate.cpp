#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smart/dataset.hpp"
#include "smart/errors.hpp"
#include "smart/predicate.hpp"
#include "smart/rng.hpp"

#include "query_testlib.hpp"

#include <cmath>

using namespace smart;
using testlib::naive_row_eval;
using testlib::random_ast;
using testlib::random_dataset;

namespace {

Dataset make_schema() {
    Dataset ds;
    ds.name = "toy";
    Column age{"age", ColumnKind::Numeric, NumericColumn{{70, 72, 90}}};
    Column x{"x", ColumnKind::Numeric, NumericColumn{{50, 10, 46}}};
    Column y{"y", ColumnKind::Numeric, NumericColumn{{10, 30, 15}}};
    Column a{"a", ColumnKind::Numeric, NumericColumn{{1, 2, 3}}};
    CategoricalColumn dis_data;
    dis_data.categories = {"Y", "N"};
    dis_data.codes = {0, 1, 0};
    Column dis{"disability", ColumnKind::Categorical, dis_data};
    BooleanColumn flag_data;
    flag_data.values = {1, 0, 1};
    flag_data.true_lexeme = "Y";
    flag_data.false_lexeme = "N";
    Column flag{"flag", ColumnKind::Boolean, flag_data};
    ds.columns = {age, x, y, a, dis, flag};
    return ds;
}

} // namespace

TEST_CASE("parses the operationalization strings the reports use") {
    Dataset ds = make_schema();

    PredicatePtr p1 = parse_predicate("age >= 72", ds);
    REQUIRE(p1->kind == PredicateNode::Kind::Comparison);
    CHECK(p1->column == "age");
    CHECK(p1->op == CompareOp::Ge);
    CHECK(p1->literal.number == 72.0);

    PredicatePtr p2 = parse_predicate("disability == \"Y\"", ds);
    REQUIRE(p2->kind == PredicateNode::Kind::Comparison);
    CHECK(p2->column == "disability");
    CHECK(p2->literal.text == "Y");

    PredicatePtr p3 = parse_predicate("(x > 45) and (y < 20)", ds);
    REQUIRE(p3->kind == PredicateNode::Kind::And);
    CHECK(p3->lhs->kind == PredicateNode::Kind::Comparison);
    CHECK(p3->lhs->column == "x");
    CHECK(p3->lhs->op == CompareOp::Gt);
    CHECK(p3->rhs->column == "y");
    CHECK(p3->rhs->op == CompareOp::Lt);
}

TEST_CASE("and binds tighter than or") {
    Dataset ds = make_schema();
    PredicatePtr p = parse_predicate("a == 1 or a == 2 and a == 3", ds);
    REQUIRE(p->kind == PredicateNode::Kind::Or);
    CHECK(p->lhs->kind == PredicateNode::Kind::Comparison);
    CHECK(p->rhs->kind == PredicateNode::Kind::And);
}

TEST_CASE("parse errors carry positions and kinds") {
    Dataset ds = make_schema();
    CHECK_THROWS_AS(parse_predicate("", ds), PredicateSyntaxError);
    CHECK_THROWS_AS(parse_predicate("age >= ", ds), PredicateSyntaxError);
    try {
        parse_predicate("age @ 3", ds);
        FAIL("expected syntax error");
    } catch (const PredicateSyntaxError& e) {
        CHECK(e.byte_offset == 4);
    }
    CHECK_THROWS_AS(parse_predicate("height > 3", ds), UnknownColumnError);
    CHECK_THROWS_AS(parse_predicate("disability < \"Y\"", ds), PredicateTypeError);
    CHECK_THROWS_AS(parse_predicate("age >= \"old\"", ds), PredicateTypeError);
    CHECK_THROWS_AS(parse_predicate("disability == 3.5", ds), PredicateTypeError);
}

TEST_CASE("eval matches the worked examples") {
    Dataset ds = make_schema();
    Slice s1 = eval_predicate(parse_predicate("age >= 72", ds), ds);
    CHECK(s1.row_indices == std::vector<std::size_t>{1, 2});

    Slice s2 = eval_predicate(parse_predicate("a == 1 or a == 2", ds), ds);
    CHECK(s2.row_indices == std::vector<std::size_t>{0, 1});

    Slice s3 = eval_predicate(parse_predicate("flag == 1", ds), ds);
    CHECK(s3.row_indices == std::vector<std::size_t>{0, 2});

    // boolean columns accept their lexemes
    Slice s4 = eval_predicate(parse_predicate("flag == \"N\"", ds), ds);
    CHECK(s4.row_indices == std::vector<std::size_t>{1});
}

TEST_CASE("render is canonical and round-trips the examples") {
    Dataset ds = make_schema();
    CHECK(render(parse_predicate("age>=72", ds)) == "age >= 72");
    CHECK(render(parse_predicate("(x > 45) and (y < 20)", ds)) == "x > 45 and y < 20");
    // nested compounds are parenthesized
    PredicatePtr nested = make_or(
        make_and(parse_predicate("a == 1", ds), parse_predicate("a == 2", ds)),
        parse_predicate("a == 3", ds));
    CHECK(render(nested) == "(a == 1 and a == 2) or a == 3");
}

TEST_CASE("count_criteria is the and-count plus one") {
    Dataset ds = make_schema();
    CHECK(count_criteria(parse_predicate("age >= 72", ds)) == 1);
    CHECK(count_criteria(parse_predicate("a == 1 and x == 2", ds)) == 2);
    CHECK(count_criteria(parse_predicate("a == 1 and x == 2 and y == 3", ds)) == 3);
    // or is ignored by the formula
    CHECK(count_criteria(parse_predicate("a == 1 or x == 2", ds)) == 1);
    CHECK(count_criteria(parse_predicate("(a == 1 and x == 2) or (y == 3 and a == 4)", ds)) == 3);
}

TEST_CASE("property: parse(render(ast)) is structurally identical, 1000 cases") {
    Rng rng(1111);
    Dataset ds = random_dataset(rng);
    for (int i = 0; i < 1000; ++i) {
        PredicatePtr ast = random_ast(rng, ds, 3);
        const std::string text = render(ast);
        PredicatePtr reparsed = parse_predicate(text, ds);
        if (!structurally_equal(ast, reparsed)) {
            CAPTURE(text);
            REQUIRE(structurally_equal(ast, reparsed));
        }
    }
}

TEST_CASE("property: vectorized eval equals the naive per-row oracle, 1000 cases") {
    Rng rng(2222);
    for (int i = 0; i < 1000; ++i) {
        Dataset ds = random_dataset(rng);
        PredicatePtr ast = random_ast(rng, ds, 3);
        Slice slice = eval_predicate(ast, ds);
        std::vector<std::size_t> expected;
        for (std::size_t row = 0; row < ds.n_rows(); ++row)
            if (naive_row_eval(ast, ds, row)) expected.push_back(row);
        if (slice.row_indices != expected) {
            CAPTURE(render(ast));
            REQUIRE(slice.row_indices == expected);
        }
        // indices strictly increasing by construction
        for (std::size_t j = 1; j < slice.row_indices.size(); ++j)
            CHECK(slice.row_indices[j - 1] < slice.row_indices[j]);
    }
}

TEST_CASE("in-set over every column kind") {
    Dataset ds = make_schema();
    Slice s = eval_predicate(parse_predicate("disability in [\"Y\"]", ds), ds);
    CHECK(s.row_indices == std::vector<std::size_t>{0, 2});
    Slice s2 = eval_predicate(parse_predicate("a in [1, 3]", ds), ds);
    CHECK(s2.row_indices == std::vector<std::size_t>{0, 2});
    CHECK_THROWS_AS(parse_predicate("a in []", ds), PredicateSyntaxError);
    CHECK_THROWS_AS(parse_predicate("disability in [1]", ds), PredicateTypeError);
}
