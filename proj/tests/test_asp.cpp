#include <doctest.h>

#include "support.hpp"

using namespace asploop::asp;
using testing::ground_text;
using testing::models_of;

TEST_CASE("pooled facts expand and keep their group") {
    auto p = parse_program("people(50;75;100;125).\nplanners(herbert;joel).\n");
    REQUIRE(p.size() == 6);
    CHECK(p[0].group == p[3].group);
    CHECK(p[4].group != p[0].group);
    CHECK(to_string(p[1]) == "people(75).");
}

TEST_CASE("comments are skipped") {
    auto p = parse_program("% line\na. %* block\n b. *% c.\n");
    REQUIRE(p.size() == 2);
    CHECK(p[1].head->predicate == "c");
}

TEST_CASE("print then parse gives the same structure") {
    const char* src =
        "1 {assignment(E, P, A) : planners(P), people(A)} 1 :- events(E).\n"
        "{E = anniversary; A = 100} = 1 :- assignment(E, joel, A).\n"
        ":- assignment(_, susan, A), not q(A), A != 50 + 25.\n"
        "r(X) :- s(X, (1, b)), -X < 3.\n";
    auto first = parse_program(src);
    auto again = parse_program(to_string(first));
    REQUIRE(first.size() == again.size());
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].same_structure(again[i]));
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse_program("a.\nb(X :- c.\n");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() > 0);
    }
}

TEST_CASE("constructs outside the fragment are reported as unsupported") {
    CHECK_THROWS_AS(parse_program("#minimize { X : p(X) }.\n"), UnsupportedConstruct);
    CHECK_THROWS_AS(parse_program("a :- #count { X : p(X) } > 2.\n"), UnsupportedConstruct);
}

TEST_CASE("ground atoms from solver output") {
    auto a = parse_ground_atom("assignment(a,\"b c\",(1,2),f(x))");
    REQUIRE(a.args.size() == 4);
    CHECK(a.args[1].kind() == Value::Kind::string);
    CHECK(a.args[2].is_tuple());
    CHECK(a.args[3].name() == "f");
}

TEST_CASE("term order: integers, symbols, strings, compounds") {
    CHECK(Value::integer(99) < Value::symbol("a"));
    CHECK(Value::symbol("b") < Value::string("a"));
    CHECK(Value::string("z") < Value::tuple({Value::integer(1)}));
    CHECK(Value::integer(-3) < Value::integer(2));
}

TEST_CASE("unsafe variables are grounding errors") {
    CHECK_THROWS_AS(ground_text("p(X) :- not q(X).\nq(1).\n"), GroundingError);
    CHECK_THROWS_AS(ground_text(":- p(A), not B == A.\np(1).\n"), GroundingError);
}

TEST_CASE("arithmetic on symbols is a grounding error") {
    CHECK_THROWS_AS(ground_text("p(a).\nq(Y) :- p(X), Y = X + 1.\n"), GroundingError);
}

TEST_CASE("unstratified negation is unsupported") {
    CHECK_THROWS_AS(ground_text("p :- not q.\nq :- not p.\n"), UnsupportedConstruct);
}

TEST_CASE("undefined body atoms produce a warning") {
    auto g = ground_text("p(1).\nq(X) :- p(X), r(X).\n");
    CHECK_FALSE(g.warnings().empty());
}

TEST_CASE("facts and derived atoms form a single model") {
    auto ms = models_of("e(1,2).\ne(2,3).\np(X,Y) :- e(X,Y).\np(X,Z) :- p(X,Y), e(Y,Z).\n");
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].contains(parse_ground_atom("p(1,3)")));
}

TEST_CASE("choice bounds") {
    CHECK(models_of("{a; b; c}.\n").size() == 8);
    CHECK(models_of("1 {a; b; c} 2.\n").size() == 6);
    CHECK(models_of("2 {a; b; c}.\n").size() == 4);
    CHECK(models_of("{a; b} = 0.\n").size() == 1);
}

TEST_CASE("constraints remove models; an empty result is unsat") {
    CHECK(models_of("{a; b}.\n:- a, b.\n").size() == 3);
    CHECK(models_of("{a; b}.\n:- not a.\n:- not b.\n").size() == 1);
    CHECK(models_of("1 {a} 1.\n:- a.\n").empty());
}

TEST_CASE("stratified negation over guessed atoms") {
    auto ms = models_of("{a}.\nb :- not a.\n");
    REQUIRE(ms.size() == 2);
    for (const auto& m : ms) CHECK(m.atoms.size() == 1);
}

TEST_CASE("cardinality head acts as a filter") {
    auto text = testing::grid3x3_base() + "{A = a1; B = b1} = 1 :- assignment(A, B, _).\n";
    for (const auto& m : models_of(text)) {
        int hits = 0;
        for (const auto& atom : m.atoms) {
            bool a1 = atom.args[0] == Value::symbol("a1");
            bool b1 = atom.args[1] == Value::symbol("b1");
            CHECK((a1 != b1));
            hits += a1;
        }
        CHECK(hits == 1);
    }
}

TEST_CASE("3x3 grid has (3!)^2 models") {
    auto g = ground_text(testing::grid3x3_base());
    auto e = enumerate_models(g, 1000, 0);
    CHECK(e.found == 36);
    CHECK(e.exhausted);
    CHECK(e.models.empty());
}

TEST_CASE("cap stops at cap + 1") {
    auto e = enumerate_models(ground_text(testing::grid3x3_base()), 10, 3);
    CHECK(e.found == 11);
    CHECK_FALSE(e.exhausted);
    CHECK(e.models.size() == 3);
}

TEST_CASE("enumeration agrees with brute force on the grid") {
    auto g = ground_text(testing::grid3x3_base() + ":- assignment(a1, b2, _).\n");
    auto e = enumerate_models(g, 1000);
    CHECK(e.models == brute_force_models(g));
}

TEST_CASE("brute force refuses large spaces") {
    std::string facts = "n(";
    for (int i = 1; i <= 30; ++i) facts += (i > 1 ? ";" : "") + std::to_string(i);
    facts += ").\n{p(X) : n(X)}.\n";
    CHECK_THROWS_AS(brute_force_models(ground_text(facts)), SearchSpaceTooLarge);
}
