#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "asploop/term.hpp"

namespace asploop::asp {

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    std::string signature() const { return predicate + "/" + std::to_string(args.size()); }

    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class CmpOp { eq, ne, lt, gt, le, ge };

/// "=" and "==" both parse to CmpOp::eq.
std::string_view to_string(CmpOp op);
bool evaluate(CmpOp op, const Value& lhs, const Value& rhs);

struct Comparison {
    Term lhs;
    CmpOp op = CmpOp::eq;
    Term rhs;

    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct BodyLiteral {
    bool negated = false;
    std::variant<Atom, Comparison> content;

    bool is_atom() const { return std::holds_alternative<Atom>(content); }
    const Atom& atom() const { return std::get<Atom>(content); }
    const Comparison& comparison() const { return std::get<Comparison>(content); }

    friend bool operator==(const BodyLiteral&, const BodyLiteral&) = default;
};

struct ChoiceElement {
    Atom atom;
    std::vector<BodyLiteral> condition;

    friend bool operator==(const ChoiceElement&, const ChoiceElement&) = default;
};

enum class StatementKind { fact, rule, constraint, choice, cardinality };

std::string_view to_string(StatementKind k);

struct Statement {
    StatementKind kind = StatementKind::fact;

    // fact / rule
    std::optional<Atom> head;

    // choice: lower { elements } upper
    std::int64_t lower = 0;
    std::optional<std::int64_t> upper;
    std::vector<ChoiceElement> elements;

    // cardinality: { comparisons } = count
    std::vector<Comparison> comparisons;
    std::int64_t count = 0;

    std::vector<BodyLiteral> body;

    // Provenance; not part of equality.
    std::string source_text;
    std::size_t line = 0;
    std::size_t group = 0;  // pooled facts share a group index

    bool same_structure(const Statement& other) const;
};

std::string to_string(const Atom& a);
std::string to_string(const Comparison& c);
std::string to_string(const BodyLiteral& l);

/// Canonical single-line rendering; parse(to_string(s)) reproduces s.
std::string to_string(const Statement& s);
std::string to_string(const std::vector<Statement>& program);

}  // namespace asploop::asp
