#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace asploop::asp {

/// Non-ground term as written in a program.
struct Term {
    enum class Kind { integer, symbol, variable, anonymous, binary, negate, tuple };

    Kind kind = Kind::integer;
    std::int64_t number = 0;
    std::string name;        // symbol or variable name
    char op = 0;             // '+' or '-' for binary
    std::vector<Term> args;  // binary: {lhs, rhs}; negate: {operand}; tuple: items

    static Term integer(std::int64_t v);
    static Term symbol(std::string s);
    static Term variable(std::string s);
    static Term anonymous();
    static Term binary(char op, Term lhs, Term rhs);
    static Term negate(Term operand);
    static Term tuple(std::vector<Term> items);

    bool is_ground() const;
    void collect_variables(std::vector<std::string>& out) const;
    bool contains_anonymous() const;

    friend bool operator==(const Term&, const Term&) = default;
};

std::string to_string(const Term& t);

/// Ground term. Ordering follows clingo: integers by value < symbolic
/// constants (lexicographic) < strings < compound terms, which compare by
/// arity, then name, then arguments. Tuples are compounds with an empty name.
/// Strings and named compounds only arrive through external solver output.
class Value {
public:
    enum class Kind : std::uint8_t { integer = 0, symbol = 1, string = 2, compound = 3 };

    Value() = default;
    static Value integer(std::int64_t v);
    static Value symbol(std::string s);
    static Value string(std::string s);
    static Value tuple(std::vector<Value> items);
    static Value function(std::string name, std::vector<Value> items);

    bool is_tuple() const { return kind_ == Kind::compound && name_.empty(); }

    Kind kind() const { return kind_; }
    std::int64_t number() const { return number_; }
    const std::string& name() const { return name_; }
    const std::vector<Value>& items() const { return items_; }

    friend std::strong_ordering operator<=>(const Value& a, const Value& b);
    friend bool operator==(const Value& a, const Value& b);

private:
    Kind kind_ = Kind::integer;
    std::int64_t number_ = 0;
    std::string name_;
    std::vector<Value> items_;
};

std::string to_string(const Value& v);

/// Ground atom, e.g. assignment(anniversary,susan,75).
struct GroundAtom {
    std::string predicate;
    std::vector<Value> args;

    friend std::strong_ordering operator<=>(const GroundAtom& a, const GroundAtom& b);
    friend bool operator==(const GroundAtom& a, const GroundAtom& b) = default;
};

std::string to_string(const GroundAtom& a);

}  // namespace asploop::asp
