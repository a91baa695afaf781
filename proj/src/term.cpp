#include "asploop/term.hpp"

#include <algorithm>

namespace asploop::asp {

Term Term::integer(std::int64_t v) {
    Term t;
    t.kind = Kind::integer;
    t.number = v;
    return t;
}

Term Term::symbol(std::string s) {
    Term t;
    t.kind = Kind::symbol;
    t.name = std::move(s);
    return t;
}

Term Term::variable(std::string s) {
    Term t;
    t.kind = Kind::variable;
    t.name = std::move(s);
    return t;
}

Term Term::anonymous() {
    Term t;
    t.kind = Kind::anonymous;
    return t;
}

Term Term::binary(char op, Term lhs, Term rhs) {
    Term t;
    t.kind = Kind::binary;
    t.op = op;
    t.args.push_back(std::move(lhs));
    t.args.push_back(std::move(rhs));
    return t;
}

Term Term::negate(Term operand) {
    Term t;
    t.kind = Kind::negate;
    t.args.push_back(std::move(operand));
    return t;
}

Term Term::tuple(std::vector<Term> items) {
    Term t;
    t.kind = Kind::tuple;
    t.args = std::move(items);
    return t;
}

bool Term::is_ground() const {
    if (kind == Kind::variable || kind == Kind::anonymous) return false;
    return std::all_of(args.begin(), args.end(), [](const Term& a) { return a.is_ground(); });
}

void Term::collect_variables(std::vector<std::string>& out) const {
    if (kind == Kind::variable) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        return;
    }
    for (const auto& a : args) a.collect_variables(out);
}

bool Term::contains_anonymous() const {
    if (kind == Kind::anonymous) return true;
    return std::any_of(args.begin(), args.end(), [](const Term& a) { return a.contains_anonymous(); });
}

namespace {

bool needs_parens_as_rhs(const Term& t) { return t.kind == Term::Kind::binary; }

}  // namespace

std::string to_string(const Term& t) {
    switch (t.kind) {
    case Term::Kind::integer:
        return std::to_string(t.number);
    case Term::Kind::symbol:
    case Term::Kind::variable:
        return t.name;
    case Term::Kind::anonymous:
        return "_";
    case Term::Kind::negate: {
        const Term& x = t.args[0];
        bool simple = x.kind == Term::Kind::variable || x.kind == Term::Kind::symbol ||
                      x.kind == Term::Kind::tuple;
        return simple ? "-" + to_string(x) : "-(" + to_string(x) + ")";
    }
    case Term::Kind::binary: {
        std::string rhs = to_string(t.args[1]);
        if (needs_parens_as_rhs(t.args[1])) rhs = "(" + rhs + ")";
        return to_string(t.args[0]) + " " + t.op + " " + rhs;
    }
    case Term::Kind::tuple: {
        std::string s = "(";
        for (std::size_t i = 0; i < t.args.size(); ++i) {
            if (i) s += ", ";
            s += to_string(t.args[i]);
        }
        return s + ")";
    }
    }
    return {};
}

Value Value::integer(std::int64_t v) {
    Value x;
    x.kind_ = Kind::integer;
    x.number_ = v;
    return x;
}

Value Value::symbol(std::string s) {
    Value x;
    x.kind_ = Kind::symbol;
    x.name_ = std::move(s);
    return x;
}

Value Value::string(std::string s) {
    Value x;
    x.kind_ = Kind::string;
    x.name_ = std::move(s);
    return x;
}

Value Value::tuple(std::vector<Value> items) { return function({}, std::move(items)); }

Value Value::function(std::string name, std::vector<Value> items) {
    Value x;
    x.kind_ = Kind::compound;
    x.name_ = std::move(name);
    x.items_ = std::move(items);
    return x;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
    switch (a.kind_) {
    case Value::Kind::integer:
        return a.number_ <=> b.number_;
    case Value::Kind::symbol:
    case Value::Kind::string:
        return a.name_.compare(b.name_) <=> 0;
    case Value::Kind::compound:
        if (a.items_.size() != b.items_.size()) return a.items_.size() <=> b.items_.size();
        if (auto c = a.name_.compare(b.name_) <=> 0; c != 0) return c;
        for (std::size_t i = 0; i < a.items_.size(); ++i) {
            if (auto c = a.items_[i] <=> b.items_[i]; c != 0) return c;
        }
        return std::strong_ordering::equal;
    }
    return std::strong_ordering::equal;
}

bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

std::string to_string(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::integer:
        return std::to_string(v.number());
    case Value::Kind::symbol:
        return v.name();
    case Value::Kind::string: {
        std::string s = "\"";
        for (char c : v.name()) {
            if (c == '"' || c == '\\') s += '\\';
            s += c;
        }
        return s + "\"";
    }
    case Value::Kind::compound: {
        std::string s = v.name() + "(";
        for (std::size_t i = 0; i < v.items().size(); ++i) {
            if (i) s += ",";
            s += to_string(v.items()[i]);
        }
        if (v.is_tuple() && v.items().size() == 1) s += ",";
        return s + ")";
    }
    }
    return {};
}

std::strong_ordering operator<=>(const GroundAtom& a, const GroundAtom& b) {
    if (auto c = a.predicate.compare(b.predicate) <=> 0; c != 0) return c;
    if (a.args.size() != b.args.size()) return a.args.size() <=> b.args.size();
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (auto c = a.args[i] <=> b.args[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
}

std::string to_string(const GroundAtom& a) {
    if (a.args.empty()) return a.predicate;
    std::string s = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(a.args[i]);
    }
    return s + ")";
}

}  // namespace asploop::asp
