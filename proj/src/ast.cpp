#include "asploop/ast.hpp"

namespace asploop::asp {

std::string_view to_string(CmpOp op) {
    switch (op) {
    case CmpOp::eq: return "=";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::gt: return ">";
    case CmpOp::le: return "<=";
    case CmpOp::ge: return ">=";
    }
    return "?";
}

bool evaluate(CmpOp op, const Value& lhs, const Value& rhs) {
    auto c = lhs <=> rhs;
    switch (op) {
    case CmpOp::eq: return c == 0;
    case CmpOp::ne: return c != 0;
    case CmpOp::lt: return c < 0;
    case CmpOp::gt: return c > 0;
    case CmpOp::le: return c <= 0;
    case CmpOp::ge: return c >= 0;
    }
    return false;
}

std::string_view to_string(StatementKind k) {
    switch (k) {
    case StatementKind::fact: return "fact";
    case StatementKind::rule: return "rule";
    case StatementKind::constraint: return "constraint";
    case StatementKind::choice: return "choice-rule";
    case StatementKind::cardinality: return "cardinality-head-rule";
    }
    return "?";
}

bool Statement::same_structure(const Statement& o) const {
    return kind == o.kind && head == o.head && lower == o.lower && upper == o.upper &&
           elements == o.elements && comparisons == o.comparisons && count == o.count &&
           body == o.body;
}

std::string to_string(const Atom& a) {
    if (a.args.empty()) return a.predicate;
    std::string s = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(a.args[i]);
    }
    return s + ")";
}

std::string to_string(const Comparison& c) {
    return to_string(c.lhs) + " " + std::string(to_string(c.op)) + " " + to_string(c.rhs);
}

std::string to_string(const BodyLiteral& l) {
    std::string s = l.negated ? "not " : "";
    if (l.is_atom()) return s + to_string(l.atom());
    return s + to_string(l.comparison());
}

namespace {

std::string join_body(const std::vector<BodyLiteral>& body) {
    std::string s;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i) s += ", ";
        s += to_string(body[i]);
    }
    return s;
}

}  // namespace

std::string to_string(const Statement& s) {
    std::string head;
    switch (s.kind) {
    case StatementKind::fact:
    case StatementKind::rule:
        head = to_string(*s.head);
        break;
    case StatementKind::constraint:
        break;
    case StatementKind::choice: {
        if (s.lower != 0) head = std::to_string(s.lower) + " ";
        head += "{ ";
        for (std::size_t i = 0; i < s.elements.size(); ++i) {
            if (i) head += "; ";
            head += to_string(s.elements[i].atom);
            if (!s.elements[i].condition.empty()) head += " : " + join_body(s.elements[i].condition);
        }
        head += " }";
        if (s.upper) head += " " + std::to_string(*s.upper);
        break;
    }
    case StatementKind::cardinality: {
        head = "{ ";
        for (std::size_t i = 0; i < s.comparisons.size(); ++i) {
            if (i) head += "; ";
            head += to_string(s.comparisons[i]);
        }
        head += " } = " + std::to_string(s.count);
        break;
    }
    }
    if (s.body.empty()) return head + ".";
    if (head.empty()) return ":- " + join_body(s.body) + ".";
    return head + " :- " + join_body(s.body) + ".";
}

std::string to_string(const std::vector<Statement>& program) {
    std::string out;
    for (const auto& s : program) {
        out += to_string(s);
        out += '\n';
    }
    return out;
}

}  // namespace asploop::asp
