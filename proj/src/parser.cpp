#include "asploop/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace asploop::asp {

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::string token,
                         const std::string& message)
    : AspError(std::to_string(line) + ":" + std::to_string(column) + ": syntax error: " + message +
                   (token.empty() ? std::string() : " at '" + token + "'"),
               line, column),
      token_(std::move(token)) {}

UnsupportedConstruct::UnsupportedConstruct(std::size_t line, std::size_t column, std::string construct)
    : AspError(std::to_string(line) + ":" + std::to_string(column) + ": unsupported construct: " + construct,
               line, column),
      construct_(std::move(construct)) {}

namespace {

enum class Tok { ident, variable, anonymous, integer, string, directive, punct, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
    std::size_t begin;
    std::size_t end;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::end, "", line_, col_, pos_, pos_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    void advance(std::size_t k = 1) {
        for (std::size_t i = 0; i < k && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_blank() {
        for (;;) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '%' && peek(1) == '*') {
                std::size_t line = line_, col = col_;
                advance(2);
                while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '%')) advance();
                if (pos_ >= src_.size()) throw SyntaxError(line, col, "%*", "unterminated block comment");
                advance(2);
            } else if (c == '%') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else {
                return;
            }
        }
    }

    Token next() {
        Token t{Tok::punct, "", line_, col_, pos_, pos_};
        char c = peek();
        auto take = [&](Tok kind, std::size_t len) {
            t.kind = kind;
            t.text = std::string(src_.substr(pos_, len));
            advance(len);
            t.end = pos_;
            return t;
        };
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t len = 0;
            while (std::isdigit(static_cast<unsigned char>(peek(len)))) ++len;
            return take(Tok::integer, len);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '\'') {
            std::size_t len = 0;
            while (peek(len) == '_' || peek(len) == '\'') ++len;
            std::size_t lead = len;
            while (ident_char(peek(len))) ++len;
            if (len == 1 && c == '_') return take(Tok::anonymous, 1);
            char first = peek(lead);
            Tok kind = std::isupper(static_cast<unsigned char>(first)) ? Tok::variable : Tok::ident;
            if (lead == len) kind = Tok::anonymous;  // only underscores/quotes
            return take(kind, len);
        }
        if (c == '#') {
            std::size_t len = 1;
            while (ident_char(peek(len))) ++len;
            return take(Tok::directive, len);
        }
        if (c == '"') {
            std::size_t len = 1;
            while (peek(len) != '"') {
                if (peek(len) == '\0' || peek(len) == '\n') throw SyntaxError(line_, col_, "\"", "unterminated string");
                if (peek(len) == '\\') ++len;
                ++len;
            }
            return take(Tok::string, len + 1);
        }
        static constexpr std::string_view two[] = {":-", ":~", "..", "==", "!=", "<=", ">=", "<>", "**"};
        for (auto p : two) {
            if (src_.substr(pos_, 2) == p) return take(Tok::punct, 2);
        }
        static constexpr std::string_view one = "(){}[],;.:=<>+-*/\\|&@^?~!";
        if (one.find(c) != std::string_view::npos) return take(Tok::punct, 1);
        throw SyntaxError(line_, col_, std::string(1, c), "unexpected character");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

bool is_cmp(const Token& t) {
    if (t.kind != Tok::punct) return false;
    return t.text == "=" || t.text == "==" || t.text == "!=" || t.text == "<" || t.text == ">" ||
           t.text == "<=" || t.text == ">=" || t.text == "<>";
}

CmpOp cmp_of(const std::string& s) {
    if (s == "=" || s == "==") return CmpOp::eq;
    if (s == "!=" || s == "<>") return CmpOp::ne;
    if (s == "<") return CmpOp::lt;
    if (s == ">") return CmpOp::gt;
    if (s == "<=") return CmpOp::le;
    return CmpOp::ge;
}

class Parser {
public:
    Parser(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

    std::vector<Statement> program() {
        std::vector<Statement> out;
        std::size_t group = 0;
        while (cur().kind != Tok::end) {
            auto stmts = statement();
            for (auto& s : stmts) {
                s.group = group;
                out.push_back(std::move(s));
            }
            ++group;
        }
        return out;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    const Token& ahead(std::size_t k = 1) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool at(std::string_view p) const { return cur().kind == Tok::punct && cur().text == p; }

    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = cur();
        throw SyntaxError(t.line, t.column, t.kind == Tok::end ? "<end of input>" : t.text, msg);
    }
    [[noreturn]] void unsupported(const std::string& what) const {
        throw UnsupportedConstruct(cur().line, cur().column, what);
    }

    void expect(std::string_view p, const char* msg) {
        if (!at(p)) fail(msg);
        ++i_;
    }

    std::vector<Statement> statement() {
        const Token& first = cur();
        std::size_t begin = first.begin;
        Statement s;
        s.line = first.line;
        std::vector<std::vector<Term>> pool;

        if (first.kind == Tok::directive) unsupported("directive " + first.text);
        if (at(":~")) unsupported("weak constraint");
        if (at(":-")) {
            ++i_;
            s.kind = StatementKind::constraint;
            s.body = body();
        } else {
            head(s, pool);
            if (at(":-")) {
                ++i_;
                s.body = body();
            }
        }
        if (!at(".")) fail("expected '.' at end of statement");
        std::size_t end = cur().end;
        ++i_;
        s.source_text = std::string(src_.substr(begin, end - begin));

        if (s.kind == StatementKind::fact || s.kind == StatementKind::rule) {
            if (pool.size() > 1 && !s.body.empty()) unsupported("pooling outside facts");
            s.kind = s.body.empty() ? StatementKind::fact : StatementKind::rule;
            std::vector<Statement> out;
            for (auto& args : pool) {
                Statement e = s;
                e.head->args = std::move(args);
                out.push_back(std::move(e));
            }
            return out;
        }
        return {std::move(s)};
    }

    void head(Statement& s, std::vector<std::vector<Term>>& pool) {
        if (cur().kind == Tok::integer && ahead().kind == Tok::punct && ahead().text == "{") {
            aggregate_head(s);
            return;
        }
        if (at("{")) {
            aggregate_head(s);
            return;
        }
        if (cur().kind == Tok::directive) unsupported("aggregate " + cur().text);
        if (at("-")) unsupported("classical negation");
        if ((cur().kind == Tok::integer || cur().kind == Tok::variable) &&
            (is_cmp(ahead()) || (ahead().kind == Tok::punct && ahead().text == "{")))
            unsupported("aggregate with term bounds");
        if (cur().kind != Tok::ident || cur().text == "not") fail("expected a rule head");
        s.head = Atom{cur().text, {}};
        ++i_;
        pool.emplace_back();
        if (at("(")) {
            ++i_;
            pool.clear();
            for (;;) {
                std::vector<Term> args;
                for (;;) {
                    args.push_back(term());
                    if (!at(",")) break;
                    ++i_;
                }
                pool.push_back(std::move(args));
                if (!at(";")) break;
                ++i_;
            }
            expect(")", "expected ')' after arguments");
        }
        if (at(";") || at("|")) unsupported("disjunctive head");
        if (is_cmp(cur())) unsupported("comparison in rule head");
        s.kind = StatementKind::rule;
        s.head->args = pool.front();
    }

    void aggregate_head(Statement& s) {
        std::optional<std::int64_t> lower;
        if (cur().kind == Tok::integer) {
            lower = integer_value(cur());
            ++i_;
        }
        expect("{", "expected '{'");
        std::vector<ChoiceElement> atoms;
        std::vector<Comparison> cmps;
        if (!at("}")) {
            for (;;) {
                if (cur().kind == Tok::ident && !is_cmp(ahead()) &&
                    !(ahead().kind == Tok::punct && (ahead().text == "+" || ahead().text == "-"))) {
                    ChoiceElement e;
                    e.atom = atom();
                    if (is_cmp(cur())) unsupported("function term");
                    if (at(":")) {
                        ++i_;
                        for (;;) {
                            e.condition.push_back(literal());
                            if (!at(",")) break;
                            ++i_;
                        }
                    }
                    atoms.push_back(std::move(e));
                } else {
                    cmps.push_back(comparison());
                    if (at(":")) unsupported("conditional comparison element");
                }
                if (!at(";")) break;
                ++i_;
            }
        }
        expect("}", "expected '}' to close aggregate head");
        if (!atoms.empty() && !cmps.empty()) unsupported("mixed atom/comparison aggregate head");

        std::optional<std::int64_t> upper;
        std::optional<std::int64_t> exact;
        if (at("=") || at("==")) {
            if (lower) unsupported("aggregate with two bounds styles");
            ++i_;
            if (cur().kind != Tok::integer) unsupported("non-integer aggregate bound");
            exact = integer_value(cur());
            ++i_;
        } else if (cur().kind == Tok::integer) {
            upper = integer_value(cur());
            ++i_;
        } else if (is_cmp(cur())) {
            unsupported("aggregate bound operator " + cur().text);
        } else if (cur().kind == Tok::variable) {
            unsupported("aggregate with term bounds");
        }

        if (!cmps.empty()) {
            s.kind = StatementKind::cardinality;
            s.comparisons = std::move(cmps);
            if (exact) {
                s.count = *exact;
            } else if (lower && upper && *lower == *upper) {
                s.count = *lower;
            } else {
                unsupported("comparison aggregate without exact count");
            }
            return;
        }
        s.kind = StatementKind::choice;
        s.elements = std::move(atoms);
        if (exact) {
            s.lower = *exact;
            s.upper = *exact;
        } else {
            s.lower = lower.value_or(0);
            s.upper = upper;
        }
        if (s.lower < 0) fail("negative choice bound");
    }

    std::vector<BodyLiteral> body() {
        std::vector<BodyLiteral> out;
        for (;;) {
            out.push_back(literal());
            if (at(",") || at(";")) {
                ++i_;
                continue;
            }
            break;
        }
        return out;
    }

    BodyLiteral literal() {
        BodyLiteral l;
        if (cur().kind == Tok::ident && cur().text == "not") {
            ++i_;
            l.negated = true;
            if (cur().kind == Tok::ident && cur().text == "not") unsupported("double negation");
        }
        if (cur().kind == Tok::directive) {
            if (cur().text == "#true" || cur().text == "#false") unsupported("boolean constant " + cur().text);
            unsupported("aggregate " + cur().text);
        }
        if (at("{")) unsupported("body aggregate");
        if (at("-") && ahead().kind == Tok::ident) unsupported("classical negation");
        if (cur().kind == Tok::ident && !is_cmp(ahead()) && ahead().text != "+" && ahead().text != "-") {
            l.content = atom();
            if (is_cmp(cur())) unsupported("function term");
            if (at("..")) unsupported("interval");
            return l;
        }
        l.content = comparison();
        return l;
    }

    Atom atom() {
        if (cur().kind != Tok::ident) fail("expected an atom");
        Atom a{cur().text, {}};
        ++i_;
        if (at("(")) {
            ++i_;
            if (!at(")")) {
                for (;;) {
                    a.args.push_back(term());
                    if (at(";")) unsupported("pooling outside facts");
                    if (!at(",")) break;
                    ++i_;
                }
            }
            expect(")", "expected ')' after arguments");
        }
        return a;
    }

    Comparison comparison() {
        Comparison c;
        c.lhs = term();
        if (!is_cmp(cur())) fail("expected a comparison operator");
        c.op = cmp_of(cur().text);
        ++i_;
        c.rhs = term();
        return c;
    }

    Term term() {
        Term t = unary();
        for (;;) {
            if (at("+") || at("-")) {
                char op = cur().text[0];
                ++i_;
                t = Term::binary(op, std::move(t), unary());
            } else if (at("*") || at("/") || at("\\") || at("**") || at("&") || at("^") || at("?")) {
                unsupported("arithmetic operator " + cur().text);
            } else if (at("..")) {
                unsupported("interval");
            } else {
                return t;
            }
        }
    }

    Term unary() {
        if (at("-")) {
            ++i_;
            if (cur().kind == Tok::integer) {
                auto v = integer_value(cur(), true);
                ++i_;
                return Term::integer(v);
            }
            return Term::negate(unary());
        }
        if (at("|")) unsupported("absolute value");
        if (at("~")) unsupported("bitwise negation");
        return primary();
    }

    Term primary() {
        const Token& t = cur();
        switch (t.kind) {
        case Tok::integer: {
            auto v = integer_value(t);
            ++i_;
            return Term::integer(v);
        }
        case Tok::variable:
            ++i_;
            return Term::variable(t.text);
        case Tok::anonymous:
            ++i_;
            return Term::anonymous();
        case Tok::ident:
            if (ahead().kind == Tok::punct && ahead().text == "(") unsupported("function term");
            if (t.text == "not") fail("unexpected 'not' in term");
            ++i_;
            return Term::symbol(t.text);
        case Tok::string:
            unsupported("string constant");
        case Tok::directive:
            unsupported("special term " + t.text);
        case Tok::punct:
            if (t.text == "(") {
                ++i_;
                if (at(")")) unsupported("empty tuple");
                std::vector<Term> items;
                items.push_back(term());
                bool tuple = false;
                while (at(",")) {
                    tuple = true;
                    ++i_;
                    if (at(")")) unsupported("one-element tuple");
                    items.push_back(term());
                }
                if (at(";")) unsupported("pooling outside facts");
                expect(")", "expected ')'");
                if (!tuple) return std::move(items.front());
                return Term::tuple(std::move(items));
            }
            fail("expected a term");
        case Tok::end:
            fail("unexpected end of input");
        }
        fail("expected a term");
    }

    std::int64_t integer_value(const Token& t, bool negative = false) const {
        std::string digits = negative ? "-" + t.text : t.text;
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc() || ptr != digits.data() + digits.size())
            throw SyntaxError(t.line, t.column, t.text, "integer out of range");
        return v;
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

// Solver output reader: name[(v, ...)] with v ::= int | -int | "str" | name[(...)] | (...)
class OutputReader {
public:
    explicit OutputReader(std::string_view s) : s_(s) {}

    GroundAtom atom() {
        GroundAtom a;
        a.predicate = name();
        if (a.predicate.empty()) fail();
        if (peek() == '(') a.args = args();
        if (pos_ != s_.size()) fail();
        return a;
    }

private:
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    [[noreturn]] void fail() const {
        throw SyntaxError(1, pos_ + 1, std::string(s_), "malformed atom in solver output");
    }

    std::string name() {
        std::size_t b = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(b, pos_ - b));
    }

    std::vector<Value> args() {
        ++pos_;  // '('
        std::vector<Value> out;
        if (peek() == ')') {
            ++pos_;
            return out;
        }
        for (;;) {
            out.push_back(value());
            if (peek() == ',') {
                ++pos_;
                if (peek() == ')') {  // "(x,)" one-element tuple
                    ++pos_;
                    return out;
                }
                continue;
            }
            if (peek() != ')') fail();
            ++pos_;
            return out;
        }
    }

    Value value() {
        char c = peek();
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t b = pos_;
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(s_.data() + b, s_.data() + pos_, v);
            if (ec != std::errc() || ptr != s_.data() + pos_) fail();
            return Value::integer(v);
        }
        if (c == '"') {
            ++pos_;
            std::string out;
            while (peek() != '"') {
                if (peek() == '\0') fail();
                if (peek() == '\\') ++pos_;
                out += s_[pos_++];
            }
            ++pos_;
            return Value::string(std::move(out));
        }
        if (c == '(') return Value::tuple(args());
        std::string n = name();
        if (n.empty()) fail();
        if (peek() == '(') return Value::function(std::move(n), args());
        return Value::symbol(std::move(n));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Statement> parse_program(std::string_view text) {
    Lexer lexer(text);
    Parser parser(text, lexer.run());
    return parser.program();
}

GroundAtom parse_ground_atom(std::string_view text) { return OutputReader(text).atom(); }

}  // namespace asploop::asp
