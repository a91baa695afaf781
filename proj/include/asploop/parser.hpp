#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asploop/ast.hpp"

namespace asploop::asp {

/// Base class for diagnostics raised while reading or grounding a program.
class AspError : public std::runtime_error {
public:
    AspError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what), line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class SyntaxError : public AspError {
public:
    SyntaxError(std::size_t line, std::size_t column, std::string token, const std::string& message);
    const std::string& token() const { return token_; }

private:
    std::string token_;
};

/// Well-formed input outside the in-process fragment. Callers may fall back to
/// the external solver when they see this.
class UnsupportedConstruct : public AspError {
public:
    UnsupportedConstruct(std::size_t line, std::size_t column, std::string construct);
    const std::string& construct() const { return construct_; }

private:
    std::string construct_;
};

/// Pooled facts are expanded; '%' line comments and '%* *%' block comments
/// are skipped. Statements keep source order and verbatim text.
std::vector<Statement> parse_program(std::string_view text);

/// Reads one ground atom in solver output syntax, e.g. "assignment(a,\"b c\",(1,2))".
/// Accepts strings and function terms, which the program parser rejects.
GroundAtom parse_ground_atom(std::string_view text);

}  // namespace asploop::asp
