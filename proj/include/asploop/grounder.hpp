#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "asploop/ast.hpp"
#include "asploop/parser.hpp"
#include "asploop/term.hpp"

namespace asploop::asp {

using AtomId = std::uint32_t;

/// Unsafe variables and arithmetic over non-integers.
class GroundingError : public AspError {
public:
    GroundingError(std::size_t line, const std::string& message)
        : AspError(std::to_string(line) + ": grounding error: " + message, line, 0) {}
};

/// One ground instance of a choice rule whose body holds.
struct GroundChoice {
    std::int64_t lower = 0;
    std::optional<std::int64_t> upper;
    std::vector<AtomId> atoms;  // distinct
    std::size_t statement = 0;
};

/// Definite rule over guessed or derived atoms. Body atoms whose truth is
/// fixed by the facts have already been evaluated away.
struct GroundRule {
    AtomId head = 0;
    std::vector<AtomId> positive;
    std::vector<AtomId> negative;
    std::size_t stratum = 0;
    std::size_t statement = 0;
};

/// Violated when every positive atom is true and every negative atom false.
/// Cardinality-head rules whose count is wrong for an instance end up here.
struct GroundConstraint {
    std::vector<AtomId> positive;
    std::vector<AtomId> negative;
    std::size_t statement = 0;
};

class GroundProgram {
public:
    const std::vector<GroundAtom>& atoms() const { return atoms_; }
    const GroundAtom& atom(AtomId id) const { return atoms_[id]; }
    std::optional<AtomId> find(const GroundAtom& a) const;

    /// Atoms true in every model.
    const std::vector<AtomId>& facts() const { return facts_; }
    const std::vector<GroundChoice>& choices() const { return choices_; }
    /// Sorted by stratum.
    const std::vector<GroundRule>& rules() const { return rules_; }
    const std::vector<GroundConstraint>& constraints() const { return constraints_; }

    /// Solver-style informational diagnostics, e.g. body atoms that occur in no head.
    const std::vector<std::string>& warnings() const { return warnings_; }

    std::size_t statement_count() const { return statement_count_; }

private:
    friend class Grounder;

    AtomId intern(GroundAtom a);

    std::vector<GroundAtom> atoms_;
    std::unordered_map<std::string, AtomId> index_;
    std::vector<AtomId> facts_;
    std::vector<GroundChoice> choices_;
    std::vector<GroundRule> rules_;
    std::vector<GroundConstraint> constraints_;
    std::vector<std::string> warnings_;
    std::size_t statement_count_ = 0;
};

/// Instantiates every variable against the atoms derivable from the facts and
/// choice heads. Throws GroundingError (unsafe variable, bad arithmetic) or
/// UnsupportedConstruct (unstratified negation, choice rules that depend on
/// guessed atoms, negated literals with anonymous variables).
GroundProgram ground(const std::vector<Statement>& statements);

}  // namespace asploop::asp
