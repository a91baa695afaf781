#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "asploop/grounder.hpp"
#include "asploop/term.hpp"

namespace asploop::asp {

/// Sorted, duplicate-free set of ground atoms.
struct AnswerSet {
    std::vector<GroundAtom> atoms;

    AnswerSet() = default;
    explicit AnswerSet(std::vector<GroundAtom> a);

    bool contains(const GroundAtom& a) const;

    friend auto operator<=>(const AnswerSet&, const AnswerSet&) = default;
    friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

/// Atoms separated by single spaces, clingo style.
std::string to_string(const AnswerSet& m);

struct Enumeration {
    std::vector<AnswerSet> models;  // sorted; at most `keep` of them
    std::size_t found = 0;          // models seen, at most cap + 1
    bool exhausted = false;         // search space fully explored within the cap
};

/// Stops after cap + 1 models. Only the first `keep` models found are kept
/// (then sorted); `found` still counts every one.
Enumeration enumerate_models(const GroundProgram& program, std::size_t cap,
                             std::size_t keep = std::numeric_limits<std::size_t>::max());

class SearchSpaceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double brute_force_limit = 1e7;

/// Tries every per-choice subset combination. Slow on purpose; used as a test oracle.
std::vector<AnswerSet> brute_force_models(const GroundProgram& program);

}  // namespace asploop::asp
