#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asploop/puzzle.hpp"
#include "asploop/solver.hpp"

namespace asploop {

/// Lowercase; each run of non-alphanumerics becomes one '_'; outer '_' trimmed.
std::string normalize_surface(std::string_view raw);

/// Unit-cost Levenshtein distance, case sensitive.
std::size_t edit_distance(std::string_view a, std::string_view b);

enum class MatchMethod { exact, levenshtein };

std::string to_string(MatchMethod m);

struct ItemLink {
    std::size_t gt_row = 0, gt_item = 0;
    std::size_t row = 0, position = 0;  // computed side
    std::size_t distance = 0;
};

struct MatchReport {
    bool matched = false;
    MatchMethod method = MatchMethod::exact;
    std::map<std::size_t, std::size_t> assignment_map;  // ground-truth row -> computed row (0-based)
    std::vector<std::vector<ItemLink>> item_matrix;     // [gt row][gt item]
    std::vector<std::size_t> position_category;          // computed argument position -> category
    std::vector<std::string> diagnostics;
};

/// Rows are compared as given; each row must have m items.
MatchReport match_tuples(const std::vector<std::vector<std::string>>& rows, const PuzzleInstance& instance,
                         bool allow_exact = true);

/// Extracts target_predicate tuples from the model, then match_tuples.
MatchReport match_solution(const asp::AnswerSet& model, const PuzzleInstance& instance,
                           const std::string& target_predicate, bool allow_exact = true);

/// Predicate with arity m and n atoms in the model; "assignment" wins ties.
std::optional<std::string> detect_target_predicate(const asp::AnswerSet& model, const PuzzleInstance& instance);

/// Value text used for matching: symbols and integers as printed, strings unquoted.
std::string surface_of(const asp::Value& v);

}  // namespace asploop
