#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asploop/puzzle.hpp"
#include "asploop/verdict.hpp"

namespace asploop {

enum class Label { chosen, rejected };

std::string to_string(Label l);

struct CandidateEncoding {
    std::string text;  // extracted ASP block
    std::string raw;   // completion as returned by the generator
    std::optional<SolverVerdict> verdict;
    std::optional<RewardValue> reward;
    std::optional<Label> label;
    std::size_t token_count = 0;
};

struct Step {
    std::string input_text;                 // base prompt for step 0, hint text afterwards
    std::string prompt;                     // full prompt sent to the generator
    std::optional<std::size_t> hint_index;  // none for step 0
    std::vector<CandidateEncoding> candidates;
    std::optional<std::size_t> selected_index;

    const CandidateEncoding* selected() const;
};

struct Trajectory {
    std::string instance_id;
    std::vector<Step> steps;
    std::vector<std::size_t> dropped_hints;
};

struct Exemplar {
    std::string input;     // description + entities (+ hints) of another puzzle
    std::string encoding;  // its ASP encoding
};

/// Shipped instruction text; --preamble replaces it.
const std::string& default_preamble();

/// Closing request of a base prompt and of a hint prompt. Prompts end with these.
const std::string& base_request();
const std::string& hint_request();

std::string render_catalog(const PuzzleInstance& instance);

std::string build_base_prompt(const PuzzleInstance& instance, const std::vector<Exemplar>& shots,
                              const std::string& preamble = default_preamble());

/// Throws std::logic_error on an empty trajectory or an unselected step.
std::string build_hint_prompt(const Trajectory& trajectory, const std::string& hint);

/// Selected blocks in step order, plus extra, newline separated.
std::string combine(const Trajectory& trajectory, const CandidateEncoding* extra = nullptr);

std::string extract_code(std::string_view raw);

}  // namespace asploop
