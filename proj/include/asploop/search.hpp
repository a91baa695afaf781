#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asploop/datagen.hpp"

namespace asploop {

struct SearchConfig {
    std::size_t n = 5;
    double temperature = 1.0;
    std::size_t backtrack_limit = 5;
    std::size_t regen_multiplier = 2;
    bool enable_regeneration = true;
    std::optional<std::size_t> cap;  // default: classification_cap
    std::vector<Exemplar> shots;
    std::string preamble = default_preamble();
    bool parallel_solves = true;
};

/// kind is one of generate, rank, regenerate, select, backtrack, accept_negative, final.
struct TraceEvent {
    std::string kind;
    std::size_t step = 0;  // 0 base, i + 1 for hint i
    nlohmann::ordered_json data = nlohmann::ordered_json::object();
};

struct SearchOutcome {
    std::string instance_id;
    std::string final_program;
    SolverVerdict final_verdict = SolverVerdict::error({"search did not finish"});
    std::optional<std::vector<std::vector<std::string>>> predicted_solution;
    Trajectory trajectory;  // selected path after the last backtrack
    std::vector<TraceEvent> trace;
    std::size_t total_output_tokens = 0;
    std::size_t generator_calls = 0;
    bool aborted = false;
    std::string abort_reason;

    std::size_t count(const std::string& kind) const;
};

/// Argmax over rewards; lowest index wins ties. Candidates without a reward are skipped.
std::optional<std::size_t> select_best(const std::vector<CandidateEncoding>& candidates);

/// Scores every candidate against the trajectory: the strict variant when
/// hint_index is empty (base step), reward otherwise.
void score_candidates(std::vector<CandidateEncoding>& candidates, const Trajectory& trajectory,
                      const PuzzleInstance& instance, std::optional<std::size_t> hint_index, std::size_t cap,
                      const SolveContext& ctx, bool parallel = true);

/// One greedy step: n samples, scored, best one selected.
Step best_of_n_step(const Trajectory& trajectory, const PuzzleInstance& instance,
                    std::optional<std::size_t> hint_index, Generator& generator, const SolveContext& ctx,
                    const SearchConfig& config = {});

SearchOutcome run_search(const PuzzleInstance& instance, Generator& generator, const SolveContext& ctx,
                         const SearchConfig& config = {});

nlohmann::ordered_json to_json(const TraceEvent& e, const std::string& instance_id, std::size_t seq);

/// Outcome without the trace; the selected path is listed per step.
nlohmann::ordered_json to_json(const SearchOutcome& o);

/// Per-instance result row.
struct OutcomeRow {
    std::string instance_id;
    std::string category;  // correct or one of the failure buckets
    std::size_t models = 0;
    std::size_t output_tokens = 0;
    std::size_t backtracks = 0, regenerations = 0;
    std::string size, difficulty;
};

struct Split {
    std::size_t total = 0, correct = 0;
    double accuracy() const { return total ? double(correct) / double(total) : 0.0; }
};

struct AccuracyReport {
    std::size_t total = 0, correct = 0;
    std::map<std::string, std::size_t> buckets;  // every failure bucket, zero or not
    std::map<std::string, Split> by_size, by_difficulty;
    double mean_output_tokens = 0;
    std::vector<OutcomeRow> rows;

    double accuracy() const { return total ? double(correct) / double(total) : 0.0; }
};

inline const std::vector<std::string>& failure_buckets() {
    static const std::vector<std::string> names{"error", "unsat", "multiple-models", "wrong-unique-model",
                                                "cap-exceeded"};
    return names;
}

/// "correct" or the failure bucket of one outcome.
std::string categorize(const SearchOutcome& outcome, const PuzzleInstance& instance);

/// Throws std::invalid_argument when the lists differ in length.
AccuracyReport evaluate_accuracy(const std::vector<SearchOutcome>& outcomes,
                                 const std::vector<PuzzleInstance>& instances);

nlohmann::ordered_json to_json(const AccuracyReport& r);
std::string buckets_csv(const AccuracyReport& r);
std::string outcomes_csv(const AccuracyReport& r);

}  // namespace asploop
