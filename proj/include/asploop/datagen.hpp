#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asploop/gateway.hpp"
#include "asploop/generator.hpp"
#include "asploop/puzzle.hpp"
#include "asploop/trajectory.hpp"

namespace asploop {

/// Which solver to use and how; shared by datagen and search.
struct SolveContext {
    const SolverGateway& gateway;
    Backend backend = Backend::automatic;
};

/// 4 * (n!)^(m-1), bounded by the gateway default.
std::size_t classification_cap(const PuzzleInstance& instance);

/// True when some model of the verdict matches the ground truth.
bool verdict_contains_solution(const SolverVerdict& verdict, const PuzzleInstance& instance);

/// Hint step: chosen iff flagless and some model matches the ground truth.
Label classify(CandidateEncoding& candidate, const Trajectory& trajectory, const PuzzleInstance& instance,
               std::size_t cap, const SolveContext& ctx);

/// Step 0: chosen iff flagless and exactly (n!)^(m-1) models.
Label classify_base(CandidateEncoding& candidate, const PuzzleInstance& instance, std::size_t cap,
                    const SolveContext& ctx);

struct RecordMeta {
    std::string instance_id;
    std::size_t step = 0;  // 0 for the base step, i + 1 for hint i
    std::string branch;

    friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct SftRecord {
    std::string prompt, completion;
    RecordMeta meta;

    friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

struct PreferenceRecord {
    std::string prompt, chosen, rejected;
    RecordMeta meta;

    friend bool operator==(const PreferenceRecord&, const PreferenceRecord&) = default;
};

struct StepStat {
    std::size_t step = 0;
    std::string branch;
    std::size_t chosen = 0, rejected = 0, pairs = 0;
    bool dropped = false;
};

struct DatagenStats {
    std::vector<StepStat> steps;
    double mean_chosen = 0, sd_chosen = 0, mean_rejected = 0, sd_rejected = 0;
    std::size_t dropped_hints = 0;
    std::size_t output_tokens = 0;
};

nlohmann::json to_json(const DatagenStats& s);

struct DatagenConfig {
    std::size_t n_samples = 5;
    double temperature = 0.8;
    std::size_t max_chosen_branch = 2;
    std::optional<std::size_t> cap;  // default: classification_cap
    std::vector<Exemplar> shots;
    std::string preamble = default_preamble();
    bool parallel_solves = true;
};

struct DatagenResult {
    std::string instance_id;
    std::vector<SftRecord> sft;
    std::vector<PreferenceRecord> pref;
    DatagenStats stats;
    std::vector<Trajectory> leaves;  // finished trajectory of every branch
    std::vector<std::string> prompts;  // every prompt sent, in order
    bool aborted = false;
    std::string abort_reason;
};

DatagenResult run_dfs(const PuzzleInstance& instance, Generator& generator, const SolveContext& ctx,
                      const DatagenConfig& config = {});

/// |pairs| = min(chosen, cap) * rejected when both are non-empty, else 0.
std::size_t expected_pair_count(std::size_t chosen, std::size_t rejected, std::size_t max_chosen_branch);

nlohmann::ordered_json to_json(const SftRecord& r);
nlohmann::ordered_json to_json(const PreferenceRecord& r);

std::size_t export_records(const std::vector<SftRecord>& records, const std::filesystem::path& path);
std::size_t export_records(const std::vector<PreferenceRecord>& records, const std::filesystem::path& path);
std::vector<SftRecord> read_sft(const std::filesystem::path& path);
std::vector<PreferenceRecord> read_pref(const std::filesystem::path& path);

}  // namespace asploop
