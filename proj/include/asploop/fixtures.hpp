#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "asploop/datagen.hpp"
#include "asploop/generator.hpp"
#include "asploop/puzzle.hpp"
#include "asploop/search.hpp"

namespace asploop {

using SolutionTable = std::vector<std::vector<std::string>>;

/// Tries all (n!)^(m-1) assignments of the grid against the non-choice part of
/// program. arg_order[k] is the category shown at argument k of the target
/// predicate (identity when empty); constants are normalize_surface(member).
std::vector<SolutionTable> grid_oracle(const PuzzleInstance& instance, std::string_view program,
                                       const std::string& predicate = "assignment",
                                       std::vector<std::size_t> arg_order = {});

/// Fixture layout below root:
///   puzzles/puzzles.json, encodings/<id>/{base,hintK,full}.lp, crosscheck/*.lp, derived.json
struct FixturePaths {
    std::filesystem::path root;

    std::filesystem::path puzzles() const { return root / "puzzles" / "puzzles.json"; }
    std::filesystem::path encodings(const std::string& id) const { return root / "encodings" / id; }
    std::filesystem::path crosscheck() const { return root / "crosscheck"; }
    std::filesystem::path derived() const { return root / "derived.json"; }
    std::filesystem::path scripts() const { return root / "scripts"; }
    std::filesystem::path pools() const { return root / "pools"; }
};

/// Reference blocks in step order: base.lp, hint1.lp, hint2.lp, ...
std::vector<std::string> reference_blocks(const FixturePaths& paths, const std::string& id);

std::vector<std::filesystem::path> crosscheck_programs(const FixturePaths& paths);

/// Every solver-derived fixture value, recomputed from the files.
nlohmann::ordered_json derive_values(const FixturePaths& paths);

struct FixtureCheck {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct FixtureReport {
    std::vector<FixtureCheck> checks;
    bool ok() const;
    std::string to_text() const;
};

/// Re-derives everything and compares with derived.json and the puzzle file.
FixtureReport verify_fixtures(const FixturePaths& paths);

std::string read_text(const std::filesystem::path& path);

/// One configuration a scenario is recorded under.
struct ScenarioRun {
    std::string command;  // datagen or search
    std::size_t n = 5;
    std::size_t backtrack_limit = 5;
    bool regen = true;
};

struct CandidatePool {
    std::vector<Completion> base;
    std::vector<std::vector<Completion>> hints;
};

/// pools/<name>.json: runs, puzzle ids, and per-puzzle candidate pools. A pool
/// entry is literal text or {"ref": "hintK.lp", "as": plain|fenced|prose|undefined}.
struct Scenario {
    std::string name;
    std::vector<ScenarioRun> runs;
    std::vector<std::string> puzzles;
    std::map<std::string, CandidatePool> pools;
};

Scenario load_scenario(const FixturePaths& paths, const std::string& name);
std::vector<std::string> scenario_names(const FixturePaths& paths);

/// Rough token count used for scripted completions: ceil(bytes / 4).
std::size_t approx_tokens(std::string_view text);

/// Base prompts go to the base pool of the puzzle named in them, hint prompts
/// to the pool of the hint they end with.
PoolGenerator::Route scenario_route(const Scenario& scenario, const std::vector<PuzzleInstance>& instances);

/// Instances named by the scenario, in its order.
std::vector<PuzzleInstance> scenario_instances(const Scenario& scenario, const std::vector<PuzzleInstance>& all);

DatagenConfig datagen_config(const ScenarioRun& run);
SearchConfig search_config(const ScenarioRun& run);

/// Runs every configuration against the pools and returns the merged script.
std::map<std::string, std::vector<Completion>> record_scenario(const Scenario& scenario,
                                                               const std::vector<PuzzleInstance>& all,
                                                               const SolveContext& ctx);

}  // namespace asploop
