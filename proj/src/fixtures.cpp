#include "asploop/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "asploop/gateway.hpp"
#include "asploop/grounder.hpp"
#include "asploop/match.hpp"
#include "asploop/parser.hpp"
#include "asploop/solver.hpp"

namespace asploop {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<SolutionTable> grid_oracle(const PuzzleInstance& instance, std::string_view program,
                                       const std::string& predicate, std::vector<std::size_t> arg_order) {
    const std::size_t m = instance.m(), n = instance.n();
    if (arg_order.empty()) {
        arg_order.resize(m);
        std::iota(arg_order.begin(), arg_order.end(), 0);
    }
    if (arg_order.size() != m) throw std::invalid_argument("grid_oracle: arg_order must name every category");

    std::vector<asp::Statement> fixed;
    for (auto& s : asp::parse_program(program))
        if (s.kind != asp::StatementKind::choice) fixed.push_back(std::move(s));

    std::vector<std::vector<std::string>> constants(m);
    for (std::size_t k = 0; k < m; ++k)
        for (const auto& member : instance.categories[k].members) constants[k].push_back(normalize_surface(member));

    // perm[k][r]: member of category k on row r; category 0 stays in order
    std::vector<std::vector<std::size_t>> perm(m, std::vector<std::size_t>(n));
    for (auto& p : perm) std::iota(p.begin(), p.end(), 0);

    std::vector<SolutionTable> found;
    auto check = [&] {
        std::string facts;
        for (std::size_t r = 0; r < n; ++r) {
            facts += predicate + "(";
            for (std::size_t a = 0; a < m; ++a) {
                if (a) facts += ",";
                facts += constants[arg_order[a]][perm[arg_order[a]][r]];
            }
            facts += ").\n";
        }
        auto stmts = fixed;
        for (auto& s : asp::parse_program(facts)) stmts.push_back(std::move(s));
        if (asp::enumerate_models(asp::ground(stmts), 1, 0).found == 0) return;
        SolutionTable table;
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<std::string> row;
            for (std::size_t k = 0; k < m; ++k) row.push_back(instance.categories[k].members[perm[k][r]]);
            table.push_back(std::move(row));
        }
        found.push_back(std::move(table));
    };
    auto rec = [&](auto& self, std::size_t k) -> void {
        if (k == m) {
            check();
            return;
        }
        std::iota(perm[k].begin(), perm[k].end(), 0);
        do {
            self(self, k + 1);
        } while (std::next_permutation(perm[k].begin(), perm[k].end()));
    };
    rec(rec, 1);
    return found;
}

std::vector<std::string> reference_blocks(const FixturePaths& paths, const std::string& id) {
    auto dir = paths.encodings(id);
    std::vector<std::string> out{read_text(dir / "base.lp")};
    for (std::size_t k = 1;; ++k) {
        auto f = dir / ("hint" + std::to_string(k) + ".lp");
        if (!std::filesystem::exists(f)) break;
        out.push_back(read_text(f));
    }
    return out;
}

std::vector<std::filesystem::path> crosscheck_programs(const FixturePaths& paths) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(paths.crosscheck()))
        if (e.path().extension() == ".lp") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::string joined(const std::vector<std::string>& blocks, std::size_t upto) {
    std::string s;
    for (std::size_t i = 0; i < upto; ++i) {
        if (i) s += '\n';
        s += blocks[i];
    }
    return s;
}

std::string target_atoms(const asp::AnswerSet& m, const std::string& pred) {
    std::string s;
    for (const auto& a : m.atoms) {
        if (a.predicate != pred) continue;
        if (!s.empty()) s += ' ';
        s += asp::to_string(a);
    }
    return s;
}

std::set<std::vector<std::string>> row_set(const SolutionTable& t) { return {t.begin(), t.end()}; }

ordered_json table_json(const SolutionTable& t) {
    ordered_json j = ordered_json::array();
    for (const auto& row : t) j.push_back(row);
    return j;
}

}  // namespace

ordered_json derive_values(const FixturePaths& paths) {
    ordered_json out;
    ordered_json counts;
    counts["3x3"] = expected_model_count(3, 3);
    counts["3x4"] = expected_model_count(3, 4);
    counts["4x4"] = expected_model_count(4, 4);
    out["expected_model_count"] = counts;

    auto data = load_dataset(paths.puzzles());
    ordered_json puzzles = ordered_json::object();
    for (const auto& p : data.instances) {
        auto blocks = reference_blocks(paths, p.id);
        ordered_json e;
        ordered_json prefix = ordered_json::array();
        for (std::size_t k = 1; k <= blocks.size(); ++k)
            prefix.push_back(solve_in_process(joined(blocks, k), default_cap, 0).model_count());
        e["prefix_counts"] = prefix;
        auto full = solve_in_process(joined(blocks, blocks.size()), default_cap);
        e["reference_model"] = full.models().empty() ? "" : target_atoms(full.models().front(), "assignment");
        puzzles[p.id] = e;
    }
    out["puzzles"] = puzzles;

    for (const auto& p : data.instances) {
        if (p.id != "tattoo_parlor") continue;
        auto program = read_text(paths.encodings(p.id) / "full.lp");
        ordered_json sols = ordered_json::array();
        for (const auto& t : grid_oracle(p, program)) sols.push_back(table_json(t));
        out["tattoo_parlor_oracle"] = sols;
    }

    try {
        asp::ground(asp::parse_program(read_text(paths.encodings("event_planners") / "listing.lp")));
        out["event_planners_listing"] = "no error";
    } catch (const asp::AspError& e) {
        out["event_planners_listing"] = e.what();
    }

    ordered_json cc = ordered_json::object();
    for (const auto& f : crosscheck_programs(paths)) {
        auto v = solve_in_process(read_text(f), default_cap, 0);
        ordered_json e;
        e["models"] = v.model_count();
        e["has_error"] = v.has_error();
        e["unsat"] = v.is_unsat();
        cc[f.stem().string()] = e;
    }
    out["crosscheck"] = cc;
    return out;
}

bool FixtureReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const FixtureCheck& c) { return c.ok; });
}

std::string FixtureReport::to_text() const {
    std::string s;
    for (const auto& c : checks) {
        s += (c.ok ? "ok    " : "FAIL  ") + c.name;
        if (!c.detail.empty()) s += "  (" + c.detail + ")";
        s += "\n";
    }
    return s;
}

FixtureReport verify_fixtures(const FixturePaths& paths) {
    FixtureReport rep;
    auto add = [&](std::string name, bool ok, std::string detail = {}) {
        rep.checks.push_back({std::move(name), ok, std::move(detail)});
    };
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            add(name, false, e.what());
        }
    };

    Dataset data;
    guarded("dataset", [&] {
        data = load_dataset(paths.puzzles());
        std::set<std::string> sizes;
        for (const auto& p : data.instances) sizes.insert(p.meta.at("size"));
        bool ok = data.instances.size() >= 6 && data.rejected.empty() && sizes.count("3x4") && sizes.count("4x4");
        add("dataset", ok,
            std::to_string(data.instances.size()) + " instances, " + std::to_string(data.rejected.size()) + " rejected");
    });

    for (const auto& p : data.instances) {
        guarded("reference:" + p.id, [&] {
            auto blocks = reference_blocks(paths, p.id);
            auto base = solve_in_process(blocks.front(), default_cap, 0);
            if (!base.exhausted() || base.model_count() != expected_model_count(p))
                return add("reference:" + p.id, false, "base has " + std::to_string(base.model_count()) + " models");
            auto chained = solve_in_process(joined(blocks, blocks.size()), default_cap);
            auto full = solve_in_process(read_text(paths.encodings(p.id) / "full.lp"), default_cap);
            if (!full.flagless() || full.model_count() != 1)
                return add("reference:" + p.id, false, "full.lp has " + std::to_string(full.model_count()) + " models");
            if (chained.models() != full.models())
                return add("reference:" + p.id, false, "full.lp differs from the step blocks");
            auto r = match_solution(full.models().front(), p, "assignment");
            add("reference:" + p.id, r.matched, r.matched ? to_string(r.method) : "ground truth mismatch");
        });
    }

    guarded("event-planners-golden", [&] {
        auto v = solve_in_process(read_text(paths.encodings("event_planners") / "full.lp"), default_cap);
        bool ok = v.flagless() && v.model_count() == 1;
        for (const char* a : {"assignment(anniversary,susan,75)", "assignment(wedding,herbert,50)",
                              "assignment(birthday,joel,100)", "assignment(graduation,teresa,125)"})
            ok = ok && v.models().front().contains(asp::parse_ground_atom(a));
        add("event-planners-golden", ok);
    });

    guarded("event-planners-listing", [&] {
        std::string what = "no error";
        try {
            asp::ground(asp::parse_program(read_text(paths.encodings("event_planners") / "listing.lp")));
        } catch (const asp::GroundingError& e) {
            what = e.what();
        }
        add("event-planners-listing", what.find("unsafe variable A1") != std::string::npos, what);
    });

    for (const auto& p : data.instances) {
        if (p.id != "tattoo_parlor") continue;
        guarded("tattoo-oracle", [&] {
            auto program = read_text(paths.encodings(p.id) / "full.lp");
            auto sols = grid_oracle(p, program);
            bool ok = sols.size() == 1 && row_set(sols.front()) == row_set(p.solution);
            add("tattoo-oracle", ok, std::to_string(sols.size()) + " oracle solution(s)");
        });
    }

    auto programs = crosscheck_programs(paths);
    add("crosscheck-size", programs.size() >= 20, std::to_string(programs.size()) + " programs");
    for (const auto& f : programs) {
        std::string name = "crosscheck:" + f.stem().string();
        guarded(name, [&] {
            auto g = asp::ground(asp::parse_program(read_text(f)));
            auto e = asp::enumerate_models(g, default_cap);
            auto b = asp::brute_force_models(g);
            add(name, e.exhausted && e.models == b, std::to_string(e.found) + " vs " + std::to_string(b.size()));
        });
    }

    guarded("derived", [&] {
        auto now = derive_values(paths);
        auto frozen = json::parse(read_text(paths.derived()));
        json current = json::parse(now.dump());
        if (current == frozen) return add("derived", true);
        std::string drift;
        for (const auto& d : json::diff(frozen, current)) drift += d.value("path", "?") + " ";
        add("derived", false, "drift at " + drift);
    });
    return rep;
}

// ---- scenarios --------------------------------------------------------------

std::size_t approx_tokens(std::string_view text) { return (text.size() + 3) / 4; }

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
    return s;
}

std::string fence(const std::string& code) {
    std::string s = "```asp\n" + code;
    if (!code.empty() && code.back() != '\n') s += '\n';
    return s + "```\n";
}

Completion pool_entry(const json& e, const std::filesystem::path& dir) {
    std::string text;
    if (e.is_string()) {
        text = e.get<std::string>();
    } else {
        std::string code = read_text(dir / e.at("ref").get<std::string>());
        std::string how = e.value("as", "plain");
        if (how == "plain") text = code;
        else if (how == "fenced") text = fence(code);
        else if (how == "prose") text = "Here is the encoding:\n\n" + fence(code) + "\nIt follows the predicates introduced so far.\n";
        else if (how == "undefined") text = replace_all(code, "assignment(", "assign(");
        else throw std::invalid_argument("unknown pool entry style '" + how + "'");
    }
    return {text, approx_tokens(text)};
}

}  // namespace

std::vector<std::string> scenario_names(const FixturePaths& paths) {
    std::vector<std::string> out;
    if (!std::filesystem::exists(paths.pools())) return out;
    for (const auto& e : std::filesystem::directory_iterator(paths.pools()))
        if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

Scenario load_scenario(const FixturePaths& paths, const std::string& name) {
    json j = json::parse(read_text(paths.pools() / (name + ".json")));
    Scenario sc;
    sc.name = name;
    for (const auto& r : j.at("runs")) {
        ScenarioRun run;
        run.command = r.at("command").get<std::string>();
        run.n = r.value("n", std::size_t{5});
        run.backtrack_limit = r.value("backtrack_limit", std::size_t{5});
        run.regen = r.value("regen", true);
        sc.runs.push_back(run);
    }
    sc.puzzles = j.at("puzzles").get<std::vector<std::string>>();
    for (const auto& [id, pool] : j.at("pools").items()) {
        auto dir = paths.encodings(id);
        CandidatePool cp;
        for (const auto& e : pool.at("base")) cp.base.push_back(pool_entry(e, dir));
        for (const auto& h : pool.at("hints")) {
            std::vector<Completion> entries;
            for (const auto& e : h) entries.push_back(pool_entry(e, dir));
            cp.hints.push_back(std::move(entries));
        }
        sc.pools[id] = std::move(cp);
    }
    return sc;
}

std::vector<PuzzleInstance> scenario_instances(const Scenario& scenario, const std::vector<PuzzleInstance>& all) {
    std::vector<PuzzleInstance> out;
    for (const auto& id : scenario.puzzles) {
        auto it = std::find_if(all.begin(), all.end(), [&](const PuzzleInstance& p) { return p.id == id; });
        if (it == all.end()) throw std::invalid_argument("scenario " + scenario.name + " names unknown puzzle " + id);
        out.push_back(*it);
    }
    return out;
}

PoolGenerator::Route scenario_route(const Scenario& scenario, const std::vector<PuzzleInstance>& instances) {
    return [scenario, instances](const std::string& prompt) -> const std::vector<Completion>* {
        auto ends_with = [&](const std::string& tail) {
            return prompt.size() >= tail.size() && prompt.compare(prompt.size() - tail.size(), tail.size(), tail) == 0;
        };
        for (const auto& p : instances) {
            auto pool = scenario.pools.find(p.id);
            if (pool == scenario.pools.end()) continue;
            if (ends_with(base_request() + "\n")) {
                auto at = prompt.rfind("## Puzzle\n");
                if (at != std::string::npos && prompt.compare(at + 10, p.description.size(), p.description) == 0)
                    return &pool->second.base;
                continue;
            }
            for (std::size_t k = 0; k < p.hints.size() && k < pool->second.hints.size(); ++k)
                if (ends_with("### Hint\n" + p.hints[k] + "\n" + hint_request() + "\n")) return &pool->second.hints[k];
        }
        return nullptr;
    };
}

DatagenConfig datagen_config(const ScenarioRun& run) {
    DatagenConfig c;
    c.n_samples = run.n;
    c.parallel_solves = false;
    return c;
}

SearchConfig search_config(const ScenarioRun& run) {
    SearchConfig c;
    c.n = run.n;
    c.backtrack_limit = run.backtrack_limit;
    c.enable_regeneration = run.regen;
    c.parallel_solves = false;
    return c;
}

std::map<std::string, std::vector<Completion>> record_scenario(const Scenario& scenario,
                                                               const std::vector<PuzzleInstance>& all,
                                                               const SolveContext& ctx) {
    auto instances = scenario_instances(scenario, all);
    std::map<std::string, std::vector<Completion>> merged;
    for (const auto& run : scenario.runs) {
        PoolGenerator gen(scenario_route(scenario, instances));
        for (const auto& p : instances) {
            if (run.command == "datagen") {
                auto r = run_dfs(p, gen, ctx, datagen_config(run));
                if (r.aborted) throw std::runtime_error(scenario.name + "/" + p.id + ": " + r.abort_reason);
            } else if (run.command == "search") {
                auto o = run_search(p, gen, ctx, search_config(run));
                if (o.aborted) throw std::runtime_error(scenario.name + "/" + p.id + ": " + o.abort_reason);
            } else {
                throw std::invalid_argument("unknown scenario command " + run.command);
            }
        }
        // every run starts each prompt at the pool's beginning, so shorter lists are prefixes
        for (const auto& [hash, served] : gen.served()) {
            auto& dst = merged[hash];
            if (served.size() > dst.size()) dst = served;
        }
    }
    return merged;
}

}  // namespace asploop
