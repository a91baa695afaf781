// Acceptance checks, one PASS/FAIL line each. Exit status is the number of failures.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "asploop/datagen.hpp"
#include "asploop/match.hpp"
#include "asploop/search.hpp"
#include "support.hpp"

#ifndef ASPLOOP_CLI
#define ASPLOOP_CLI "asploop"
#endif

using namespace asploop;
namespace fs = std::filesystem;

namespace {

struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failed(what);
}

template <class A, class B>
void expect_eq(const A& a, const B& b, const std::string& what) {
    if (!(a == b)) {
        std::ostringstream s;
        s << what << ": got " << a << ", want " << b;
        throw Failed(s.str());
    }
}

const SolverGateway& gateway() {
    static SolverGateway gw;
    return gw;
}

SolveContext in_process() { return {gateway(), Backend::in_process}; }

std::vector<PuzzleInstance> all_puzzles() { return load_dataset(testing::fixtures().puzzles()).instances; }

std::set<std::string> model_strings(const SolverVerdict& v) {
    std::set<std::string> out;
    for (const auto& m : v.models()) out.insert(asp::to_string(m));
    return out;
}

std::string flags(const SolverVerdict& v) {
    return std::string(v.has_error() ? "E" : "-") + (v.is_unsat() ? "U" : "-") + (v.cap_exceeded() ? "C" : "-");
}

// 1 -------------------------------------------------------------------------
std::string golden() {
    const auto& p = testing::puzzle("event_planners");
    std::string full = read_text(testing::fixtures().encodings(p.id) / "full.lp");
    // the four atoms the example prints
    const std::vector<std::string> want{"assignment(anniversary,susan,75)", "assignment(wedding,herbert,50)",
                                        "assignment(birthday,joel,100)", "assignment(graduation,teresa,125)"};
    auto check = [&](const SolverVerdict& v, const std::string& name) {
        expect_eq(v.model_count(), 1u, name + " model count");
        expect(v.flagless(), name + " flags " + flags(v));
        for (const auto& a : want) expect(v.models().at(0).contains(asp::parse_ground_atom(a)), name + " lacks " + a);
        auto m = match_solution(v.models().at(0), p, "assignment");
        expect(m.matched && m.method == MatchMethod::exact, name + " does not match the solution exactly");
    };
    const auto& gw = gateway();
    auto t0 = std::chrono::steady_clock::now();
    check(gw.solve(full, default_cap, Backend::in_process), "in-process");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect(secs < 1.0, "in-process took " + std::to_string(secs) + " s");
    if (!gateway().has_external()) return "in-process only; no external solver found";
    check(gateway().solve(full, default_cap, Backend::external), "external");
    return "in-process and external (" + gateway().solver_cmd() + ")";
}

// 2 -------------------------------------------------------------------------
std::string combinatorics() {
    auto blocks34 = reference_blocks(testing::fixtures(), "event_planners");
    auto blocks44 = reference_blocks(testing::fixtures(), "tattoo_parlor");
    auto v34 = gateway().solve(blocks34.at(0), default_cap, Backend::in_process, 0);
    auto v44 = gateway().solve(blocks44.at(0), default_cap, Backend::in_process, 0);
    expect_eq(v34.model_count(), 576u, "3x4 base");
    expect_eq(v44.model_count(), 13824u, "4x4 base");
    expect(v34.flagless() && v44.flagless(), "flags set");
    expect_eq(expected_model_count(3, 4), 576u, "expected_model_count(3,4)");
    expect_eq(expected_model_count(4, 4), 13824u, "expected_model_count(4,4)");
    return "576 and 13824";
}

// 3 -------------------------------------------------------------------------
std::string oracle_equivalence() {
    auto programs = crosscheck_programs(testing::fixtures());
    expect(programs.size() >= 20, "corpus has " + std::to_string(programs.size()) + " programs");
    std::size_t brute = 0, external = 0;
    for (const auto& path : programs) {
        std::string text = read_text(path);
        std::string name = path.filename().string();
        auto v = gateway().solve(text, default_cap, Backend::in_process);
        try {
            auto g = testing::ground_text(text);
            auto e = asp::enumerate_models(g, default_cap);
            expect(e.exhausted, name + " not exhausted");
            expect(e.models == asp::brute_force_models(g), name + ": enumeration differs from brute force");
            ++brute;
        } catch (const asp::AspError&) {
            expect(v.has_error(), name + ": grounding failed but verdict has no error");
        }
        if (gateway().has_external()) {
            auto x = gateway().solve(text, default_cap, Backend::external);
            expect_eq(flags(v), flags(x), name + " flags in-process vs external");
            if (!v.has_error()) {
                expect_eq(v.model_count(), x.model_count(), name + " model count in-process vs external");
                expect(model_strings(v) == model_strings(x), name + ": model sets differ");
            }
            ++external;
        }
    }
    return std::to_string(programs.size()) + " programs, " + std::to_string(brute) + " vs brute force, " +
           std::to_string(external) + " vs external";
}

// 4 -------------------------------------------------------------------------
std::string monotonicity() {
    std::mt19937 rng(4242);
    std::size_t violations = 0;
    for (int i = 0; i < 100; ++i) {
        std::string program = testing::grid3x3_base();
        for (int k = std::uniform_int_distribution<int>(0, 2)(rng); k > 0; --k)
            program += testing::random_constraint(rng);
        auto before = testing::models_of(program);
        auto after = testing::models_of(program + testing::random_constraint(rng));
        std::set<asp::AnswerSet> base(before.begin(), before.end());
        for (const auto& m : after) violations += base.count(m) == 0;
    }
    expect_eq(violations, 0u, "violations");
    return "100 pairs, 0 violations";
}

// 5 -------------------------------------------------------------------------
std::string reward_table() {
    auto count = [](std::size_t m) { return SolverVerdict::enumerated({}, m, default_cap); };
    auto r1 = reward(count(1));
    auto r576 = reward(count(576));
    expect(r1.recip_num == 1 && r1.recip_den == 1 && r1.flag_sum() == 0, "M=1");
    expect(r576.recip_num == 1 && r576.recip_den == 576 && r576.flag_sum() == 0, "M=576");
    expect(r576.value() == 1.0 / 576.0, "M=576 value");
    expect(reward(SolverVerdict::enumerated({}, 0, 10)).value() == -1.0, "unsat");
    expect(reward(SolverVerdict::error({"x"})).value() == -1.0, "error");
    expect(reward(SolverVerdict::enumerated({}, 11, 10)).value() == -1.0, "cap exceeded");
    expect(choice_rule_reward(count(576), 576).value() == 1.0, "strict 576/576");
    expect(choice_rule_reward(count(575), 576).value() == 0.0, "strict 575/576");
    return "5 verdict cases, 2 strict cases";
}

// 6 -------------------------------------------------------------------------
std::string levenshtein() {
    expect_eq(edit_distance("ison_x42", "ISON-X42"), 6u, "ISON-X42");
    expect_eq(edit_distance("ison_x42", "2016"), 8u, "2016");
    PuzzleInstance p;
    p.categories = {{"years", {"2016", "2017", "2018", "2019"}},
                    {"facilities", {"ISON-X42", "Egert Facility", "Zynga Complex", "Bale-Hahn SSC"}},
                    {"astronomers", {"Dr. Golden", "Dr. Owens", "Dr. Weber", "Dr. Farley"}}};
    p.solution = {{"2016", "ISON-X42", "Dr. Golden"},
                  {"2017", "Egert Facility", "Dr. Owens"},
                  {"2018", "Zynga Complex", "Dr. Weber"},
                  {"2019", "Bale-Hahn SSC", "Dr. Farley"}};
    auto r = match_tuples({{"ison_x42", "golden", "2016"},
                           {"bale_hahn_ssc", "farley", "2019"},
                           {"egert_facility", "owens", "2017"},
                           {"zynga_complex", "weber", "2018"}},
                          p);
    expect(r.matched && r.method == MatchMethod::levenshtein, "observatory example not matched by levenshtein");
    std::map<std::size_t, std::size_t> want{{0, 0}, {1, 2}, {2, 3}, {3, 1}};
    expect(r.assignment_map == want, "row map differs from {1->1, 2->3, 3->4, 4->2}");
    std::mt19937 rng(99);
    for (int i = 0; i < 1000; ++i) {
        auto a = testing::random_string(rng, 20), b = testing::random_string(rng, 20),
             c = testing::random_string(rng, 20);
        auto ab = edit_distance(a, b);
        expect(ab == edit_distance(b, a), "symmetry");
        expect((ab == 0) == (a == b), "identity");
        expect(edit_distance(a, c) <= ab + edit_distance(b, c), "triangle inequality");
    }
    return "example distances, row map, 1000 metric pairs";
}

// 7 -------------------------------------------------------------------------
std::string pairing_law() {
    auto sc = load_scenario(testing::fixtures(), "datagen_splits");
    ScriptedGenerator gen(testing::fixtures().scripts() / "datagen_splits.jsonl");
    std::set<std::size_t> splits;
    std::size_t drops = 0;
    for (const auto& p : scenario_instances(sc, all_puzzles())) {
        auto cfg = datagen_config(sc.runs.front());
        auto r = run_dfs(p, gen, in_process(), cfg);
        expect(!r.aborted, p.id + " aborted: " + r.abort_reason);
        std::size_t total = 0;
        for (const auto& s : r.stats.steps) {
            expect_eq(s.pairs, expected_pair_count(s.chosen, s.rejected, cfg.max_chosen_branch),
                      p.id + " step " + std::to_string(s.step) + " pairs");
            std::size_t want = (s.chosen && s.rejected) ? std::min<std::size_t>(s.chosen, 2) * s.rejected : 0;
            expect_eq(s.pairs, want, "pair law");
            splits.insert(s.chosen);
            total += s.pairs;
        }
        expect_eq(r.pref.size(), total, p.id + " preference records");
        for (const auto& leaf : r.leaves) {
            for (auto h : leaf.dropped_hints) {
                ++drops;
                for (const auto& prompt : r.prompts) {
                    auto at = prompt.find(p.hints[h]);
                    expect(at == std::string::npos || prompt.rfind("### Hint\n") < at,
                           p.id + ": dropped hint " + std::to_string(h + 1) + " reappears in a later prompt");
                }
            }
        }
    }
    expect_eq(splits.size(), 6u, "distinct chosen/rejected splits covered");
    expect(drops > 0, "no all-rejected step in the fixture");
    return "splits 0..5 of 5 covered, " + std::to_string(drops) + " dropped-hint paths";
}

// 8 -------------------------------------------------------------------------
std::string search_scenarios() {
    struct Want {
        const char* name;
        std::size_t regenerations, backtracks;
    };
    auto all = all_puzzles();
    std::ostringstream detail;
    for (Want w : {Want{"search_clean", 0, 0}, Want{"search_regen", 1, 0}, Want{"search_backtrack", 1, 1}}) {
        auto sc = load_scenario(testing::fixtures(), w.name);
        auto instances = scenario_instances(sc, all);
        ScriptedGenerator gen(testing::fixtures().scripts() / (std::string(w.name) + ".jsonl"));
        std::vector<SearchOutcome> outs;
        for (const auto& p : instances) outs.push_back(run_search(p, gen, in_process(), search_config(sc.runs.at(0))));
        const auto& o = outs.front();
        expect_eq(o.count("regenerate"), w.regenerations, std::string(w.name) + " regenerate events");
        expect_eq(o.count("backtrack"), w.backtracks, std::string(w.name) + " backtrack events");
        for (const auto& e : o.trace) {
            if (e.kind == "backtrack") expect(e.step == 1, std::string(w.name) + ": backtrack not to step 1");
        }
        expect(o.final_verdict.model_count() == 1 && o.predicted_solution, std::string(w.name) + " final M != 1");
        expect(evaluate_accuracy(outs, instances).accuracy() == 1.0, std::string(w.name) + " accuracy < 1");

        // pure best-of-N: every step has n candidates and keeps the argmax
        auto pure_cfg = search_config(sc.runs.at(1));
        expect(pure_cfg.backtrack_limit == 0 && !pure_cfg.enable_regeneration, "second run is not the pure mode");
        ScriptedGenerator gen2(testing::fixtures().scripts() / (std::string(w.name) + ".jsonl"));
        auto pure = run_search(instances.front(), gen2, in_process(), pure_cfg);
        expect(pure.count("regenerate") == 0 && pure.count("backtrack") == 0, std::string(w.name) + " pure mode");
        for (const auto& s : pure.trajectory.steps) {
            expect_eq(s.candidates.size(), pure_cfg.n, std::string(w.name) + " pure step size");
            expect(s.selected_index == select_best(s.candidates), std::string(w.name) + " pure selection");
        }
        detail << w.name << " ok; ";
    }
    return detail.str() + "pure best-of-N reproduced";
}

// 9 -------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string("\"") + ASPLOOP_CLI + "\" " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string determinism() {
    auto work = fs::temp_directory_path() / ("asploop_accept_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
    auto all = all_puzzles();
    std::size_t compared = 0;
    struct Job {
        const char* scenario;
        const char* command;
        std::vector<const char*> files;
    };
    for (const Job& job : {Job{"datagen_splits", "datagen", {"sft.jsonl", "pref.jsonl", "stats.jsonl"}},
                           Job{"search_backtrack", "search", {"outcomes.jsonl", "trace.jsonl"}}}) {
        auto sc = load_scenario(testing::fixtures(), job.scenario);
        auto data = work / (std::string(job.scenario) + ".json");
        save_dataset(data, scenario_instances(sc, all));
        auto script = testing::fixtures().scripts() / (std::string(job.scenario) + ".jsonl");
        std::vector<fs::path> outs;
        for (int k = 0; k < 2; ++k) {
            auto out = work / (std::string(job.scenario) + "_" + std::to_string(k));
            std::string args = "--dataset \"" + data.string() + "\" --solver internal --generator scripted" +
                               " --generator-script \"" + script.string() + "\" --seed 7 --jobs 2 --out \"" +
                               out.string() + "\" " + job.command;
            expect_eq(run_cli(args), 0, std::string(job.command) + " exit status");
            outs.push_back(out);
        }
        for (const char* f : job.files) {
            auto a = slurp(outs[0] / f), b = slurp(outs[1] / f);
            expect(!a.empty(), std::string(f) + " is empty");
            expect(a == b, std::string(job.command) + " " + f + " differs between runs");
            ++compared;
        }
    }
    fs::remove_all(work);
    return std::to_string(compared) + " JSONL artifacts byte-identical across two CLI runs";
}

// 10 ------------------------------------------------------------------------
std::string end_to_end() {
    auto sc = load_scenario(testing::fixtures(), "e2e");
    auto instances = scenario_instances(sc, all_puzzles());
    expect(instances.size() >= 6, "fewer than 6 puzzles");
    std::vector<double> acc;
    for (const auto& run : sc.runs) {
        ScriptedGenerator gen(testing::fixtures().scripts() / "e2e.jsonl");
        std::vector<SearchOutcome> outs;
        for (const auto& p : instances) outs.push_back(run_search(p, gen, in_process(), search_config(run)));
        acc.push_back(evaluate_accuracy(outs, instances).accuracy());
    }
    expect(sc.runs.size() == 2 && sc.runs[0].n == 5 && sc.runs[1].n == 1, "e2e runs are not N=5 and N=1");
    expect(acc[0] == 1.0, "N=5 accuracy " + std::to_string(acc[0]));
    expect(acc[1] < acc[0], "N=1 accuracy not lower");
    std::ostringstream s;
    s << instances.size() << " puzzles, N=5 " << acc[0] << ", N=1 " << acc[1];
    return s.str();
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
        {"event planners golden", golden},
        {"combinatorics", combinatorics},
        {"oracle equivalence", oracle_equivalence},
        {"monotonicity", monotonicity},
        {"reward table", reward_table},
        {"levenshtein heuristic", levenshtein},
        {"pairing law", pairing_law},
        {"search scenarios", search_scenarios},
        {"determinism", determinism},
        {"end to end", end_to_end},
    };
    const double budget[] = {1, 10, 60, 60, 1, 10, 60, 30, 120, 120};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = criteria[i].second();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && secs > budget[i]) {
            ok = false;
            detail += "; over the " + std::to_string(static_cast<int>(budget[i])) + " s budget";
        }
        failures += !ok;
        std::printf("%s  %zu. %s (%.2f s): %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
