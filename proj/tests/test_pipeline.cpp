#include <doctest.h>

#include "asploop/datagen.hpp"
#include "asploop/search.hpp"
#include "support.hpp"

using namespace asploop;

namespace {

const SolverGateway& gateway() {
    static SolverGateway gw(GatewayOptions{.detect_solver = false});
    return gw;
}

SolveContext ctx() { return {gateway(), Backend::in_process}; }

ScriptedGenerator script(const std::string& name) {
    return ScriptedGenerator(testing::fixtures().scripts() / (name + ".jsonl"));
}

// Pool generator over a scenario's candidate pools.
struct Pools {
    Scenario sc;
    std::vector<PuzzleInstance> instances;
    explicit Pools(const std::string& name) : sc(load_scenario(testing::fixtures(), name)) {
        instances = scenario_instances(sc, load_dataset(testing::fixtures().puzzles()).instances);
    }
    PoolGenerator generator() const { return PoolGenerator(scenario_route(sc, instances)); }
};

}  // namespace

TEST_CASE("classification cap and pair law") {
    const auto& p = testing::puzzle("event_planners");
    CHECK(classification_cap(p) == 4 * 576);
    CHECK(expected_pair_count(3, 2, 2) == 4);
    CHECK(expected_pair_count(1, 4, 2) == 4);
    CHECK(expected_pair_count(0, 5, 2) == 0);
    CHECK(expected_pair_count(5, 0, 2) == 0);
}

TEST_CASE("base classification uses the strict count") {
    const auto& p = testing::puzzle("event_planners");
    auto blocks = reference_blocks(testing::fixtures(), p.id);
    CandidateEncoding good{blocks[0], blocks[0], {}, {}, {}, 0};
    CHECK(classify_base(good, p, classification_cap(p), ctx()) == Label::chosen);
    CHECK(good.reward->value() == 1.0);

    // a looser generator rule admits partial assignments: more than 576 models
    std::string loose = blocks[0];
    auto at = loose.find("1 {");
    REQUIRE(at != std::string::npos);
    loose.replace(at, 3, "0 {");
    CandidateEncoding bad{loose, loose, {}, {}, {}, 0};
    CHECK(classify_base(bad, p, classification_cap(p), ctx()) == Label::rejected);
}

TEST_CASE("hint classification keeps candidates that preserve the solution") {
    const auto& p = testing::puzzle("event_planners");
    auto blocks = reference_blocks(testing::fixtures(), p.id);
    Trajectory t;
    t.instance_id = p.id;
    Step s0;
    s0.candidates.push_back({blocks[0], blocks[0], {}, {}, {}, 0});
    s0.selected_index = 0;
    t.steps.push_back(s0);
    CandidateEncoding right{blocks[1], blocks[1], {}, {}, {}, 0};
    CHECK(classify(right, t, p, classification_cap(p), ctx()) == Label::chosen);
    // excludes the true solution's anniversary row
    CandidateEncoding wrong{":- assignment(anniversary, susan, _).", "", {}, {}, {}, 0};
    CHECK(classify(wrong, t, p, classification_cap(p), ctx()) == Label::rejected);
    CandidateEncoding broken{"assignment(.", "", {}, {}, {}, 0};
    CHECK(classify(broken, t, p, classification_cap(p), ctx()) == Label::rejected);
}

TEST_CASE("datagen over the split fixture") {
    Pools pools("datagen_splits");
    auto gen = script("datagen_splits");
    for (const auto& p : pools.instances) {
        auto cfg = datagen_config(pools.sc.runs.front());
        auto r = run_dfs(p, gen, ctx(), cfg);
        REQUIRE_FALSE(r.aborted);
        std::size_t pairs = 0, sft = 0;
        for (const auto& s : r.stats.steps) {
            CHECK(s.chosen + s.rejected == cfg.n_samples);
            CHECK(s.pairs == expected_pair_count(s.chosen, s.rejected, cfg.max_chosen_branch));
            pairs += s.pairs;
            sft += s.chosen;
        }
        CHECK(r.pref.size() == pairs);
        CHECK(r.sft.size() == sft);
        for (const auto& rec : r.pref) {
            CHECK(rec.chosen != rec.rejected);
            CHECK(rec.meta.instance_id == p.id);
        }
        CHECK(r.stats.output_tokens > 0);
    }
}

TEST_CASE("an all-rejected hint is dropped from every later prompt") {
    Pools pools("datagen_splits");
    auto gen = script("datagen_splits");
    const auto& p = testing::puzzle("event_planners");
    auto r = run_dfs(p, gen, ctx(), datagen_config(pools.sc.runs.front()));
    REQUIRE(r.stats.dropped_hints > 0);
    std::vector<std::size_t> dropped;
    for (const auto& leaf : r.leaves) {
        for (auto h : leaf.dropped_hints) dropped.push_back(h);
    }
    REQUIRE_FALSE(dropped.empty());
    for (auto h : dropped) {
        const std::string& text = p.hints[h];
        std::size_t seen = 0;
        for (const auto& prompt : r.prompts) {
            auto at = prompt.find(text);
            if (at == std::string::npos) continue;
            // allowed only as the hint being asked for, i.e. the last hint section
            CHECK(prompt.rfind("### Hint\n") < at);
            ++seen;
        }
        CHECK(seen > 0);
    }
}

TEST_CASE("generator failure aborts the instance without records") {
    const auto& p = testing::puzzle("event_planners");
    ScriptedGenerator empty(std::map<std::string, std::vector<Completion>>{});
    auto r = run_dfs(p, empty, ctx());
    CHECK(r.aborted);
    CHECK(r.sft.empty());
    CHECK(r.pref.empty());
    CHECK_FALSE(r.abort_reason.empty());
}

TEST_CASE("records round trip through JSONL") {
    std::vector<SftRecord> sft{{"p", "c", {"x", 1, "0.1"}}};
    std::vector<PreferenceRecord> pref{{"p", "c", "r", {"x", 0, "0"}}};
    auto dir = std::filesystem::temp_directory_path();
    export_records(sft, dir / "asploop_sft_test.jsonl");
    export_records(pref, dir / "asploop_pref_test.jsonl");
    CHECK(read_sft(dir / "asploop_sft_test.jsonl") == sft);
    CHECK(read_pref(dir / "asploop_pref_test.jsonl") == pref);
    std::filesystem::remove(dir / "asploop_sft_test.jsonl");
    std::filesystem::remove(dir / "asploop_pref_test.jsonl");
}

TEST_CASE("select_best prefers the lowest index among ties") {
    std::vector<CandidateEncoding> cs(3);
    cs[0].reward = reward(SolverVerdict::enumerated({}, 2, 100));
    cs[1].reward = reward(SolverVerdict::enumerated({}, 1, 100));
    cs[2].reward = reward(SolverVerdict::enumerated({}, 1, 100));
    CHECK(select_best(cs) == 1u);
    CHECK(select_best({}) == std::nullopt);
}

namespace {

std::vector<std::string> kinds(const SearchOutcome& o) {
    std::vector<std::string> out;
    for (const auto& e : o.trace) out.push_back(e.kind);
    return out;
}

SearchOutcome run_scenario(const std::string& name, std::size_t run) {
    Pools pools(name);
    auto gen = script(name);
    return run_search(pools.instances.front(), gen, ctx(), search_config(pools.sc.runs.at(run)));
}

}  // namespace

TEST_CASE("search: clean path") {
    auto o = run_scenario("search_clean", 0);
    CHECK(o.count("regenerate") == 0);
    CHECK(o.count("backtrack") == 0);
    CHECK(o.final_verdict.model_count() == 1);
    REQUIRE(o.predicted_solution);
    CHECK(categorize(o, testing::puzzle("event_planners")) == "correct");
    CHECK(kinds(o).back() == "final");
}

TEST_CASE("search: regeneration path") {
    auto o = run_scenario("search_regen", 0);
    CHECK(o.count("regenerate") == 1);
    CHECK(o.count("backtrack") == 0);
    CHECK(categorize(o, testing::puzzle("event_planners")) == "correct");
    for (const auto& e : o.trace) {
        if (e.kind == "regenerate") CHECK(e.data["count"] == 10);
    }
}

TEST_CASE("search: backtracking path") {
    auto o = run_scenario("search_backtrack", 0);
    REQUIRE(o.count("backtrack") == 1);
    for (const auto& e : o.trace) {
        if (e.kind == "backtrack") {
            CHECK(e.step == 1);
            CHECK(e.data["to"] == 1);
        }
    }
    CHECK(categorize(o, testing::puzzle("event_planners")) == "correct");
}

TEST_CASE("search with no backtracking and no regeneration is plain best-of-N") {
    for (const char* name : {"search_clean", "search_regen", "search_backtrack"}) {
        auto o = run_scenario(name, 1);
        CHECK(o.count("regenerate") == 0);
        CHECK(o.count("backtrack") == 0);
        for (const auto& s : o.trajectory.steps) {
            CHECK(s.candidates.size() == 5);
            CHECK(s.selected_index == select_best(s.candidates));
        }
    }
}

TEST_CASE("search with n = 1 never ranks") {
    Pools pools("e2e");
    auto gen = script("e2e");
    auto cfg = search_config(pools.sc.runs.at(1));
    REQUIRE(cfg.n == 1);
    auto o = run_search(pools.instances.front(), gen, ctx(), cfg);
    CHECK(o.count("rank") == 0);
}

TEST_CASE("search aborts on generator failure and keeps the partial trace") {
    ScriptedGenerator empty(std::map<std::string, std::vector<Completion>>{});
    auto o = run_search(testing::puzzle("event_planners"), empty, ctx());
    CHECK(o.aborted);
    CHECK(categorize(o, testing::puzzle("event_planners")) == "error");
}

TEST_CASE("accuracy report buckets") {
    const auto& p = testing::puzzle("event_planners");
    std::vector<SearchOutcome> outs(5);
    std::vector<PuzzleInstance> ins(5, p);
    outs[0].final_verdict = SolverVerdict::error({"x"});
    outs[1].final_verdict = SolverVerdict::enumerated({}, 0, 10);
    outs[2].final_verdict = SolverVerdict::enumerated({}, 3, 10);
    outs[3].final_verdict = SolverVerdict::enumerated({}, 11, 10);
    outs[4].final_verdict = SolverVerdict::enumerated({}, 1, 10);
    outs[4].predicted_solution = std::vector<std::vector<std::string>>{{"a", "b", "c"}};
    auto rep = evaluate_accuracy(outs, ins);
    CHECK(rep.total == 5);
    CHECK(rep.correct == 0);
    CHECK(rep.buckets.size() == 5);
    for (const auto& b : failure_buckets()) CHECK(rep.buckets.at(b) == 1);
    auto csv = buckets_csv(rep);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header, correct, five buckets
    CHECK_THROWS_AS(evaluate_accuracy(outs, {}), std::invalid_argument);
}
