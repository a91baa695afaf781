#include "asploop/search.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>

#include "asploop/match.hpp"

namespace asploop {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t SearchOutcome::count(const std::string& kind) const {
    return static_cast<std::size_t>(
        std::count_if(trace.begin(), trace.end(), [&](const TraceEvent& e) { return e.kind == kind; }));
}

std::optional<std::size_t> select_best(const std::vector<CandidateEncoding>& candidates) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i].reward) continue;
        if (!best || *candidates[i].reward > *candidates[*best].reward) best = i;
    }
    return best;
}

void score_candidates(std::vector<CandidateEncoding>& candidates, const Trajectory& trajectory,
                      const PuzzleInstance& instance, std::optional<std::size_t> hint_index, std::size_t cap,
                      const SolveContext& ctx, bool parallel) {
    std::uint64_t expected = expected_model_count(instance);
    auto one = [&](CandidateEncoding& c) {
        if (c.reward) return;  // already scored in an earlier batch
        if (!hint_index) {
            auto v = ctx.gateway.solve(c.text, cap, ctx.backend, std::size_t{1});
            c.reward = choice_rule_reward(v, expected);
            c.verdict = std::move(v);
        } else {
            auto v = ctx.gateway.solve(combine(trajectory, &c), cap, ctx.backend, std::size_t{1});
            c.reward = reward(v);
            c.verdict = std::move(v);
        }
    };
    if (!parallel || candidates.size() < 2) {
        for (auto& c : candidates) one(c);
        return;
    }
    std::vector<std::future<void>> jobs;
    for (auto& c : candidates) jobs.push_back(std::async(std::launch::async, one, std::ref(c)));
    for (auto& j : jobs) j.get();
}

namespace {

std::string step_prompt(const Trajectory& t, const PuzzleInstance& p, std::optional<std::size_t> hint,
                        const std::vector<Exemplar>& shots, const std::string& preamble) {
    if (!hint) return build_base_prompt(p, shots, preamble);
    return build_hint_prompt(t, p.hints[*hint]);
}

json rewards_of(const std::vector<CandidateEncoding>& cands) {
    json out = json::array();
    for (const auto& c : cands) out.push_back(c.reward ? c.reward->value() : 0.0);
    return out;
}

bool viable(const CandidateEncoding& c) { return c.reward && !is_negative(*c.reward); }

// Viable candidates best first; ties by index.
std::vector<std::size_t> ranked_viable(const std::vector<CandidateEncoding>& cands) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cands.size(); ++i)
        if (viable(cands[i])) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return *cands[a].reward > *cands[b].reward; });
    return idx;
}

class Search {
public:
    Search(const PuzzleInstance& p, Generator& gen, const SolveContext& ctx, const SearchConfig& cfg)
        : p_(p), gen_(gen), ctx_(ctx), cfg_(cfg) {
        cap_ = cfg_.cap.value_or(classification_cap(p_));
        out_.instance_id = p_.id;
        out_.trajectory.instance_id = p_.id;
    }

    SearchOutcome run() {
        try {
            walk();
            finish();
        } catch (const GeneratorError& e) {
            abort(e.what());
        } catch (const ConfigError& e) {
            abort(e.what());
        }
        return std::move(out_);
    }

private:
    void event(std::string kind, std::size_t step, ordered_json data = ordered_json::object()) {
        out_.trace.push_back({std::move(kind), step, std::move(data)});
    }

    void abort(const std::string& why) {
        out_.aborted = true;
        out_.abort_reason = why;
        out_.final_verdict = SolverVerdict::error({why});
        out_.predicted_solution.reset();
    }

    std::vector<CandidateEncoding> sample(const std::string& prompt, std::size_t n, std::size_t step,
                                          const char* kind) {
        auto cands = generate(gen_, prompt, n, cfg_.temperature);
        ++out_.generator_calls;
        std::size_t tokens = 0;
        for (const auto& c : cands) tokens += c.token_count;
        out_.total_output_tokens += tokens;
        ordered_json d;
        d["count"] = n;
        d["tokens"] = tokens;
        d["prompt_sha256"] = sha256_hex(prompt);
        event(kind, step, std::move(d));
        return cands;
    }

    void rank(const std::vector<CandidateEncoding>& cands, std::size_t step) {
        if (cands.size() < 2) return;
        ordered_json d;
        d["rewards"] = rewards_of(cands);
        event("rank", step, std::move(d));
    }

    bool all_negative(const std::vector<CandidateEncoding>& cands) const {
        return std::none_of(cands.begin(), cands.end(), viable);
    }

    // Earlier hint step with a viable untried alternative; max selected reward, latest on ties.
    std::optional<std::size_t> backtrack_target() const {
        std::optional<std::size_t> best;
        for (std::size_t j = 1; j < steps().size(); ++j) {
            const auto& cands = steps()[j].candidates;
            auto order = ranked_viable(cands);
            if (order.size() < 2) continue;
            bool untried = std::any_of(order.begin(), order.end(), [&](std::size_t i) { return !tried_[j].count(i); });
            if (!untried) continue;
            if (!best || !(*steps()[j].selected()->reward < *steps()[*best].selected()->reward)) best = j;
        }
        return best;
    }

    std::vector<Step>& steps() { return out_.trajectory.steps; }
    const std::vector<Step>& steps() const { return out_.trajectory.steps; }

    void walk() {
        const std::size_t last = p_.hints.size();
        std::size_t backtracks = 0;
        std::size_t i = steps().size();
        while (i <= last) {
            std::optional<std::size_t> hint;
            if (i > 0) hint = i - 1;
            Step st;
            st.hint_index = hint;
            st.prompt = step_prompt(out_.trajectory, p_, hint, cfg_.shots, cfg_.preamble);
            st.input_text = hint ? p_.hints[*hint] : st.prompt;
            st.candidates = sample(st.prompt, cfg_.n, i, "generate");
            score_candidates(st.candidates, out_.trajectory, p_, hint, cap_, ctx_, cfg_.parallel_solves);
            rank(st.candidates, i);

            if (all_negative(st.candidates) && cfg_.enable_regeneration) {
                auto more = sample(st.prompt, cfg_.regen_multiplier * cfg_.n, i, "regenerate");
                score_candidates(more, out_.trajectory, p_, hint, cap_, ctx_, cfg_.parallel_solves);
                for (auto& c : more) st.candidates.push_back(std::move(c));
                rank(st.candidates, i);
            }

            auto best = select_best(st.candidates);
            if (all_negative(st.candidates)) {
                auto target = backtrack_target();
                if (target && backtracks < cfg_.backtrack_limit) {
                    ++backtracks;
                    std::size_t j = *target;
                    auto order = ranked_viable(steps()[j].candidates);
                    std::size_t next = *std::find_if(order.begin(), order.end(),
                                                     [&](std::size_t k) { return !tried_[j].count(k); });
                    steps()[j].selected_index = next;
                    tried_[j].insert(next);
                    ordered_json d;
                    d["from"] = i;
                    d["to"] = j;
                    d["index"] = next;
                    d["reward"] = steps()[j].candidates[next].reward->value();
                    event("backtrack", j, std::move(d));
                    steps().resize(j + 1);
                    tried_.resize(j + 1);
                    i = j + 1;
                    continue;
                }
                ordered_json d;
                d["index"] = *best;
                d["reward"] = st.candidates[*best].reward->value();
                event("accept_negative", i, std::move(d));
            }

            st.selected_index = best;
            const auto& sel = st.candidates[*best];
            ordered_json d;
            d["index"] = *best;
            d["reward"] = sel.reward->value();
            d["models"] = sel.verdict->model_count();
            event("select", i, std::move(d));
            steps().push_back(std::move(st));
            tried_.push_back({*best});
            ++i;
        }
    }

    void finish() {
        out_.final_program = combine(out_.trajectory);
        auto v = ctx_.gateway.solve(out_.final_program, cap_, ctx_.backend, std::size_t{2});
        if (v.flagless() && !v.models().empty()) {
            const auto& model = v.models().front();
            auto target = detect_target_predicate(model, p_);
            std::vector<std::vector<std::string>> rows;
            if (target) {
                for (const auto& a : model.atoms) {
                    if (a.predicate != *target || a.args.size() != p_.m()) continue;
                    std::vector<std::string> row;
                    for (const auto& x : a.args) row.push_back(surface_of(x));
                    rows.push_back(std::move(row));
                }
            }
            out_.predicted_solution = std::move(rows);
        }
        ordered_json d;
        d["models"] = v.model_count();
        d["has_error"] = v.has_error();
        d["unsat"] = v.is_unsat();
        d["cap_exceeded"] = v.cap_exceeded();
        d["reward"] = reward(v).value();
        event("final", p_.hints.size(), std::move(d));
        out_.final_verdict = std::move(v);
    }

    const PuzzleInstance& p_;
    Generator& gen_;
    const SolveContext& ctx_;
    const SearchConfig& cfg_;
    std::size_t cap_ = 0;
    std::vector<std::set<std::size_t>> tried_;
    SearchOutcome out_;
};

}  // namespace

Step best_of_n_step(const Trajectory& trajectory, const PuzzleInstance& instance,
                    std::optional<std::size_t> hint_index, Generator& generator, const SolveContext& ctx,
                    const SearchConfig& config) {
    if (config.n == 0) throw std::invalid_argument("best_of_n_step: n must be positive");
    Step st;
    st.hint_index = hint_index;
    st.prompt = step_prompt(trajectory, instance, hint_index, config.shots, config.preamble);
    st.input_text = hint_index ? instance.hints[*hint_index] : st.prompt;
    st.candidates = generate(generator, st.prompt, config.n, config.temperature);
    score_candidates(st.candidates, trajectory, instance, hint_index, config.cap.value_or(classification_cap(instance)),
                     ctx, config.parallel_solves);
    st.selected_index = select_best(st.candidates);
    return st;
}

SearchOutcome run_search(const PuzzleInstance& instance, Generator& generator, const SolveContext& ctx,
                         const SearchConfig& config) {
    if (config.n == 0) throw std::invalid_argument("run_search: n must be positive");
    if (config.regen_multiplier == 0) throw std::invalid_argument("run_search: regen_multiplier must be positive");
    if (auto why = validate(instance)) throw std::invalid_argument("run_search: " + *why);
    return Search(instance, generator, ctx, config).run();
}

ordered_json to_json(const TraceEvent& e, const std::string& instance_id, std::size_t seq) {
    ordered_json j;
    j["instance_id"] = instance_id;
    j["seq"] = seq;
    j["event"] = e.kind;
    j["step"] = e.step;
    for (const auto& [k, v] : e.data.items()) j[k] = v;
    return j;
}

ordered_json to_json(const SearchOutcome& o) {
    ordered_json j;
    j["instance_id"] = o.instance_id;
    j["aborted"] = o.aborted;
    if (o.aborted) j["abort_reason"] = o.abort_reason;
    ordered_json path = ordered_json::array();
    for (std::size_t i = 0; i < o.trajectory.steps.size(); ++i) {
        const auto& st = o.trajectory.steps[i];
        const auto* sel = st.selected();
        ordered_json e;
        e["step"] = i;
        e["candidates"] = st.candidates.size();
        if (sel) {
            e["index"] = *st.selected_index;
            e["reward"] = sel->reward ? to_string(*sel->reward) : "";
            e["models"] = sel->verdict ? sel->verdict->model_count() : 0;
        }
        path.push_back(e);
    }
    j["path"] = path;
    j["final_program"] = o.final_program;
    const auto& v = o.final_verdict;
    j["models"] = v.model_count();
    j["has_error"] = v.has_error();
    j["unsat"] = v.is_unsat();
    j["cap_exceeded"] = v.cap_exceeded();
    j["diagnostics"] = v.diagnostics();
    if (o.predicted_solution) j["predicted_solution"] = *o.predicted_solution;
    else j["predicted_solution"] = nullptr;
    j["output_tokens"] = o.total_output_tokens;
    j["generator_calls"] = o.generator_calls;
    j["backtracks"] = o.count("backtrack");
    j["regenerations"] = o.count("regenerate");
    return j;
}

// ---- accuracy ---------------------------------------------------------------

std::string categorize(const SearchOutcome& outcome, const PuzzleInstance& instance) {
    const auto& v = outcome.final_verdict;
    if (v.has_error()) return "error";
    if (v.cap_exceeded()) return "cap-exceeded";
    if (v.is_unsat()) return "unsat";
    if (v.model_count() > 1) return "multiple-models";
    if (v.models().empty()) return "wrong-unique-model";
    const auto& model = v.models().front();
    auto target = detect_target_predicate(model, instance);
    if (!target) return "wrong-unique-model";
    try {
        if (match_solution(model, instance, *target).matched) return "correct";
    } catch (const std::invalid_argument&) {
    }
    return "wrong-unique-model";
}

AccuracyReport evaluate_accuracy(const std::vector<SearchOutcome>& outcomes,
                                 const std::vector<PuzzleInstance>& instances) {
    if (outcomes.size() != instances.size())
        throw std::invalid_argument("evaluate_accuracy: " + std::to_string(outcomes.size()) + " outcomes for " +
                                    std::to_string(instances.size()) + " instances");
    AccuracyReport r;
    for (const auto& b : failure_buckets()) r.buckets[b] = 0;
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        const auto& p = instances[i];
        OutcomeRow row;
        row.instance_id = p.id;
        row.category = categorize(o, p);
        row.models = o.final_verdict.model_count();
        row.output_tokens = o.total_output_tokens;
        row.backtracks = o.count("backtrack");
        row.regenerations = o.count("regenerate");
        if (auto it = p.meta.find("size"); it != p.meta.end()) row.size = it->second;
        if (auto it = p.meta.find("difficulty"); it != p.meta.end()) row.difficulty = it->second;

        bool ok = row.category == "correct";
        ++r.total;
        if (ok) ++r.correct;
        else ++r.buckets[row.category];
        if (!row.size.empty()) {
            ++r.by_size[row.size].total;
            if (ok) ++r.by_size[row.size].correct;
        }
        if (!row.difficulty.empty()) {
            ++r.by_difficulty[row.difficulty].total;
            if (ok) ++r.by_difficulty[row.difficulty].correct;
        }
        tokens += o.total_output_tokens;
        r.rows.push_back(std::move(row));
    }
    if (r.total) r.mean_output_tokens = double(tokens) / double(r.total);
    return r;
}

namespace {

ordered_json splits_json(const std::map<std::string, Split>& m) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, s] : m) {
        ordered_json x;
        x["total"] = s.total;
        x["correct"] = s.correct;
        x["accuracy"] = s.accuracy();
        j[k] = x;
    }
    return j;
}

}  // namespace

ordered_json to_json(const AccuracyReport& r) {
    ordered_json j;
    j["total"] = r.total;
    j["correct"] = r.correct;
    j["accuracy"] = r.accuracy();
    ordered_json b = ordered_json::object();
    for (const auto& name : failure_buckets()) b[name] = r.buckets.at(name);
    j["buckets"] = b;
    j["by_size"] = splits_json(r.by_size);
    j["by_difficulty"] = splits_json(r.by_difficulty);
    j["mean_output_tokens"] = r.mean_output_tokens;
    return j;
}

std::string buckets_csv(const AccuracyReport& r) {
    std::ostringstream s;
    s << "bucket,count\n";
    s << "correct," << r.correct << "\n";
    for (const auto& name : failure_buckets()) s << name << "," << r.buckets.at(name) << "\n";
    return s.str();
}

std::string outcomes_csv(const AccuracyReport& r) {
    std::ostringstream s;
    s << "instance_id,outcome,models,output_tokens,backtracks,regenerations,size,difficulty\n";
    for (const auto& row : r.rows) {
        s << row.instance_id << "," << row.category << "," << row.models << "," << row.output_tokens << ","
          << row.backtracks << "," << row.regenerations << "," << row.size << "," << row.difficulty << "\n";
    }
    return s.str();
}

}  // namespace asploop
