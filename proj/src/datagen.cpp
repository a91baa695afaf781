#include "asploop/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>

#include "asploop/match.hpp"

namespace asploop {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t classification_cap(const PuzzleInstance& instance) {
    std::uint64_t expected = 0;
    try {
        expected = expected_model_count(instance);
    } catch (const std::overflow_error&) {
        return default_cap;
    }
    if (expected > default_cap / 4) return default_cap;
    return static_cast<std::size_t>(4 * expected);
}

bool verdict_contains_solution(const SolverVerdict& verdict, const PuzzleInstance& instance) {
    // exact matches are cheap; only fall back to the edit-distance pass when none hit
    for (bool exact : {true, false}) {
        for (const auto& model : verdict.models()) {
            auto target = detect_target_predicate(model, instance);
            if (!target) continue;
            try {
                auto r = match_solution(model, instance, *target, exact);
                if (r.matched) return true;
            } catch (const std::invalid_argument&) {
            }
        }
    }
    return false;
}

Label classify(CandidateEncoding& candidate, const Trajectory& trajectory, const PuzzleInstance& instance,
               std::size_t cap, const SolveContext& ctx) {
    auto v = ctx.gateway.solve(combine(trajectory, &candidate), cap, ctx.backend, cap + 1);
    bool ok = v.flagless() && verdict_contains_solution(v, instance);
    candidate.reward = reward(v);
    candidate.verdict = std::move(v);
    candidate.label = ok ? Label::chosen : Label::rejected;
    return *candidate.label;
}

Label classify_base(CandidateEncoding& candidate, const PuzzleInstance& instance, std::size_t cap,
                    const SolveContext& ctx) {
    std::uint64_t expected = expected_model_count(instance);
    auto v = ctx.gateway.solve(candidate.text, cap, ctx.backend, std::size_t{1});
    bool ok = v.flagless() && v.exhausted() && v.model_count() == expected;
    candidate.reward = choice_rule_reward(v, expected);
    candidate.verdict = std::move(v);
    candidate.label = ok ? Label::chosen : Label::rejected;
    return *candidate.label;
}

std::size_t expected_pair_count(std::size_t chosen, std::size_t rejected, std::size_t max_chosen_branch) {
    if (chosen == 0 || rejected == 0) return 0;
    return std::min(chosen, max_chosen_branch) * rejected;
}

json to_json(const DatagenStats& s) {
    json steps = json::array();
    for (const auto& st : s.steps) {
        steps.push_back({{"step", st.step},
                         {"branch", st.branch},
                         {"chosen", st.chosen},
                         {"rejected", st.rejected},
                         {"pairs", st.pairs},
                         {"dropped", st.dropped}});
    }
    return {{"steps", steps},
            {"mean_chosen", s.mean_chosen},
            {"sd_chosen", s.sd_chosen},
            {"mean_rejected", s.mean_rejected},
            {"sd_rejected", s.sd_rejected},
            {"dropped_hints", s.dropped_hints},
            {"output_tokens", s.output_tokens}};
}

namespace {

class Dfs {
public:
    Dfs(const PuzzleInstance& instance, Generator& generator, const SolveContext& ctx, const DatagenConfig& config)
        : p_(instance), gen_(generator), ctx_(ctx), cfg_(config) {
        cap_ = cfg_.cap.value_or(classification_cap(p_));
        out_.instance_id = p_.id;
    }

    DatagenResult run() {
        try {
            std::string prompt = build_base_prompt(p_, cfg_.shots, cfg_.preamble);
            auto cands = sample(prompt);
            classify_all(cands, nullptr);
            Trajectory root;
            root.instance_id = p_.id;
            auto chosen = record(prompt, cands, 0, "0");
            for (std::size_t k = 0; k < chosen.size(); ++k) {
                Trajectory t = root;
                Step s;
                s.input_text = prompt;
                s.prompt = prompt;
                s.candidates = cands;
                s.selected_index = chosen[k];
                t.steps.push_back(std::move(s));
                descend(std::move(t), 0, "0." + std::to_string(k));
            }
        } catch (const GeneratorError& e) {
            DatagenResult failed;
            failed.instance_id = p_.id;
            failed.aborted = true;
            failed.abort_reason = e.what();
            return failed;
        }
        summarize();
        return std::move(out_);
    }

private:
    std::vector<CandidateEncoding> sample(const std::string& prompt) {
        out_.prompts.push_back(prompt);
        auto cands = generate(gen_, prompt, cfg_.n_samples, cfg_.temperature);
        for (const auto& c : cands) out_.stats.output_tokens += c.token_count;
        return cands;
    }

    void classify_all(std::vector<CandidateEncoding>& cands, const Trajectory* t) {
        auto one = [&](CandidateEncoding& c) {
            if (t) classify(c, *t, p_, cap_, ctx_);
            else classify_base(c, p_, cap_, ctx_);
        };
        if (!cfg_.parallel_solves || cands.size() < 2) {
            for (auto& c : cands) one(c);
            return;
        }
        std::vector<std::future<void>> jobs;
        for (auto& c : cands) jobs.push_back(std::async(std::launch::async, one, std::ref(c)));
        for (auto& j : jobs) j.get();
    }

    // Emits records for one step; returns the indices to branch on.
    std::vector<std::size_t> record(const std::string& prompt, const std::vector<CandidateEncoding>& cands,
                                    std::size_t step, const std::string& branch) {
        std::vector<std::size_t> chosen, rejected;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            (cands[i].label == Label::chosen ? chosen : rejected).push_back(i);
        }
        RecordMeta meta{p_.id, step, branch};
        for (auto i : chosen) out_.sft.push_back({prompt, cands[i].text, meta});
        if (chosen.size() > cfg_.max_chosen_branch) chosen.resize(cfg_.max_chosen_branch);
        std::size_t pairs = 0;
        if (!chosen.empty() && !rejected.empty()) {
            for (auto c : chosen) {
                for (auto r : rejected) {
                    out_.pref.push_back({prompt, cands[c].text, cands[r].text, meta});
                    ++pairs;
                }
            }
        }
        StepStat st;
        st.step = step;
        st.branch = branch;
        st.chosen = cands.size() - rejected.size();
        st.rejected = rejected.size();
        st.pairs = pairs;
        st.dropped = step > 0 && st.chosen == 0;
        out_.stats.steps.push_back(st);
        return chosen;
    }

    void descend(Trajectory t, std::size_t hint, const std::string& branch) {
        if (hint == p_.hints.size()) {
            out_.leaves.push_back(std::move(t));
            return;
        }
        std::string prompt = build_hint_prompt(t, p_.hints[hint]);
        auto cands = sample(prompt);
        classify_all(cands, &t);
        auto chosen = record(prompt, cands, hint + 1, branch);
        if (chosen.empty()) {
            ++out_.stats.dropped_hints;
            t.dropped_hints.push_back(hint);
            descend(std::move(t), hint + 1, branch);
            return;
        }
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            Trajectory next = t;
            Step s;
            s.input_text = p_.hints[hint];
            s.prompt = prompt;
            s.hint_index = hint;
            s.candidates = cands;
            s.selected_index = chosen[k];
            next.steps.push_back(std::move(s));
            descend(std::move(next), hint + 1, branch + "." + std::to_string(k));
        }
    }

    void summarize() {
        auto& s = out_.stats;
        if (s.steps.empty()) return;
        double n = static_cast<double>(s.steps.size());
        for (const auto& st : s.steps) {
            s.mean_chosen += static_cast<double>(st.chosen) / n;
            s.mean_rejected += static_cast<double>(st.rejected) / n;
        }
        for (const auto& st : s.steps) {
            s.sd_chosen += std::pow(static_cast<double>(st.chosen) - s.mean_chosen, 2) / n;
            s.sd_rejected += std::pow(static_cast<double>(st.rejected) - s.mean_rejected, 2) / n;
        }
        s.sd_chosen = std::sqrt(s.sd_chosen);
        s.sd_rejected = std::sqrt(s.sd_rejected);
    }

    const PuzzleInstance& p_;
    Generator& gen_;
    const SolveContext& ctx_;
    const DatagenConfig& cfg_;
    std::size_t cap_ = 0;
    DatagenResult out_;
};

ordered_json meta_json(const RecordMeta& m) {
    ordered_json j;
    j["instance_id"] = m.instance_id;
    j["step"] = m.step;
    j["branch"] = m.branch;
    return j;
}

RecordMeta meta_from(const json& j) {
    return {j.at("instance_id").get<std::string>(), j.at("step").get<std::size_t>(), j.at("branch").get<std::string>()};
}

template <class Record>
std::size_t write_lines(const std::vector<Record>& records, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (out) {
            for (const auto& r : records) out << to_json(r).dump() << '\n';
            out.flush();
        }
        if (out) return records.size();
    }
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw std::runtime_error("cannot write " + path.string());
}

template <class Record, class Fn>
std::vector<Record> read_lines(const std::filesystem::path& path, Fn parse) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<Record> out;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        out.push_back(parse(json::parse(line)));
    }
    return out;
}

}  // namespace

DatagenResult run_dfs(const PuzzleInstance& instance, Generator& generator, const SolveContext& ctx,
                      const DatagenConfig& config) {
    if (config.n_samples == 0) throw std::invalid_argument("run_dfs: n_samples must be positive");
    return Dfs(instance, generator, ctx, config).run();
}

ordered_json to_json(const SftRecord& r) {
    ordered_json j;
    j["prompt"] = r.prompt;
    j["completion"] = r.completion;
    j["meta"] = meta_json(r.meta);
    return j;
}

ordered_json to_json(const PreferenceRecord& r) {
    ordered_json j;
    j["prompt"] = r.prompt;
    j["chosen"] = r.chosen;
    j["rejected"] = r.rejected;
    j["meta"] = meta_json(r.meta);
    return j;
}

std::size_t export_records(const std::vector<SftRecord>& records, const std::filesystem::path& path) {
    return write_lines(records, path);
}

std::size_t export_records(const std::vector<PreferenceRecord>& records, const std::filesystem::path& path) {
    return write_lines(records, path);
}

std::vector<SftRecord> read_sft(const std::filesystem::path& path) {
    return read_lines<SftRecord>(path, [](const json& j) {
        return SftRecord{j.at("prompt").get<std::string>(), j.at("completion").get<std::string>(), meta_from(j.at("meta"))};
    });
}

std::vector<PreferenceRecord> read_pref(const std::filesystem::path& path) {
    return read_lines<PreferenceRecord>(path, [](const json& j) {
        return PreferenceRecord{j.at("prompt").get<std::string>(), j.at("chosen").get<std::string>(),
                                j.at("rejected").get<std::string>(), meta_from(j.at("meta"))};
    });
}

}  // namespace asploop
