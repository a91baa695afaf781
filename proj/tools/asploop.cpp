// asploop: solve, datagen, search, eval.
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "asploop/datagen.hpp"
#include "asploop/fixtures.hpp"
#include "asploop/gateway.hpp"
#include "asploop/generator.hpp"
#include "asploop/search.hpp"

using namespace asploop;
using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0, exit_runtime = 1, exit_config = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string dataset;
    std::string solver = "auto";
    std::string solver_cmd;
    std::string generator = "scripted";
    std::string generator_url, generator_script, generator_model = "default";
    std::string preamble_file, shots_file;
    long long seed = 0;
    bool seed_set = false;
    std::size_t jobs = 1;
    std::string out;
    std::optional<std::size_t> cap;
    double timeout_s = 30;

    // solve
    std::string program;
    std::size_t show = 1;

    // datagen / search
    std::size_t n = 5;
    std::optional<double> temperature;
    std::size_t max_chosen = 2;
    std::size_t backtrack_limit = 5;
    std::size_t regen_multiplier = 2;
    bool no_regen = false;

    // eval
    std::string outcomes;
};

std::string now_iso() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string format_value(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    std::string r = s.str();
    if (r.find_first_of(".e") == std::string::npos) r += ".0";
    return r;
}

// Output layout: a directory, or a report path ending in .json whose siblings
// share its stem.
struct OutLayout {
    fs::path dir;
    std::string prefix;
    std::optional<fs::path> report;

    fs::path at(const std::string& name) const { return dir / (prefix + name); }
    fs::path metrics() const { return report ? *report : at("metrics.json"); }
};

OutLayout layout_for(const std::string& out) {
    if (out.empty()) throw UsageError("--out is required");
    OutLayout l;
    fs::path p(out);
    if (p.extension() == ".json") {
        l.dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
        l.prefix = p.stem().string() + ".";
        l.report = p;
    } else {
        l.dir = p;
    }
    fs::create_directories(l.dir);
    return l;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

SolverGateway make_gateway(const Options& o) {
    GatewayOptions g;
    g.solver_cmd = o.solver_cmd;
    g.timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000));
    return SolverGateway(g);
}

Backend backend_of(const Options& o, const SolverGateway& gw) {
    Backend b;
    try {
        b = backend_from_string(o.solver);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (b == Backend::external && !gw.has_external())
        throw ConfigError("--solver external needs --solver-cmd, ASPLOOP_SOLVER_CMD, or clingo on PATH");
    return b;
}

Dataset load(const Options& o) {
    if (o.dataset.empty()) throw UsageError("--dataset is required");
    if (!fs::exists(o.dataset)) throw UsageError("dataset not found: " + o.dataset);
    auto d = load_dataset(o.dataset);
    for (const auto& r : d.rejected)
        std::cerr << "warning: record " << r.record << " (" << r.id << ") rejected: " << r.reason << "\n";
    return d;
}

std::string preamble_of(const Options& o) {
    if (o.preamble_file.empty()) return default_preamble();
    if (!fs::exists(o.preamble_file)) throw UsageError("preamble not found: " + o.preamble_file);
    return read_text(o.preamble_file);
}

std::vector<Exemplar> shots_of(const Options& o) {
    if (o.shots_file.empty()) return {};
    if (!fs::exists(o.shots_file)) throw UsageError("shots file not found: " + o.shots_file);
    std::vector<Exemplar> out;
    for (const auto& j : json::parse(read_text(o.shots_file)))
        out.push_back({j.at("input").get<std::string>(), j.at("encoding").get<std::string>()});
    if (out.size() > 2) throw UsageError("at most two exemplars");
    return out;
}

// A fresh generator per run so scripted cursors start at zero.
std::unique_ptr<Generator> make_generator(const Options& o) {
    if (o.generator == "scripted") {
        if (o.generator_script.empty()) throw UsageError("--generator scripted needs --generator-script");
        if (!fs::exists(o.generator_script)) throw UsageError("generator script not found: " + o.generator_script);
        return std::make_unique<ScriptedGenerator>(fs::path(o.generator_script));
    }
    if (o.generator == "http") {
        if (o.generator_url.empty()) throw UsageError("--generator http needs --generator-url");
        HttpGeneratorOptions h;
        h.url = o.generator_url;
        h.model = o.generator_model;
        if (o.seed_set) h.seed = o.seed;
        return std::make_unique<HttpGenerator>(h);
    }
    throw UsageError("unknown generator " + o.generator);
}

std::string file_sha256(const std::string& path) { return sha256_hex(read_text(path)); }

ordered_json base_manifest(const std::string& command, const Options& o, const Generator* gen,
                           const SolverGateway& gw, const std::string& started) {
    ordered_json m;
    m["command"] = command;
    ordered_json cfg;
    cfg["n"] = o.n;
    if (o.temperature) cfg["temperature"] = *o.temperature;
    cfg["max_chosen"] = o.max_chosen;
    cfg["backtrack_limit"] = o.backtrack_limit;
    cfg["regen_multiplier"] = o.regen_multiplier;
    cfg["regeneration"] = !o.no_regen;
    cfg["cap"] = o.cap ? json(*o.cap) : json("instance");
    cfg["jobs"] = o.jobs;
    cfg["preamble"] = o.preamble_file.empty() ? "default" : o.preamble_file;
    cfg["shots"] = o.shots_file;
    m["config"] = cfg;
    if (!o.dataset.empty()) {
        m["dataset"] = o.dataset;
        m["dataset_sha256"] = file_sha256(o.dataset);
    }
    if (gen) {
        m["generator"] = gen->id();
        m["reproducible"] = gen->reproducible();
        if (!o.generator_script.empty()) m["generator_script"] = o.generator_script;
        if (!o.generator_url.empty()) m["generator_url"] = o.generator_url;
    }
    m["solver"] = o.solver;
    m["solver_cmd"] = gw.solver_cmd();
    m["seed"] = o.seed;
    m["started"] = started;
    return m;
}

// Runs fn(i) for every index on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex fm;
    for (std::size_t t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(fm);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// ---- solve ------------------------------------------------------------------

int cmd_solve(const Options& o) {
    if (o.program.empty()) throw UsageError("solve needs a program file");
    if (!fs::exists(o.program)) throw UsageError("program not found: " + o.program);
    std::string text = read_text(o.program);
    auto gw = make_gateway(o);
    auto backend = backend_of(o, gw);
    auto v = gw.solve(text, o.cap.value_or(default_cap), backend, std::max<std::size_t>(o.show, 1));
    auto r = reward(v);
    if (v.is_unsat()) std::cout << "UNSAT\n";
    std::cout << "models: " << v.model_count() << (v.cap_exceeded() ? "+" : "") << "\n";
    std::cout << "flags: error=" << v.has_error() << " unsat=" << v.is_unsat() << " cap_exceeded=" << v.cap_exceeded()
              << "\n";
    std::cout << "backend: " << v.backend() << "\n";
    for (const auto& d : v.diagnostics()) std::cout << "diagnostic: " << d << "\n";
    for (std::size_t i = 0; i < v.models().size() && i < o.show; ++i)
        std::cout << "Answer " << i + 1 << ": " << asp::to_string(v.models()[i]) << "\n";
    std::cout << "reward: " << format_value(r.value()) << " (" << to_string(r) << ")\n";
    return v.has_error() ? exit_runtime : exit_ok;
}

// ---- datagen ----------------------------------------------------------------

int cmd_datagen(const Options& o) {
    std::string started = now_iso();
    auto data = load(o);
    auto layout = layout_for(o.out);
    auto gw = make_gateway(o);
    SolveContext ctx{gw, backend_of(o, gw)};
    auto gen = make_generator(o);
    DatagenConfig cfg;
    cfg.n_samples = o.n;
    cfg.temperature = o.temperature.value_or(0.8);
    cfg.max_chosen_branch = o.max_chosen;
    cfg.cap = o.cap;
    cfg.preamble = preamble_of(o);
    cfg.shots = shots_of(o);

    std::vector<DatagenResult> results(data.instances.size());
    parallel_for(data.instances.size(), o.jobs,
                 [&](std::size_t i) { results[i] = run_dfs(data.instances[i], *gen, ctx, cfg); });

    std::vector<SftRecord> sft;
    std::vector<PreferenceRecord> pref;
    std::string stats_lines;
    std::string csv = "instance_id,output_tokens,sft,pref,dropped_hints,status\n";
    std::size_t aborted = 0;
    for (const auto& r : results) {
        sft.insert(sft.end(), r.sft.begin(), r.sft.end());
        pref.insert(pref.end(), r.pref.begin(), r.pref.end());
        ordered_json s;
        s["instance_id"] = r.instance_id;
        s["aborted"] = r.aborted;
        if (r.aborted) s["abort_reason"] = r.abort_reason;
        s["stats"] = to_json(r.stats);
        stats_lines += s.dump() + "\n";
        csv += r.instance_id + "," + std::to_string(r.stats.output_tokens) + "," + std::to_string(r.sft.size()) + "," +
               std::to_string(r.pref.size()) + "," + std::to_string(r.stats.dropped_hints) + "," +
               (r.aborted ? "aborted" : "ok") + "\n";
        if (r.aborted) {
            ++aborted;
            std::cerr << r.instance_id << ": aborted: " << r.abort_reason << "\n";
        }
    }
    export_records(sft, layout.at("sft.jsonl"));
    export_records(pref, layout.at("pref.jsonl"));
    write_file(layout.at("stats.jsonl"), stats_lines);
    write_file(layout.at("tokens.csv"), csv);

    ordered_json metrics;
    metrics["instances"] = results.size();
    metrics["aborted"] = aborted;
    metrics["sft_records"] = sft.size();
    metrics["pref_records"] = pref.size();
    write_file(layout.metrics(), metrics.dump(2) + "\n");

    auto m = base_manifest("datagen", o, gen.get(), gw, started);
    m["partial"] = aborted > 0;
    m["artifacts"] = {layout.at("sft.jsonl").string(), layout.at("pref.jsonl").string(),
                      layout.at("stats.jsonl").string(), layout.at("tokens.csv").string(), layout.metrics().string()};
    m["finished"] = now_iso();
    write_file(layout.at("manifest.json"), m.dump(2) + "\n");
    std::cout << "instances: " << results.size() << "  sft: " << sft.size() << "  pref: " << pref.size()
              << "  aborted: " << aborted << "\n";
    return aborted ? exit_runtime : exit_ok;
}

// ---- search / eval ----------------------------------------------------------

void write_report(const OutLayout& layout, const AccuracyReport& rep, std::vector<std::string>& artifacts) {
    write_file(layout.metrics(), to_json(rep).dump(2) + "\n");
    write_file(layout.at("buckets.csv"), buckets_csv(rep));
    write_file(layout.at("outcomes.csv"), outcomes_csv(rep));
    artifacts.push_back(layout.metrics().string());
    artifacts.push_back(layout.at("buckets.csv").string());
    artifacts.push_back(layout.at("outcomes.csv").string());
}

void print_summary(const AccuracyReport& rep) {
    std::cout << "accuracy: " << format_value(rep.accuracy()) << " (" << rep.correct << "/" << rep.total << ")\n";
    for (const auto& b : failure_buckets()) std::cout << "  " << b << ": " << rep.buckets.at(b) << "\n";
    std::cout << "mean output tokens: " << format_value(rep.mean_output_tokens) << "\n";
}

int cmd_search(const Options& o) {
    std::string started = now_iso();
    auto data = load(o);
    auto layout = layout_for(o.out);
    auto gw = make_gateway(o);
    SolveContext ctx{gw, backend_of(o, gw)};
    auto gen = make_generator(o);
    SearchConfig cfg;
    cfg.n = o.n;
    cfg.temperature = o.temperature.value_or(1.0);
    cfg.backtrack_limit = o.backtrack_limit;
    cfg.regen_multiplier = o.regen_multiplier;
    cfg.enable_regeneration = !o.no_regen;
    cfg.cap = o.cap;
    cfg.preamble = preamble_of(o);
    cfg.shots = shots_of(o);

    std::vector<SearchOutcome> outcomes(data.instances.size());
    parallel_for(data.instances.size(), o.jobs,
                 [&](std::size_t i) { outcomes[i] = run_search(data.instances[i], *gen, ctx, cfg); });

    std::string trace, lines;
    std::size_t aborted = 0;
    for (const auto& oc : outcomes) {
        for (std::size_t k = 0; k < oc.trace.size(); ++k) trace += to_json(oc.trace[k], oc.instance_id, k).dump() + "\n";
        lines += to_json(oc).dump() + "\n";
        if (oc.aborted) {
            ++aborted;
            std::cerr << oc.instance_id << ": aborted: " << oc.abort_reason << "\n";
        }
    }
    std::vector<std::string> artifacts{layout.at("trace.jsonl").string(), layout.at("outcomes.jsonl").string()};
    write_file(layout.at("trace.jsonl"), trace);
    write_file(layout.at("outcomes.jsonl"), lines);
    auto rep = evaluate_accuracy(outcomes, data.instances);
    write_report(layout, rep, artifacts);

    auto m = base_manifest("search", o, gen.get(), gw, started);
    m["partial"] = aborted > 0;
    m["artifacts"] = artifacts;
    m["finished"] = now_iso();
    write_file(layout.at("manifest.json"), m.dump(2) + "\n");
    print_summary(rep);
    return aborted ? exit_runtime : exit_ok;
}

int cmd_eval(const Options& o) {
    std::string started = now_iso();
    auto data = load(o);
    if (o.outcomes.empty()) throw UsageError("eval needs --outcomes");
    if (!fs::exists(o.outcomes)) throw UsageError("outcomes not found: " + o.outcomes);
    auto layout = layout_for(o.out);
    auto gw = make_gateway(o);
    auto backend = backend_of(o, gw);

    std::map<std::string, std::string> programs;
    std::map<std::string, std::size_t> tokens;
    std::ifstream in(o.outcomes);
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        auto j = json::parse(line);
        auto id = j.at("instance_id").get<std::string>();
        programs[id] = j.value("final_program", "");
        tokens[id] = j.value("output_tokens", std::size_t{0});
    }
    std::vector<SearchOutcome> outcomes(data.instances.size());
    parallel_for(data.instances.size(), o.jobs, [&](std::size_t i) {
        const auto& p = data.instances[i];
        auto& oc = outcomes[i];
        oc.instance_id = p.id;
        auto it = programs.find(p.id);
        if (it == programs.end()) {
            oc.final_verdict = SolverVerdict::error({"no outcome for " + p.id});
            return;
        }
        oc.final_program = it->second;
        oc.total_output_tokens = tokens[p.id];
        oc.final_verdict = gw.solve(oc.final_program, o.cap.value_or(classification_cap(p)), backend, std::size_t{2});
    });
    auto rep = evaluate_accuracy(outcomes, data.instances);
    std::vector<std::string> artifacts;
    write_report(layout, rep, artifacts);
    auto m = base_manifest("eval", o, nullptr, gw, started);
    m["outcomes"] = o.outcomes;
    m["artifacts"] = artifacts;
    m["finished"] = now_iso();
    write_file(layout.at("manifest.json"), m.dump(2) + "\n");
    print_summary(rep);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asploop: solver-in-the-loop ASP generation for grid puzzles"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--dataset", o.dataset, "puzzle dataset (.json or .jsonl)");
    app.add_option("--solver", o.solver, "internal, external, or auto")->capture_default_str();
    app.add_option("--solver-cmd", o.solver_cmd, "external solver command (default: $ASPLOOP_SOLVER_CMD or clingo)");
    app.add_option("--generator", o.generator, "scripted or http")->capture_default_str();
    app.add_option("--generator-url", o.generator_url, "chat-completions endpoint");
    app.add_option("--generator-script", o.generator_script, "JSONL script for the scripted generator");
    app.add_option("--generator-model", o.generator_model, "model name sent to the endpoint")->capture_default_str();
    app.add_option("--preamble", o.preamble_file, "file replacing the built-in instructions");
    app.add_option("--shots", o.shots_file, "JSON list of up to two {input, encoding} exemplars");
    auto* seed = app.add_option("--seed", o.seed, "seed passed to the generator");
    app.add_option("--jobs", o.jobs, "instances processed in parallel")->capture_default_str();
    app.add_option("--out", o.out, "output directory, or report path ending in .json");
    app.add_option("--cap", o.cap, "model cap (default: instance-derived, 1000000 for solve)");
    app.add_option("--timeout", o.timeout_s, "external solver timeout in seconds")->capture_default_str();

    auto* solve = app.add_subcommand("solve", "solve one program and print its verdict");
    solve->add_option("program", o.program, "ASP file")->required();
    solve->add_option("--models", o.show, "answer sets to print")->capture_default_str();

    auto* datagen = app.add_subcommand("datagen", "generate SFT and preference data");
    datagen->add_option("--n", o.n, "samples per step")->capture_default_str();
    datagen->add_option("--temperature", o.temperature, "sampling temperature (default 0.8)");
    datagen->add_option("--max-chosen", o.max_chosen, "chosen answers to branch on")->capture_default_str();

    auto* search = app.add_subcommand("search", "best-of-N search with regeneration and backtracking");
    search->add_option("--n", o.n, "candidates per step")->capture_default_str();
    search->add_option("--temperature", o.temperature, "sampling temperature (default 1.0)");
    search->add_option("--backtrack-limit", o.backtrack_limit, "backtracking jumps allowed")->capture_default_str();
    search->add_option("--regen-multiplier", o.regen_multiplier, "extra samples per regeneration, times n")
        ->capture_default_str();
    search->add_flag("--no-regen", o.no_regen, "disable regeneration");

    auto* eval = app.add_subcommand("eval", "re-solve final programs and score them");
    eval->add_option("--outcomes", o.outcomes, "outcomes.jsonl written by search")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }
    o.seed_set = seed->count() > 0;
    if (o.n == 0) {
        std::cerr << "error: --n must be positive\n";
        return exit_config;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*datagen) return cmd_datagen(o);
        if (*search) return cmd_search(o);
        if (*eval) return cmd_eval(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_ok;
}
