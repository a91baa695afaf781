// Maintenance tool for the fixture corpus: fills oracle values, freezes derived
// numbers, records scripted-generator files, and checks all of it.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "asploop/fixtures.hpp"
#include "asploop/gateway.hpp"

#ifndef ASPLOOP_FIXTURES_DIR
#define ASPLOOP_FIXTURES_DIR "fixtures"
#endif

using namespace asploop;
using nlohmann::json;

namespace {

int cmd_oracle(const FixturePaths& paths, const std::string& id) {
    json all = json::parse(read_text(paths.puzzles()));
    for (auto& j : all) {
        if (j.at("id") != id) continue;
        auto p = instance_from_json(j);
        auto sols = grid_oracle(p, read_text(paths.encodings(id) / "full.lp"));
        if (sols.size() != 1) {
            std::cerr << id << ": oracle found " << sols.size() << " solutions, expected 1\n";
            return 1;
        }
        j["solution"] = sols.front();
        std::ofstream out(paths.puzzles(), std::ios::binary | std::ios::trunc);
        out << all.dump(2, ' ', false) << "\n";
        std::cout << id << ": solution written\n";
        return 0;
    }
    std::cerr << "no puzzle " << id << "\n";
    return 1;
}

int cmd_freeze(const FixturePaths& paths) {
    auto v = derive_values(paths);
    std::ofstream out(paths.derived(), std::ios::binary | std::ios::trunc);
    out << v.dump(2) << "\n";
    std::cout << "wrote " << paths.derived().string() << "\n";
    return 0;
}

int cmd_scripts(const FixturePaths& paths, bool check, const std::string& only) {
    auto data = load_dataset(paths.puzzles());
    SolverGateway gateway(GatewayOptions{.detect_solver = false});
    SolveContext ctx{gateway, Backend::in_process};
    std::filesystem::create_directories(paths.scripts());
    int bad = 0;
    for (const auto& name : scenario_names(paths)) {
        if (!only.empty() && name != only) continue;
        auto sc = load_scenario(paths, name);
        auto script = record_scenario(sc, data.instances, ctx);
        auto file = paths.scripts() / (name + ".jsonl");
        if (check) {
            bool same = std::filesystem::exists(file) && read_script(file).size() == script.size();
            if (same) {
                auto stored = read_script(file);
                for (const auto& [hash, items] : script) {
                    auto it = stored.find(hash);
                    if (it == stored.end() || it->second.size() != items.size()) {
                        same = false;
                        break;
                    }
                    for (std::size_t i = 0; i < items.size(); ++i)
                        same = same && it->second[i].text == items[i].text && it->second[i].tokens == items[i].tokens;
                }
            }
            std::cout << (same ? "ok    " : "STALE ") << file.string() << "\n";
            bad += !same;
        } else {
            write_script(file, script);
            std::cout << "wrote " << file.string() << " (" << script.size() << " prompts)\n";
        }
    }
    return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asploop fixture maintenance"};
    app.require_subcommand(1);
    std::string root = ASPLOOP_FIXTURES_DIR;
    app.add_option("--fixtures", root, "fixture directory")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "re-derive every fixture value and compare");
    auto* freeze = app.add_subcommand("freeze", "write derived.json from the current files");
    std::string oracle_id = "tattoo_parlor";
    auto* oracle = app.add_subcommand("oracle", "fill a puzzle's solution from the grid oracle");
    oracle->add_option("id", oracle_id, "puzzle id")->capture_default_str();
    bool check = false;
    std::string only;
    auto* scripts = app.add_subcommand("scripts", "record scripted-generator files from the candidate pools");
    scripts->add_flag("--check", check, "compare with the stored scripts instead of writing");
    scripts->add_option("--scenario", only, "only this scenario");

    CLI11_PARSE(app, argc, argv);
    FixturePaths paths{root};
    try {
        if (*verify) {
            auto rep = verify_fixtures(paths);
            std::cout << rep.to_text();
            return rep.ok() ? 0 : 1;
        }
        if (*freeze) return cmd_freeze(paths);
        if (*oracle) return cmd_oracle(paths, oracle_id);
        if (*scripts) return cmd_scripts(paths, check, only);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
