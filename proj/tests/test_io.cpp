#include <doctest.h>

#include <atomic>
#include <thread>

// same configuration as the library, so both sides see one httplib
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asploop/generator.hpp"
#include "asploop/trajectory.hpp"
#include "support.hpp"

using namespace asploop;

TEST_CASE("extract_code") {
    CHECK(extract_code("Here:\n```asp\na.\nb :- a.\n```\nDone.") == "a.\nb :- a.");
    CHECK(extract_code("a.\nb :- a.\n") == "a.\nb :- a.\n");
    CHECK(extract_code("First the facts.\na.\nThat is all.") == "a.");
    CHECK(extract_code("no code at all") == "no code at all");
}

TEST_CASE("prompts") {
    const auto& p = testing::puzzle("event_planners");
    auto base = build_base_prompt(p, {});
    CHECK(base.find(p.description) != std::string::npos);
    CHECK(base.find(render_catalog(p)) != std::string::npos);
    std::string tail = base_request() + "\n";
    REQUIRE(base.size() >= tail.size());
    CHECK(base.compare(base.size() - tail.size(), tail.size(), tail) == 0);

    Trajectory t;
    CHECK_THROWS_AS(build_hint_prompt(t, p.hints[0]), std::logic_error);
    Step s0;
    s0.prompt = base;
    s0.candidates.push_back({"a.", "a.", {}, {}, {}, 1});
    t.steps.push_back(s0);
    CHECK_THROWS_AS(build_hint_prompt(t, p.hints[0]), std::logic_error);
    t.steps[0].selected_index = 0;
    auto hint = build_hint_prompt(t, p.hints[0]);
    CHECK(hint.find(p.hints[0]) != std::string::npos);
    CHECK(hint.find("a.") != std::string::npos);

    CandidateEncoding extra{"b.", "b.", {}, {}, {}, 1};
    CHECK(combine(t) == "a.");
    CHECK(combine(t, &extra) == "a.\nb.");

    auto with_shot = build_base_prompt(p, {{"other puzzle", "x(1)."}});
    CHECK(with_shot.find("x(1).") != std::string::npos);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("chat response parsing splits usage tokens") {
    auto r = parse_chat_response(
        R"({"choices":[{"message":{"content":"a."}},{"message":{"content":"b."}},{"message":{"content":"c."}}],)"
        R"("usage":{"completion_tokens":10}})");
    REQUIRE(r.size() == 3);
    CHECK(r[0].tokens == 4);
    CHECK(r[1].tokens == 3);
    CHECK(r[2].tokens == 3);
    CHECK(r[1].text == "b.");
    CHECK_THROWS_AS(parse_chat_response("not json"), GeneratorError);
    CHECK_THROWS_AS(parse_chat_response("{}"), GeneratorError);
}

TEST_CASE("scripted generator continues per prompt and fails on unknown prompts") {
    std::map<std::string, std::vector<Completion>> script;
    script[sha256_hex("p")] = {{"a.", 1}, {"b.", 2}, {"c.", 3}};
    ScriptedGenerator g(script);
    auto first = generate(g, "p", 2, 0.5);
    REQUIRE(first.size() == 2);
    CHECK(first[1].text == "b.");
    CHECK(first[1].token_count == 2);
    auto second = g.complete("p", 1, 0.5);
    CHECK(second[0].text == "c.");
    CHECK_THROWS_AS(g.complete("p", 1, 0.5), GeneratorError);
    CHECK_THROWS_AS(g.complete("q", 1, 0.5), GeneratorError);
    CHECK(g.reproducible());
}

TEST_CASE("script files round trip") {
    std::map<std::string, std::vector<Completion>> script;
    script["00ff"] = {{"a.\n", 1}, {"```\nb.\n```", 2}};
    auto path = std::filesystem::temp_directory_path() / "asploop_script_test.jsonl";
    write_script(path, script);
    auto back = read_script(path);
    REQUIRE(back.count("00ff"));
    CHECK(back["00ff"].size() == 2);
    CHECK(back["00ff"][1].text == "```\nb.\n```");
    CHECK(back["00ff"][1].tokens == 2);
    std::filesystem::remove(path);
}

TEST_CASE("pool generator wraps and records") {
    std::vector<Completion> pool{{"a.", 1}, {"b.", 1}, {"c.", 1}};
    PoolGenerator g([&](const std::string&) { return &pool; });
    auto x = g.complete("p", 2, 1.0);
    auto y = g.complete("p", 2, 1.0);
    CHECK(x[0].text == "a.");
    CHECK(y[0].text == "c.");
    CHECK(y[1].text == "a.");
    CHECK(g.complete("other", 1, 1.0)[0].text == "a.");
    CHECK(g.served().at(sha256_hex("p")).size() == 4);
}

TEST_CASE("http generator against a local endpoint") {
    httplib::Server server;
    std::atomic<int> calls{0};
    std::string seen_auth;
    nlohmann::json seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (calls++ == 0) {
            res.status = 503;
            return;
        }
        seen_auth = req.get_header_value("Authorization");
        seen_body = nlohmann::json::parse(req.body);
        nlohmann::json out = {{"choices", nlohmann::json::array()}, {"usage", {{"completion_tokens", 7}}}};
        for (int i = 0; i < seen_body["n"].get<int>(); ++i)
            out["choices"].push_back({{"message", {{"content", "```\nx(" + std::to_string(i) + ").\n```"}}}});
        res.set_content(out.dump(), "application/json");
    });
    server.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpGeneratorOptions o;
    o.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    o.model = "m";
    o.token = "secret";
    o.seed = 3;
    HttpGenerator g(o);
    auto c = generate(g, "prompt", 2, 0.7);
    CHECK(calls == 2);  // one transient failure, then success
    REQUIRE(c.size() == 2);
    CHECK(c[1].text == "x(1).");
    CHECK(c[0].token_count == 4);
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_body["model"] == "m");
    CHECK(seen_body["seed"] == 3);
    CHECK(seen_body["messages"][0]["content"] == "prompt");

    o.url = "http://127.0.0.1:" + std::to_string(port) + "/bad";
    HttpGenerator bad(o);
    CHECK_THROWS_AS(generate(bad, "prompt", 1, 0.7), GeneratorError);

    server.stop();
    th.join();
}

TEST_CASE("in-process gateway") {
    SolverGateway gw(GatewayOptions{.detect_solver = false});
    auto v = gw.solve("{a; b}.\n", 10, Backend::in_process);
    CHECK(v.model_count() == 4);
    CHECK(v.flagless());
    CHECK(v.backend() == "internal");

    auto e = gw.solve("a(.\n", 10, Backend::in_process);
    CHECK(e.has_error());
    CHECK_FALSE(e.diagnostics().empty());

    auto w = gw.solve("p(1).\nq(X) :- p(X), r(X).\n", 10, Backend::in_process);
    CHECK(w.has_error());

    auto u = gw.solve("#minimize { X : p(X) }.\n", 10, Backend::automatic);
    CHECK(u.has_error());
    CHECK(u.diagnostics().front().find("no external solver") != std::string::npos);

    CHECK_THROWS_AS(gw.solve("a.", 10, Backend::external), ConfigError);
    CHECK_THROWS_AS(gw.solve("a.", 0, Backend::in_process), std::invalid_argument);
    CHECK(backend_from_string("internal") == Backend::in_process);
    CHECK_THROWS(backend_from_string("nope"));
}

TEST_CASE("external output parsing") {
    auto v = parse_external_output("clingo version 5\nReading from x\nSolving...\nAnswer: 1\na b\nAnswer: 2\na\n"
                                   "SATISFIABLE\n",
                                   "", 10, 100);
    CHECK(v.model_count() == 2);
    CHECK(v.flagless());
    CHECK(v.backend() == "external");

    auto u = parse_external_output("Solving...\nUNSATISFIABLE\n", "", 20, 100);
    CHECK(u.is_unsat());

    auto info = parse_external_output("Answer: 1\np(1)\nSATISFIABLE\n",
                                      "-:2:12-16: info: atom does not occur in any rule head:\n  r(X)\n", 10, 100);
    CHECK(info.has_error());

    auto err = parse_external_output("", "-:1:3-4: error: syntax error, unexpected .\n", 65, 100);
    CHECK(err.has_error());

    auto over = parse_external_output("Answer: 1\na\nAnswer: 2\nb\nAnswer: 3\nc\nSATISFIABLE\n", "", 10, 2);
    CHECK(over.cap_exceeded());

    CHECK(parse_external_output("garbage", "", 0, 10).has_error());
}

TEST_CASE("external backend when a solver is available") {
    SolverGateway gw;
    if (!gw.has_external()) {
        MESSAGE("no external solver; skipped");
        return;
    }
    auto v = gw.solve("{a; b}.\n:- a, b.\n", 10, Backend::external);
    CHECK(v.model_count() == 3);
    CHECK(v.flagless());
    auto u = gw.solve("a.\n:- a.\n", 10, Backend::external);
    CHECK(u.is_unsat());
}

TEST_CASE("run_process timeout") {
    auto r = run_process({"sleep", "5"}, std::chrono::milliseconds(200));
    CHECK(r.timed_out);
    auto ok = run_process({"echo", "hi"}, std::chrono::milliseconds(5000));
    CHECK(ok.status == 0);
    CHECK(ok.out == "hi\n");
    auto missing = run_process({"/nonexistent/binary"}, std::chrono::milliseconds(1000));
    CHECK((!missing.spawn_error.empty() || missing.status != 0));
    CHECK(split_command("python3  -m clingo") == std::vector<std::string>{"python3", "-m", "clingo"});
}
