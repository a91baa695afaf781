#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "asploop/fixtures.hpp"
#include "asploop/gateway.hpp"
#include "asploop/grounder.hpp"
#include "asploop/parser.hpp"
#include "asploop/solver.hpp"

#ifndef ASPLOOP_FIXTURES_DIR
#define ASPLOOP_FIXTURES_DIR "fixtures"
#endif

namespace testing {

inline asploop::FixturePaths fixtures() { return {ASPLOOP_FIXTURES_DIR}; }

inline asploop::asp::GroundProgram ground_text(const std::string& text) {
    return asploop::asp::ground(asploop::asp::parse_program(text));
}

inline std::vector<asploop::asp::AnswerSet> models_of(const std::string& text) {
    return asploop::asp::enumerate_models(ground_text(text), 1'000'000).models;
}

inline const asploop::PuzzleInstance& puzzle(const std::string& id) {
    static const auto data = asploop::load_dataset(fixtures().puzzles());
    for (const auto& p : data.instances) {
        if (p.id == id) return p;
    }
    throw std::runtime_error("no fixture puzzle " + id);
}

inline std::string joined_reference(const std::string& id, std::size_t blocks) {
    auto all = asploop::reference_blocks(fixtures(), id);
    std::string out;
    for (std::size_t i = 0; i < blocks && i < all.size(); ++i) out += all[i] + "\n";
    return out;
}

// 3x3 grid with categories a/b/c and members a1..a3 etc; assignment(A,B,C).
inline std::string grid3x3_base() {
    return "a(a1;a2;a3).\nb(b1;b2;b3).\nc(c1;c2;c3).\n"
           "1 {assignment(A, B, C) : b(B), c(C)} 1 :- a(A).\n"
           ":- assignment(A1, B, _), assignment(A2, B, _), A1 != A2.\n"
           ":- assignment(A1, _, C), assignment(A2, _, C), A1 != A2.\n";
}

// A random constraint over the 3x3 grid: one or two literals, optionally negated.
inline std::string random_constraint(std::mt19937& rng) {
    auto pick = [&](const char* prefix) {
        return std::string(prefix) + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng));
    };
    auto literal = [&] {
        std::string a = rng() % 4 == 0 ? "_" : pick("a");
        std::string b = rng() % 3 == 0 ? "_" : pick("b");
        std::string c = rng() % 3 == 0 ? "_" : pick("c");
        return "assignment(" + a + ", " + b + ", " + c + ")";
    };
    std::string body = literal();
    if (rng() % 2) {
        std::string second = literal();
        if (second.find('_') == std::string::npos && rng() % 2) second = "not " + second;
        body += ", " + second;
    }
    return ":- " + body + ".\n";
}

inline std::string random_string(std::mt19937& rng, std::size_t max_len) {
    static const std::string alphabet = "abcAB_-x1 ";
    std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
}

}  // namespace testing
