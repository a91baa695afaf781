#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "asploop/match.hpp"
#include "asploop/verdict.hpp"
#include "support.hpp"

using namespace asploop;

TEST_CASE("adding a constraint never adds models (3x3, 100 random cases)") {
    std::mt19937 rng(20240611);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        std::string program = testing::grid3x3_base();
        int extra = std::uniform_int_distribution<int>(0, 2)(rng);
        for (int k = 0; k < extra; ++k) program += testing::random_constraint(rng);
        std::string c = testing::random_constraint(rng);
        auto before = testing::models_of(program);
        auto after = testing::models_of(program + c);
        std::set<asp::AnswerSet> base(before.begin(), before.end());
        for (const auto& m : after) CHECK(base.count(m) == 1);
        CHECK(after.size() <= before.size());
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("edit_distance is a metric (1000 random pairs)") {
    std::mt19937 rng(7);
    for (int i = 0; i < 1000; ++i) {
        auto a = testing::random_string(rng, 20);
        auto b = testing::random_string(rng, 20);
        auto c = testing::random_string(rng, 20);
        auto ab = edit_distance(a, b);
        CHECK(ab == edit_distance(b, a));
        CHECK((ab == 0) == (a == b));
        CHECK(edit_distance(a, c) <= ab + edit_distance(b, c));
        CHECK(ab >= (a.size() > b.size() ? a.size() - b.size() : b.size() - a.size()));
        CHECK(ab <= std::max(a.size(), b.size()));
    }
}

TEST_CASE("normalize_surface is idempotent") {
    std::mt19937 rng(11);
    for (int i = 0; i < 500; ++i) {
        auto s = testing::random_string(rng, 24);
        auto once = normalize_surface(s);
        CHECK(normalize_surface(once) == once);
    }
}

TEST_CASE("matching ignores tuple order and argument order") {
    std::mt19937 rng(5);
    for (const char* id : {"event_planners", "tattoo_parlor", "observatory"}) {
        const auto& p = testing::puzzle(id);
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : p.solution) {
            std::vector<std::string> t;
            for (const auto& x : r) t.push_back(normalize_surface(x));
            rows.push_back(t);
        }
        for (int trial = 0; trial < 10; ++trial) {
            auto shuffled = rows;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            std::vector<std::size_t> perm(p.m());
            for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
            std::shuffle(perm.begin(), perm.end(), rng);
            for (auto& r : shuffled) {
                std::vector<std::string> moved(r.size());
                for (std::size_t k = 0; k < r.size(); ++k) moved[k] = r[perm[k]];
                r = moved;
            }
            auto exact = match_tuples(shuffled, p);
            CHECK(exact.matched);
            CHECK(exact.method == MatchMethod::exact);
            // the fallback is never stricter than exact
            CHECK(match_tuples(shuffled, p, false).matched);
        }
    }
}

TEST_CASE("reward is antitone in the model count") {
    for (std::size_t m = 1; m < 300; ++m) {
        auto a = reward(SolverVerdict::enumerated({}, m, 1000));
        auto b = reward(SolverVerdict::enumerated({}, m + 1, 1000));
        CHECK(a > b);
        CHECK_FALSE(is_negative(b));
    }
}

TEST_CASE("pair count law over every split of 5") {
    for (std::size_t chosen = 0; chosen <= 5; ++chosen) {
        std::size_t rejected = 5 - chosen;
        std::size_t want = (chosen && rejected) ? std::min<std::size_t>(chosen, 2) * rejected : 0;
        CHECK(expected_pair_count(chosen, rejected, 2) == want);
    }
}
