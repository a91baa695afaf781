#include "asploop/verdict.hpp"

#include <stdexcept>

namespace asploop {

SolverVerdict SolverVerdict::error(std::vector<std::string> diagnostics, std::string backend, Duration t) {
    SolverVerdict v;
    v.error_ = true;
    if (diagnostics.empty()) diagnostics.push_back("solver error");
    v.diagnostics_ = std::move(diagnostics);
    v.backend_ = std::move(backend);
    v.wall_ = t;
    return v;
}

SolverVerdict SolverVerdict::enumerated(std::vector<asp::AnswerSet> models, std::size_t found, std::size_t cap,
                                        std::vector<std::string> diagnostics, std::string backend, Duration t) {
    if (cap < 1) throw std::invalid_argument("SolverVerdict: cap must be at least 1");
    if (models.size() > found) throw std::invalid_argument("SolverVerdict: more models than counted");
    if (found > cap + 1) throw std::invalid_argument("SolverVerdict: enumeration ran past cap + 1");
    SolverVerdict v;
    v.cap_ = cap;
    v.count_ = found;
    v.unsat_ = found == 0;
    v.cap_exceeded_ = found > cap;
    v.models_ = std::move(models);
    v.diagnostics_ = std::move(diagnostics);
    v.backend_ = std::move(backend);
    v.wall_ = t;
    return v;
}

nlohmann::json SolverVerdict::summary() const {
    return {{"models", count_},       {"has_error", error_},         {"is_unsat", unsat_},
            {"cap_exceeded", cap_exceeded_}, {"diagnostics", diagnostics_}, {"backend", backend_}};
}

std::strong_ordering operator<=>(const RewardValue& a, const RewardValue& b) {
    // (num - flags*den) / den, compared by cross multiplication
    auto lhs = (static_cast<__int128>(a.recip_num) - static_cast<__int128>(a.flag_sum()) * a.recip_den) * b.recip_den;
    auto rhs = (static_cast<__int128>(b.recip_num) - static_cast<__int128>(b.flag_sum()) * b.recip_den) * a.recip_den;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string to_string(const RewardValue& r) {
    std::string s = r.recip_num == 0 ? "0" : std::to_string(r.recip_num) + "/" + std::to_string(r.recip_den);
    int flags = r.flag_sum();
    if (flags) s += " - " + std::to_string(flags);
    return s;
}

nlohmann::json to_json(const RewardValue& r) {
    return {{"value", r.value()},     {"recip", to_string(r)}, {"e", r.e_flag ? 1 : 0},
            {"u", r.u_flag ? 1 : 0}, {"ne", r.ne_flag ? 1 : 0}};
}

namespace {

RewardValue flags_of(const SolverVerdict& v) {
    RewardValue r;
    r.e_flag = v.has_error();
    r.u_flag = v.is_unsat();
    r.ne_flag = v.cap_exceeded();
    return r;
}

}  // namespace

RewardValue reward(const SolverVerdict& v) {
    RewardValue r = flags_of(v);
    if (v.flagless() && v.model_count() >= 1) {
        r.recip_num = 1;
        r.recip_den = v.model_count();
    }
    return r;
}

RewardValue choice_rule_reward(const SolverVerdict& v, std::uint64_t expected) {
    if (expected < 1) throw std::invalid_argument("choice_rule_reward: expected must be positive");
    RewardValue r = flags_of(v);
    if (v.flagless() && v.exhausted() && v.model_count() == expected) r.recip_num = 1;
    return r;
}

bool is_negative(const RewardValue& r) { return r < RewardValue{}; }

}  // namespace asploop
