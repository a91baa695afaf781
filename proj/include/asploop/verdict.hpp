#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asploop/solver.hpp"

namespace asploop {

/// Outcome of one solve. Built only through the factories, which keep the
/// flags mutually exclusive.
class SolverVerdict {
public:
    using Duration = std::chrono::duration<double>;

    static SolverVerdict error(std::vector<std::string> diagnostics, std::string backend = {}, Duration t = {});
    /// found = models seen (at most cap + 1); models may be a prefix subset.
    static SolverVerdict enumerated(std::vector<asp::AnswerSet> models, std::size_t found, std::size_t cap,
                                    std::vector<std::string> diagnostics = {}, std::string backend = {},
                                    Duration t = {});

    const std::vector<asp::AnswerSet>& models() const { return models_; }
    std::size_t model_count() const { return count_; }
    bool has_error() const { return error_; }
    bool is_unsat() const { return unsat_; }
    bool cap_exceeded() const { return cap_exceeded_; }
    bool flagless() const { return !error_ && !unsat_ && !cap_exceeded_; }
    /// Count is exact (enumeration finished below the cap).
    bool exhausted() const { return !error_ && !cap_exceeded_; }
    std::size_t cap() const { return cap_; }
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }
    const std::string& backend() const { return backend_; }
    Duration wall_time() const { return wall_; }

    void set_wall_time(Duration t) { wall_ = t; }
    void set_backend(std::string b) { backend_ = std::move(b); }

    /// Flags and count; the model list is summarized by its length only.
    nlohmann::json summary() const;

private:
    SolverVerdict() = default;

    std::vector<asp::AnswerSet> models_;
    std::size_t count_ = 0;
    std::size_t cap_ = 0;
    bool error_ = false, unsat_ = false, cap_exceeded_ = false;
    std::vector<std::string> diagnostics_;
    std::string backend_;
    Duration wall_{};
};

/// f_r = recip - e - u - ne, with recip kept as an exact fraction.
struct RewardValue {
    std::uint64_t recip_num = 0;  // recip_term = recip_num / recip_den
    std::uint64_t recip_den = 1;
    bool e_flag = false, u_flag = false, ne_flag = false;

    double recip_term() const { return static_cast<double>(recip_num) / static_cast<double>(recip_den); }
    int flag_sum() const { return int(e_flag) + int(u_flag) + int(ne_flag); }
    double value() const { return recip_term() - flag_sum(); }

    /// Exact comparison on value().
    friend std::strong_ordering operator<=>(const RewardValue& a, const RewardValue& b);
    friend bool operator==(const RewardValue& a, const RewardValue& b) { return (a <=> b) == 0; }
};

std::string to_string(const RewardValue& r);
nlohmann::json to_json(const RewardValue& r);

RewardValue reward(const SolverVerdict& v);
/// recip is 1 only when the verdict is flagless, exhausted, and M == expected.
RewardValue choice_rule_reward(const SolverVerdict& v, std::uint64_t expected);
bool is_negative(const RewardValue& r);

}  // namespace asploop
