#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asploop/verdict.hpp"

namespace asploop {

enum class Backend { in_process, external, automatic };

std::string to_string(Backend b);
/// Accepts internal / in-process, external, auto.
Backend backend_from_string(const std::string& s);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t default_cap = 1'000'000;

struct GatewayOptions {
    std::string solver_cmd;  // empty: ASPLOOP_SOLVER_CMD, then clingo on PATH, then python3 -m clingo
    bool detect_solver = true;
    std::chrono::milliseconds timeout{30'000};
    std::size_t max_processes = 0;  // 0: hardware concurrency
    std::size_t keep_models = 1000;
};

/// In-process and external solving behind one call. Safe to share between threads.
class SolverGateway {
public:
    explicit SolverGateway(GatewayOptions options = {});
    ~SolverGateway();

    /// keep overrides how many models are retained in the verdict.
    SolverVerdict solve(std::string_view program, std::size_t cap, Backend backend,
                        std::optional<std::size_t> keep = std::nullopt) const;

    bool has_external() const { return !solver_cmd_.empty(); }
    const std::string& solver_cmd() const { return solver_cmd_; }
    const GatewayOptions& options() const { return options_; }

private:
    SolverVerdict solve_external(std::string_view program, std::size_t cap, std::size_t keep) const;

    GatewayOptions options_;
    std::string solver_cmd_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

SolverVerdict solve_in_process(std::string_view program, std::size_t cap,
                               std::size_t keep = std::numeric_limits<std::size_t>::max());

/// Reads clingo-style text output.
SolverVerdict parse_external_output(std::string_view out, std::string_view err, int exit_status, std::size_t cap,
                                    std::size_t keep = std::numeric_limits<std::size_t>::max());

/// Empty when nothing usable is found.
std::string detect_solver_cmd();

struct ProcessResult {
    std::string out, err;
    int status = -1;  // exit code, or 128 + signal
    bool timed_out = false;
    std::string spawn_error;
};

ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout);

/// Splits a command line on whitespace; no quoting support.
std::vector<std::string> split_command(const std::string& cmd);

}  // namespace asploop
