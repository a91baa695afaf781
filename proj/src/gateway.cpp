#include "asploop/gateway.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "asploop/grounder.hpp"
#include "asploop/parser.hpp"

extern char** environ;

namespace asploop {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string to_string(Backend b) {
    switch (b) {
    case Backend::in_process:
        return "internal";
    case Backend::external:
        return "external";
    case Backend::automatic:
        return "auto";
    }
    return "?";
}

Backend backend_from_string(const std::string& s) {
    if (s == "internal" || s == "in-process") return Backend::in_process;
    if (s == "external") return Backend::external;
    if (s == "auto") return Backend::automatic;
    throw ConfigError("unknown solver backend '" + s + "' (expected internal, external or auto)");
}

std::vector<std::string> split_command(const std::string& cmd) {
    std::istringstream in(cmd);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) {
    ProcessResult r;
    if (argv.empty()) {
        r.spawn_error = "empty command";
        return r;
    }
    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0) {
        r.spawn_error = "pipe failed";
        return r;
    }
    if (pipe(err_pipe) != 0) {
        close(out_pipe[0]);
        close(out_pipe[1]);
        r.spawn_error = "pipe failed";
        return r;
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
    posix_spawn_file_actions_addclose(&actions, err_pipe[0]);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(out_pipe[1]);
    close(err_pipe[1]);
    if (rc != 0) {
        close(out_pipe[0]);
        close(err_pipe[0]);
        r.spawn_error = "cannot start '" + argv[0] + "': " + std::strerror(rc);
        return r;
    }

    auto deadline = Clock::now() + timeout;
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    std::string* sinks[2] = {&r.out, &r.err};
    int open_fds = 2;
    char buf[65536];
    while (open_fds > 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0) {
            r.timed_out = true;
            break;
        }
        int n = poll(fds, 2, static_cast<int>(std::min<long long>(left, 1000)));
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t got = read(fds[i].fd, buf, sizeof buf);
            if (got > 0) {
                sinks[i]->append(buf, static_cast<std::size_t>(got));
            } else if (got == 0 || errno != EINTR) {
                close(fds[i].fd);
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }
    if (r.timed_out) kill(pid, SIGKILL);
    for (auto& f : fds) {
        if (f.fd >= 0) close(f.fd);
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) r.status = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) r.status = 128 + WTERMSIG(status);
    return r;
}

namespace {

bool on_path(const std::string& exe) {
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::istringstream in(path);
    for (std::string dir; std::getline(in, dir, ':');) {
        if (dir.empty()) continue;
        fs::path p = fs::path(dir) / exe;
        if (access(p.c_str(), X_OK) == 0) return true;
    }
    return false;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Whitespace split that respects quotes and parentheses.
std::vector<std::string> split_atoms(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            cur += c;
            if (c == '\\' && i + 1 < line.size()) cur += line[++i];
            else if (c == '"') quoted = false;
            continue;
        }
        if (c == '"') quoted = true;
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (std::isspace(static_cast<unsigned char>(c)) && depth == 0) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

std::string detect_solver_cmd() {
    static std::once_flag once;
    static std::string found;
    std::call_once(once, [] {
        if (on_path("clingo")) {
            found = "clingo";
            return;
        }
        if (on_path("python3")) {
            auto r = run_process({"python3", "-c", "import clingo"}, std::chrono::milliseconds(20'000));
            if (r.spawn_error.empty() && !r.timed_out && r.status == 0) found = "python3 -m clingo";
        }
    });
    return found;
}

SolverVerdict parse_external_output(std::string_view out, std::string_view err, int exit_status, std::size_t cap,
                                    std::size_t keep) {
    std::vector<std::string> diags;
    bool flagged = false;
    {
        std::istringstream in{std::string(err)};
        for (std::string line; std::getline(in, line);) {
            if (trim(line).empty()) continue;
            diags.push_back(line);
            std::string l = lower(line);
            if (l.find("error") != std::string::npos || l.find("warning") != std::string::npos ||
                l.find("info:") != std::string::npos)
                flagged = true;
        }
    }
    if (exit_status != 0 && exit_status != 10 && exit_status != 20 && exit_status != 30) {
        diags.push_back("solver exit status " + std::to_string(exit_status));
        flagged = true;
    }

    std::vector<asp::AnswerSet> models;
    std::size_t answers = 0;
    bool expecting = false, sat = false, unsat = false, unknown = false;
    std::string bad;
    std::istringstream in{std::string(out)};
    for (std::string raw; std::getline(in, raw);) {
        std::string line = trim(raw);
        if (expecting) {
            expecting = false;
            ++answers;
            if (models.size() >= keep) continue;
            std::vector<asp::GroundAtom> atoms;
            try {
                for (const auto& tok : split_atoms(line)) atoms.push_back(asp::parse_ground_atom(tok));
            } catch (const std::exception& e) {
                bad = "unreadable answer line '" + line + "': " + e.what();
                break;
            }
            models.emplace_back(std::move(atoms));
            continue;
        }
        if (line.rfind("Answer:", 0) == 0) expecting = true;
        else if (line == "SATISFIABLE" || line == "OPTIMUM FOUND") sat = true;
        else if (line == "UNSATISFIABLE") unsat = true;
        else if (line == "UNKNOWN") unknown = true;
    }
    if (expecting) bad = "answer marker without atom line";
    if (bad.empty() && !sat && !unsat && !unknown) bad = "no result marker in solver output";
    if (bad.empty() && unsat && answers > 0) bad = "UNSATISFIABLE after answers";
    if (!bad.empty()) {
        diags.push_back(bad);
        diags.push_back("raw output:\n" + std::string(out));
        return SolverVerdict::error(std::move(diags), "external");
    }
    if (unknown) {
        diags.push_back("solver returned UNKNOWN");
        flagged = true;
    }
    if (flagged) return SolverVerdict::error(std::move(diags), "external");
    std::sort(models.begin(), models.end());
    answers = std::min(answers, cap + 1);
    return SolverVerdict::enumerated(std::move(models), answers, cap, std::move(diags), "external");
}

SolverVerdict solve_in_process(std::string_view program, std::size_t cap, std::size_t keep) {
    auto start = Clock::now();
    auto elapsed = [&] { return SolverVerdict::Duration(Clock::now() - start); };
    try {
        auto statements = asp::parse_program(program);
        auto grounded = asp::ground(statements);
        if (!grounded.warnings().empty()) return SolverVerdict::error(grounded.warnings(), "internal", elapsed());
        auto e = asp::enumerate_models(grounded, cap, keep);
        return SolverVerdict::enumerated(std::move(e.models), e.found, cap, {}, "internal", elapsed());
    } catch (const asp::UnsupportedConstruct&) {
        throw;
    } catch (const asp::AspError& e) {
        return SolverVerdict::error({e.what()}, "internal", elapsed());
    }
}

SolverGateway::SolverGateway(GatewayOptions options) : options_(std::move(options)) {
    solver_cmd_ = options_.solver_cmd;
    if (solver_cmd_.empty()) {
        if (const char* env = std::getenv("ASPLOOP_SOLVER_CMD"); env && *env) solver_cmd_ = env;
    }
    if (solver_cmd_.empty() && options_.detect_solver) solver_cmd_ = detect_solver_cmd();
    std::size_t slots = options_.max_processes ? options_.max_processes : std::thread::hardware_concurrency();
    slots_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(std::max<std::size_t>(slots, 1)));
}

SolverGateway::~SolverGateway() = default;

SolverVerdict SolverGateway::solve(std::string_view program, std::size_t cap, Backend backend,
                                   std::optional<std::size_t> keep) const {
    if (cap < 1) throw std::invalid_argument("solve: cap must be at least 1");
    std::size_t k = keep.value_or(options_.keep_models);
    if (backend == Backend::external) {
        if (!has_external()) throw ConfigError("external solver requested but none configured (set --solver-cmd or ASPLOOP_SOLVER_CMD)");
        return solve_external(program, cap, k);
    }
    try {
        return solve_in_process(program, cap, k);
    } catch (const asp::UnsupportedConstruct& e) {
        if (backend == Backend::automatic && has_external()) return solve_external(program, cap, k);
        std::string why = e.what();
        if (backend == Backend::automatic) why += " (no external solver configured)";
        return SolverVerdict::error({why}, "internal");
    }
}

SolverVerdict SolverGateway::solve_external(std::string_view program, std::size_t cap, std::size_t keep) const {
    auto start = Clock::now();
    auto elapsed = [&] { return SolverVerdict::Duration(Clock::now() - start); };

    std::string tmpl = (fs::temp_directory_path() / "asploop-XXXXXX.lp").string();
    int fd = mkstemps(tmpl.data(), 3);
    if (fd < 0) return SolverVerdict::error({"cannot create temporary program file"}, "external", elapsed());
    std::size_t off = 0;
    while (off < program.size()) {
        ssize_t w = write(fd, program.data() + off, program.size() - off);
        if (w <= 0) break;
        off += static_cast<std::size_t>(w);
    }
    close(fd);
    if (off != program.size()) {
        fs::remove(tmpl);
        return SolverVerdict::error({"cannot write temporary program file"}, "external", elapsed());
    }

    auto argv = split_command(solver_cmd_);
    argv.push_back(tmpl);
    argv.push_back(std::to_string(cap + 1));

    ProcessResult r;
    {
        slots_->acquire();
        r = run_process(argv, options_.timeout);
        slots_->release();
    }
    std::error_code ec;
    fs::remove(tmpl, ec);

    if (!r.spawn_error.empty()) return SolverVerdict::error({r.spawn_error}, "external", elapsed());
    if (r.timed_out)
        return SolverVerdict::error({"solver timed out after " + std::to_string(options_.timeout.count()) + " ms"},
                                    "external", elapsed());
    auto v = parse_external_output(r.out, r.err, r.status, cap, keep);
    v.set_wall_time(elapsed());
    return v;
}

}  // namespace asploop
