#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asploop/trajectory.hpp"

namespace asploop {

std::string sha256_hex(std::string_view data);

struct Completion {
    std::string text;
    std::size_t tokens = 0;
};

/// Transport trouble; generate() retries these a bounded number of times.
class TransientGeneratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeneratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Generator {
public:
    virtual ~Generator() = default;
    virtual std::vector<Completion> complete(const std::string& prompt, std::size_t n, double temperature) = 0;
    virtual std::string id() const = 0;
    /// Whether identical inputs replay identically.
    virtual bool reproducible() const { return false; }
};

/// Exactly n candidates, code extracted, token counts filled.
std::vector<CandidateEncoding> generate(Generator& generator, const std::string& prompt, std::size_t n,
                                        double temperature, std::size_t max_attempts = 3);

/// Replays a JSONL fixture {prompt_sha256, completions[], token_counts[]}. Each
/// prompt hash has a cursor; repeated requests continue where the last stopped.
class ScriptedGenerator : public Generator {
public:
    explicit ScriptedGenerator(const std::filesystem::path& fixture);
    explicit ScriptedGenerator(std::map<std::string, std::vector<Completion>> script);

    std::vector<Completion> complete(const std::string& prompt, std::size_t n, double temperature) override;
    std::string id() const override { return "scripted"; }
    bool reproducible() const override { return true; }

    std::size_t size() const { return script_.size(); }

private:
    std::map<std::string, std::vector<Completion>> script_;
    std::map<std::string, std::size_t> cursor_;
    std::mutex mutex_;
};

struct HttpGeneratorOptions {
    std::string url;  // e.g. http://localhost:8000/v1/chat/completions
    std::string model = "default";
    std::string token;  // bearer token; empty: ASPLOOP_GEN_TOKEN
    std::chrono::seconds timeout{120};
    std::optional<long long> seed;
};

/// Chat-completions style endpoint.
class HttpGenerator : public Generator {
public:
    explicit HttpGenerator(HttpGeneratorOptions options);
    std::vector<Completion> complete(const std::string& prompt, std::size_t n, double temperature) override;
    std::string id() const override { return "http"; }

private:
    HttpGeneratorOptions options_;
};

/// Reads choices[i].message.content; usage.completion_tokens is split evenly
/// across the choices (remainder to the first).
std::vector<Completion> parse_chat_response(const std::string& body);

/// Serves each prompt from a pool chosen by `route`; a fresh prompt starts at the
/// pool's beginning, repeated requests continue (wrapping around). Every served
/// completion is recorded so the run can be replayed by ScriptedGenerator.
class PoolGenerator : public Generator {
public:
    using Route = std::function<const std::vector<Completion>*(const std::string& prompt)>;

    explicit PoolGenerator(Route route);
    std::vector<Completion> complete(const std::string& prompt, std::size_t n, double temperature) override;
    std::string id() const override { return "pool"; }
    bool reproducible() const override { return true; }

    /// hash -> completions served, in order.
    const std::map<std::string, std::vector<Completion>>& served() const { return served_; }

private:
    Route route_;
    std::map<std::string, std::vector<Completion>> served_;
    std::mutex mutex_;
};

/// One JSONL line per hash, sorted by hash.
void write_script(const std::filesystem::path& path, const std::map<std::string, std::vector<Completion>>& script);
std::map<std::string, std::vector<Completion>> read_script(const std::filesystem::path& path);

}  // namespace asploop
