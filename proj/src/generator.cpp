#include "asploop/generator.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace asploop {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::vector<CandidateEncoding> generate(Generator& generator, const std::string& prompt, std::size_t n,
                                        double temperature, std::size_t max_attempts) {
    if (n == 0) throw std::invalid_argument("generate: n must be positive");
    std::vector<Completion> got;
    for (std::size_t attempt = 1;; ++attempt) {
        try {
            got = generator.complete(prompt, n, temperature);
            break;
        } catch (const TransientGeneratorError& e) {
            if (attempt >= max_attempts)
                throw GeneratorError(generator.id() + " generator failed after " + std::to_string(attempt) +
                                     " attempts: " + e.what());
        }
    }
    if (got.size() < n)
        throw GeneratorError(generator.id() + " generator returned " + std::to_string(got.size()) +
                             " completions, expected " + std::to_string(n));
    std::vector<CandidateEncoding> out;
    for (std::size_t i = 0; i < n; ++i) {
        CandidateEncoding c;
        c.raw = got[i].text;
        c.text = extract_code(c.raw);
        c.token_count = got[i].tokens;
        out.push_back(std::move(c));
    }
    return out;
}

// ---- scripted ---------------------------------------------------------------

std::map<std::string, std::vector<Completion>> read_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GeneratorError("cannot open generator script " + path.string());
    std::map<std::string, std::vector<Completion>> script;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            std::string hash = j.at("prompt_sha256").get<std::string>();
            const auto& texts = j.at("completions");
            json counts = j.value("token_counts", json::array());
            auto& dst = script[hash];
            for (std::size_t i = 0; i < texts.size(); ++i) {
                Completion c;
                c.text = texts[i].get<std::string>();
                c.tokens = i < counts.size() ? counts[i].get<std::size_t>() : 0;
                dst.push_back(std::move(c));
            }
        } catch (const json::exception& e) {
            throw GeneratorError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return script;
}

void write_script(const std::filesystem::path& path, const std::map<std::string, std::vector<Completion>>& script) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& [hash, items] : script) {
        json j = json::object();
        j["prompt_sha256"] = hash;
        j["completions"] = json::array();
        j["token_counts"] = json::array();
        for (const auto& c : items) {
            j["completions"].push_back(c.text);
            j["token_counts"].push_back(c.tokens);
        }
        out << j.dump() << '\n';
    }
}

ScriptedGenerator::ScriptedGenerator(const std::filesystem::path& fixture) : script_(read_script(fixture)) {}

ScriptedGenerator::ScriptedGenerator(std::map<std::string, std::vector<Completion>> script)
    : script_(std::move(script)) {}

std::vector<Completion> ScriptedGenerator::complete(const std::string& prompt, std::size_t n, double) {
    std::string hash = sha256_hex(prompt);
    std::lock_guard lock(mutex_);
    auto it = script_.find(hash);
    if (it == script_.end()) throw GeneratorError("scripted generator has no entry for prompt " + hash);
    std::size_t& pos = cursor_[hash];
    if (pos + n > it->second.size())
        throw GeneratorError("scripted generator ran out of completions for prompt " + hash + " (" +
                             std::to_string(it->second.size() - pos) + " left, " + std::to_string(n) + " requested)");
    std::vector<Completion> out(it->second.begin() + static_cast<std::ptrdiff_t>(pos),
                                it->second.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return out;
}

// ---- http -------------------------------------------------------------------

std::vector<Completion> parse_chat_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw GeneratorError(std::string("http generator: response is not JSON: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array())
        throw GeneratorError("http generator: response has no choices array");
    std::vector<Completion> out;
    for (const auto& c : j["choices"]) {
        Completion x;
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
            x.text = c["message"]["content"].get<std::string>();
        else if (c.contains("text") && c["text"].is_string())
            x.text = c["text"].get<std::string>();
        out.push_back(std::move(x));
    }
    std::size_t total = 0;
    if (j.contains("usage") && j["usage"].contains("completion_tokens") && j["usage"]["completion_tokens"].is_number())
        total = j["usage"]["completion_tokens"].get<std::size_t>();
    if (!out.empty()) {
        std::size_t share = total / out.size();
        for (auto& x : out) x.tokens = share;
        out.front().tokens += total - share * out.size();
    }
    return out;
}

HttpGenerator::HttpGenerator(HttpGeneratorOptions options) : options_(std::move(options)) {
    if (options_.url.empty()) throw std::invalid_argument("http generator: no URL configured");
    if (options_.token.empty()) {
        if (const char* t = std::getenv("ASPLOOP_GEN_TOKEN")) options_.token = t;
    }
}

std::vector<Completion> HttpGenerator::complete(const std::string& prompt, std::size_t n, double temperature) {
    const std::string& url = options_.url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw GeneratorError("http generator: bad URL " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client cli(origin);
    cli.set_connection_timeout(options_.timeout);
    cli.set_read_timeout(options_.timeout);
    cli.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.token.empty()) headers.emplace("Authorization", "Bearer " + options_.token);

    json body = {{"model", options_.model},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                 {"n", n},
                 {"temperature", temperature}};
    if (options_.seed) body["seed"] = *options_.seed;

    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransientGeneratorError("http generator: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransientGeneratorError("http generator: status " + std::to_string(res->status));
    if (res->status != 200)
        throw GeneratorError("http generator: status " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    return parse_chat_response(res->body);
}

// ---- pool -------------------------------------------------------------------

PoolGenerator::PoolGenerator(Route route) : route_(std::move(route)) {}

std::vector<Completion> PoolGenerator::complete(const std::string& prompt, std::size_t n, double) {
    const std::vector<Completion>* pool = route_(prompt);
    if (!pool || pool->empty()) throw GeneratorError("pool generator: no pool for this prompt");
    std::string hash = sha256_hex(prompt);
    std::lock_guard lock(mutex_);
    auto& done = served_[hash];
    std::vector<Completion> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back((*pool)[(done.size() + i) % pool->size()]);
    done.insert(done.end(), out.begin(), out.end());
    return out;
}

}  // namespace asploop
