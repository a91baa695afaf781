#include "asploop/puzzle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "asploop/match.hpp"

namespace asploop {

using nlohmann::json;

DatasetError::DatasetError(const std::filesystem::path& path, std::optional<std::size_t> record,
                           const std::string& why)
    : std::runtime_error(path.string() + (record ? " record " + std::to_string(*record) : std::string()) + ": " + why),
      record_(record) {}

namespace {

std::string member_string(const json& v, const char* what) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw std::invalid_argument(std::string(what) + " must be a string");
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw std::invalid_argument(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

const json& required_array(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) throw std::invalid_argument(std::string("missing array field '") + key + "'");
    return j[key];
}

}  // namespace

PuzzleInstance instance_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("instance must be a JSON object");
    PuzzleInstance p;
    p.id = required_string(j, "id");
    p.description = required_string(j, "description");
    for (const auto& c : required_array(j, "categories")) {
        if (!c.is_object()) throw std::invalid_argument("category must be an object");
        EntityCategory cat;
        cat.name = required_string(c, "name");
        for (const auto& m : required_array(c, "members")) cat.members.push_back(member_string(m, "member"));
        p.categories.push_back(std::move(cat));
    }
    for (const auto& h : required_array(j, "hints")) {
        if (!h.is_string()) throw std::invalid_argument("hint must be a string");
        p.hints.push_back(h.get<std::string>());
    }
    for (const auto& row : required_array(j, "solution")) {
        if (!row.is_array()) throw std::invalid_argument("solution row must be an array");
        std::vector<std::string> r;
        for (const auto& v : row) r.push_back(member_string(v, "solution item"));
        p.solution.push_back(std::move(r));
    }
    if (j.contains("meta")) {
        if (!j["meta"].is_object()) throw std::invalid_argument("meta must be an object");
        for (const auto& [k, v] : j["meta"].items()) p.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return p;
}

json to_json(const PuzzleInstance& p) {
    json j = json::object();
    j["id"] = p.id;
    j["description"] = p.description;
    j["categories"] = json::array();
    for (const auto& c : p.categories) j["categories"].push_back({{"name", c.name}, {"members", c.members}});
    j["hints"] = p.hints;
    j["solution"] = p.solution;
    if (!p.meta.empty()) j["meta"] = p.meta;
    return j;
}

std::optional<std::string> validate(const PuzzleInstance& p) {
    if (p.categories.size() < 2) return "need at least 2 categories";
    std::size_t n = p.n();
    if (n < 2) return "need at least 2 members per category";
    for (const auto& c : p.categories) {
        if (c.members.size() != n) return "category '" + c.name + "' has " + std::to_string(c.members.size()) +
                                          " members, expected " + std::to_string(n);
        std::set<std::string> seen;
        for (const auto& m : c.members) {
            if (!seen.insert(normalize_surface(m)).second)
                return "category '" + c.name + "' repeats member '" + m + "' after normalization";
        }
    }
    if (p.hints.empty()) return "no hints";
    if (p.solution.size() != n) return "solution has " + std::to_string(p.solution.size()) + " rows, expected " + std::to_string(n);
    for (std::size_t k = 0; k < p.m(); ++k) {
        const auto& members = p.categories[k].members;
        std::set<std::string> used;
        for (const auto& row : p.solution) {
            if (row.size() != p.m()) return "solution row has " + std::to_string(row.size()) + " items, expected " + std::to_string(p.m());
            if (std::find(members.begin(), members.end(), row[k]) == members.end())
                return "solution item '" + row[k] + "' is not a member of '" + p.categories[k].name + "'";
            if (!used.insert(row[k]).second)
                return "solution repeats '" + row[k] + "' in category '" + p.categories[k].name + "'";
        }
    }
    return std::nullopt;
}

namespace {

void attach_size(PuzzleInstance& p) {
    if (!p.meta.count("size")) p.meta["size"] = std::to_string(p.m()) + "x" + std::to_string(p.n());
}

void accept(Dataset& d, const json& j, std::size_t record, const std::filesystem::path& origin) {
    PuzzleInstance p;
    try {
        p = instance_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw DatasetError(origin, record, std::string("schema violation: ") + e.what());
    }
    if (auto why = validate(p)) {
        d.rejected.push_back({record, p.id, *why});
        return;
    }
    attach_size(p);
    d.instances.push_back(std::move(p));
}

}  // namespace

Dataset parse_dataset(const std::string& text, DatasetFormat format, const std::filesystem::path& origin) {
    if (format == DatasetFormat::detect) {
        auto first = text.find_first_not_of(" \t\r\n");
        format = first != std::string::npos && text[first] == '[' ? DatasetFormat::json : DatasetFormat::jsonl;
    }
    Dataset d;
    if (format == DatasetFormat::json) {
        json all;
        try {
            all = json::parse(text);
        } catch (const json::parse_error& e) {
            throw DatasetError(origin, std::nullopt, e.what());
        }
        if (!all.is_array()) throw DatasetError(origin, std::nullopt, "top level must be an array of instances");
        for (std::size_t i = 0; i < all.size(); ++i) accept(d, all[i], i, origin);
        return d;
    }
    std::istringstream in(text);
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DatasetError(origin, record, e.what());
        }
        accept(d, j, record++, origin);
    }
    return d;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError(path, std::nullopt, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    if (format == DatasetFormat::detect && path.extension() == ".jsonl") format = DatasetFormat::jsonl;
    return parse_dataset(ss.str(), format, path);
}

void save_dataset(const std::filesystem::path& path, const std::vector<PuzzleInstance>& items, DatasetFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (format == DatasetFormat::jsonl) {
        for (const auto& p : items) out << to_json(p).dump() << '\n';
    } else {
        json all = json::array();
        for (const auto& p : items) all.push_back(to_json(p));
        out << all.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::uint64_t expected_model_count(std::size_t m, std::size_t n) {
    if (m < 1) throw std::invalid_argument("expected_model_count: m must be positive");
    std::uint64_t fact = 1;
    for (std::uint64_t i = 2; i <= n; ++i) {
        if (__builtin_mul_overflow(fact, i, &fact)) throw std::overflow_error("n! overflows 64 bits");
    }
    std::uint64_t total = 1;
    for (std::size_t i = 1; i < m; ++i) {
        if (__builtin_mul_overflow(total, fact, &total)) throw std::overflow_error("(n!)^(m-1) overflows 64 bits");
    }
    return total;
}

std::uint64_t expected_model_count(const PuzzleInstance& p) { return expected_model_count(p.m(), p.n()); }

}  // namespace asploop
