#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace asploop {

struct EntityCategory {
    std::string name;
    std::vector<std::string> members;  // raw surface forms

    friend bool operator==(const EntityCategory&, const EntityCategory&) = default;
};

struct PuzzleInstance {
    std::string id;
    std::string description;
    std::vector<EntityCategory> categories;
    std::vector<std::string> hints;
    std::vector<std::vector<std::string>> solution;  // one member per category, category order
    std::map<std::string, std::string> meta;         // e.g. size, difficulty

    std::size_t m() const { return categories.size(); }
    std::size_t n() const { return categories.empty() ? 0 : categories.front().members.size(); }

    friend bool operator==(const PuzzleInstance&, const PuzzleInstance&) = default;
};

enum class DatasetFormat { json, jsonl, detect };

/// Whole-file rejection (unreadable, bad JSON, wrong shape).
class DatasetError : public std::runtime_error {
public:
    DatasetError(const std::filesystem::path& path, std::optional<std::size_t> record, const std::string& why);
    std::optional<std::size_t> record() const { return record_; }

private:
    std::optional<std::size_t> record_;
};

struct Rejection {
    std::size_t record = 0;
    std::string id;
    std::string reason;
};

struct Dataset {
    std::vector<PuzzleInstance> instances;
    std::vector<Rejection> rejected;
};

/// Reason the instance breaks a structural invariant, or nullopt.
std::optional<std::string> validate(const PuzzleInstance& p);

PuzzleInstance instance_from_json(const nlohmann::json& j);  // throws std::invalid_argument on shape errors
nlohmann::json to_json(const PuzzleInstance& p);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format = DatasetFormat::detect);
Dataset parse_dataset(const std::string& text, DatasetFormat format, const std::filesystem::path& origin = {});
void save_dataset(const std::filesystem::path& path, const std::vector<PuzzleInstance>& items,
                  DatasetFormat format = DatasetFormat::json);

/// (n!)^(m-1); throws std::overflow_error instead of wrapping.
std::uint64_t expected_model_count(std::size_t m, std::size_t n);
std::uint64_t expected_model_count(const PuzzleInstance& p);

}  // namespace asploop
