#include "sqlink/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>

#include "json.hpp"
#include "sqlink/errors.hpp"

namespace sqlink {

using nlohmann::json;

const char* dataset_kind_name(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::Bird: return "bird";
        case DatasetKind::Spider: return "spider";
        case DatasetKind::Custom: return "custom";
    }
    return "custom";
}

DatasetKind parse_dataset_kind(std::string_view text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "bird") return DatasetKind::Bird;
    if (lower == "spider") return DatasetKind::Spider;
    if (lower == "custom") return DatasetKind::Custom;
    throw Error(ErrorCode::BadConfig, "unknown dataset kind '" + std::string(text) + "'");
}

std::filesystem::path Dataset::database_path(const std::string& db_id) const {
    return db_root / db_id / (db_id + ".sqlite");
}

std::filesystem::path Dataset::description_dir(const std::string& db_id) const {
    return db_root / db_id / "database_description";
}

namespace {

std::string string_field(const json& record, const char* key) {
    auto it = record.find(key);
    if (it == record.end()) return "";
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    return "";
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& json_path, DatasetKind kind,
                     const std::filesystem::path& db_root) {
    if (!std::filesystem::exists(json_path)) {
        throw Error(ErrorCode::FileNotFound, json_path.string());
    }
    std::ifstream in(json_path);
    json records = json::parse(in, nullptr, false);
    if (records.is_discarded() || !records.is_array()) {
        throw Error(ErrorCode::MalformedDataset, json_path.string() + " is not a JSON array");
    }

    Dataset dataset;
    dataset.kind = kind;
    dataset.db_root = db_root;

    std::vector<std::string> diagnostics;
    std::size_t index = 0;
    for (const json& record : records) {
        std::string where = "record " + std::to_string(index);
        if (!record.is_object()) {
            diagnostics.push_back(where + ": not an object");
            ++index;
            continue;
        }
        QuestionTask task;
        task.db_id = string_field(record, "db_id");
        task.question = string_field(record, "question");
        task.evidence = string_field(record, "evidence");
        task.question_id = string_field(record, "question_id");
        if (task.question_id.empty()) task.question_id = std::to_string(index);

        switch (kind) {
            case DatasetKind::Bird:
            case DatasetKind::Custom:
                task.gold_sql = string_field(record, "SQL");
                if (task.gold_sql.empty()) task.gold_sql = string_field(record, "query");
                break;
            case DatasetKind::Spider:
                task.gold_sql = string_field(record, "query");
                break;
        }
        std::string difficulty = string_field(record, "difficulty");
        if (!difficulty.empty()) {
            task.difficulty = parse_difficulty(difficulty);
            if (!task.difficulty.has_value()) {
                diagnostics.push_back(where + ": unknown difficulty '" + difficulty + "'");
            }
        }

        if (task.db_id.empty()) {
            diagnostics.push_back(where + ": missing db_id");
        } else if (!std::filesystem::exists(dataset.database_path(task.db_id))) {
            diagnostics.push_back(where + ": database file not found: " +
                                  dataset.database_path(task.db_id).string());
        }
        if (task.question.empty()) {
            diagnostics.push_back(where + ": missing question");
        }
        dataset.tasks.push_back(std::move(task));
        ++index;
    }

    if (!diagnostics.empty()) {
        std::string all;
        for (const std::string& d : diagnostics) all += "\n  " + d;
        throw Error(ErrorCode::MalformedDataset, json_path.string() + all);
    }
    return dataset;
}

Dataset stratified_subsample(const Dataset& dataset, double fraction, unsigned seed) {
    if (fraction <= 0.0 || fraction > 1.0) {
        throw Error(ErrorCode::BadConfig, "subsample fraction must be in (0, 1]");
    }
    std::map<std::string, std::vector<std::size_t>> by_db;
    for (std::size_t i = 0; i < dataset.tasks.size(); ++i) {
        by_db[canonical_identifier(dataset.tasks[i].db_id)].push_back(i);
    }

    std::vector<std::size_t> chosen;
    for (auto& [db_id, indexes] : by_db) {
        std::size_t want = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(indexes.size()))));
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 0x9E3779B97F4A7C15ull ^
                            std::hash<std::string>{}(db_id));
        std::shuffle(indexes.begin(), indexes.end(), rng);
        indexes.resize(std::min(want, indexes.size()));
        chosen.insert(chosen.end(), indexes.begin(), indexes.end());
    }
    std::sort(chosen.begin(), chosen.end());

    Dataset out;
    out.kind = dataset.kind;
    out.db_root = dataset.db_root;
    for (std::size_t i : chosen) out.tasks.push_back(dataset.tasks[i]);
    return out;
}

}  // namespace sqlink
