#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sqlink/pipeline.hpp"

namespace sqlink {

enum class DatasetKind { Bird, Spider, Custom };

const char* dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);  // Error{BadConfig}

struct Dataset {
    DatasetKind kind = DatasetKind::Custom;
    std::vector<QuestionTask> tasks;
    std::filesystem::path db_root;

    std::filesystem::path database_path(const std::string& db_id) const;
    std::filesystem::path description_dir(const std::string& db_id) const;
};

/// Reads a BIRD/Spider/custom JSON file. BIRD records carry question_id,
/// db_id, question, evidence, SQL, difficulty; Spider records carry question,
/// db_id, query. Validation problems are collected per record and thrown as
/// one Error{MalformedDataset}.
Dataset load_dataset(const std::filesystem::path& json_path, DatasetKind kind,
                     const std::filesystem::path& db_root);

/// Seeded stratified subsample: about `fraction` of each database's questions,
/// at least one per database.
Dataset stratified_subsample(const Dataset& dataset, double fraction, unsigned seed);

}  // namespace sqlink
