#pragma once

#include <filesystem>
#include <vector>

#include "fairmit/core.hpp"
#include "fairmit/trainer.hpp"

namespace fairmit {

/// Reads a score file. CSV files need a `id,label,score` header; .jsonl
/// files hold one {"id","label","score"} object per line. Labels may be
/// 0/1 or female/male (case-insensitive); scores must lie in [0,1].
/// Malformed rows raise input_error naming the line and field.
std::vector<ScoreRecord> load_scores(const std::filesystem::path& path);

void save_scores_csv(const std::filesystem::path& path,
                     std::span<const ScoreRecord> records);

/// Dataset directory: meta.json (height/width/channels/count) plus
/// index.csv with rows `id,label,pixels`. The third field is either
/// space-separated pixel values or a path (relative to the directory) to a
/// whitespace-separated pixel file.
Dataset load_dataset_dir(const std::filesystem::path& dir);
void save_dataset_dir(const std::filesystem::path& dir, const Dataset& data);

}  // namespace fairmit
