#pragma once

#include <filesystem>
#include <string>

#include "flasheval/types.hpp"

namespace flasheval {

enum class FileFormat { csv, json };

FileFormat parse_file_format(const std::string& name);

// Score CSV layout: header `prompt_id,<model_id_1>,...,<model_id_M>` with
// model ids encoded as `variant|solver|steps`; one row per prompt. The JSON
// layout mirrors it: {"prompt_ids": [...], "model_ids": [...],
// "scores": [[row], ...]}.
ScoreMatrix load_score_matrix(const std::filesystem::path& path,
                              FileFormat format);

// Doubles are written in shortest round-trip form, so save followed by load
// reproduces values bit-exactly.
void save_score_matrix(const ScoreMatrix& matrix,
                       const std::filesystem::path& path, FileFormat format);

// Threshold CSV layout: header `model_id,threshold`, one row per model.
// Entries are aligned to the matrix's column order; every matrix model must
// be present exactly once and unknown ids are rejected.
TieThresholds load_tie_thresholds(const std::filesystem::path& path,
                                  const ScoreMatrix& matrix);

// Feature CSV layout: header `prompt_id,f0,f1,...`.
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

void save_feature_matrix(const FeatureMatrix& features,
                         const std::filesystem::path& path);

}  // namespace flasheval
