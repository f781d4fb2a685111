#pragma once

#include <filesystem>

#include "json.hpp"
#include "mvembed/mrpe.hpp"

namespace mvembed {

/// Writes `<dir>/embedding.csv` (one sample per row, d columns) and
/// `<dir>/meta.json` (alpha, traces, timing, config). `run` is echoed into
/// meta.json under "run" when non-null. Creates `dir` if needed.
void save_embedding(const EmbeddingResult& result, const std::filesystem::path& dir,
                    const nlohmann::json& run = nullptr);

/// Inverse of save_embedding; numeric fields round-trip exactly.
EmbeddingResult load_embedding(const std::filesystem::path& dir);

nlohmann::json config_to_json(const MrpeConfig& config);
MrpeConfig config_from_json(const nlohmann::json& j);

/// Per-iteration table: iteration, objective, alpha_1..alpha_m, seconds.
/// One header line followed by exactly iters_run rows.
void write_trace_csv(const EmbeddingResult& result, const std::filesystem::path& path);

}  // namespace mvembed
