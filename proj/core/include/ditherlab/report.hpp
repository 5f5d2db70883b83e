#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ditherlab/experiment.hpp"

namespace ditherlab {

inline constexpr std::string_view kCsvHeader = "regulariser,batch_size,seed,epoch,test_error";

// One row per (curve, epoch), sorted by regulariser, batch size, epoch, then
// seed. Errors carry six decimals.
std::string format_csv(std::span<const LearningCurve> curves);
void write_csv(std::span<const LearningCurve> curves, const std::filesystem::path& path);

// Inverse of format_csv (init_hash is not stored and comes back as 0).
// Throws FormatError on a bad header, malformed rows or gaps in the epochs.
std::vector<LearningCurve> parse_csv(std::string_view text);
std::vector<LearningCurve> read_csv(const std::filesystem::path& path);

/// Learning-curve figure: one panel per batch size (two per row), one
/// polyline per curve coloured grey (none), green (dropout), red (dither).
std::string render_svg(std::span<const LearningCurve> curves);
void write_svg(std::span<const LearningCurve> curves, const std::filesystem::path& path);

std::string format_summary_csv(std::span<const AggregateRow> rows);

// Config echo plus FNV-1a 64 content hashes of the listed output files.
std::string format_journal(const ExperimentConfig& cfg, std::span<const std::uint64_t> seeds,
                           std::span<const std::filesystem::path> outputs);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ditherlab
