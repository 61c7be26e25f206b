#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treebound/embedding.hpp"
#include "treebound/fork.hpp"
#include "treebound/lower_bound.hpp"

namespace treebound {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Decimal rendering of a double with 17 significant digits (lossless
/// round-trip), locale-independent.
std::string format_double(double value);

/// Run provenance embedded in every output file: reruns with the same
/// subcommand and parameters produce identical numeric payloads.
struct Manifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::optional<std::uint64_t> seed;
  double wall_time_ms = 0.0;
};

std::string manifest_json(const Manifest& manifest);

/// `{"tree_depth": n, "space": {"p":..., "dim":...}, "points": [[...],...]}`
/// with points in heap order; a manifest is embedded when provided.
std::string embedding_json(const Embedding& e, const Manifest* manifest);

/// Parses the embedding format above; unknown keys are ignored. Errors
/// carry the byte offset of the problem.
Embedding parse_embedding_json(const std::string& text);

/// Extraction trace with per-level certificate arrays and the d_sequence.
std::string trace_json(const ExtractionTrace& trace, int tree_depth,
                       const ConvexityProfile& profile, double tau,
                       const Manifest* manifest);

/// `{"m":..., "method":..., "value":..., "p":..., "c":..., "tau":...}`.
std::string lower_bound_json(const LowerBoundResult& result);

/// CSV table with header `m,iterative,asymptotic,ratio`; LF line endings,
/// ratio = asymptotic / iterative.
struct ReportRow {
  std::int64_t m = 0;
  double iterative = 0.0;
  double asymptotic = 0.0;
  double ratio = 0.0;
};

std::string report_csv(const std::vector<ReportRow>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace treebound
