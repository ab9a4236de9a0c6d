#pragma once

// Dataset loading, benchmark runs and report emission.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgprover/pipeline.hpp"
#include "kgprover/problem.hpp"

namespace kgp {

/// JSONL, one problem per line. Field aliases: "id"/"problem_name" for name,
/// "informal_stmt"/"nl_statement" for informal_statement. A missing statement
/// falls back to the doc comment inside informal_prefix. Any bad line fails
/// the whole load with a DatasetError listing every problem found.
std::vector<Problem> parse_dataset(std::istream& in, const std::string& source_name = "dataset");

/// `format_hint`: empty, "jsonl", "minif2f", "proofnet" or "mustard"; all are JSONL.
std::vector<Problem> load_dataset(const std::filesystem::path& path,
                                  const std::optional<std::string>& format_hint = std::nullopt);

inline constexpr std::uint64_t kMustardSubsetSeed = 20250101;

/// Theorem-proving items sorted by name, then a seeded sample of `n`,
/// returned in name order.
std::vector<Problem> select_mustard_subset(std::vector<Problem> problems, std::size_t n = 250,
                                           std::uint64_t seed = kMustardSubsetSeed);

struct Report {
    std::string run_id;
    RunConfig config;
    std::vector<ProofOutcome> per_problem;
    double accuracy = 0.0;
    std::vector<double> accuracy_by_attempt;  // length r
    std::map<FailureClass, std::size_t> failure_histogram;  // every class present
    std::size_t error_count = 0;
    std::chrono::milliseconds wall_clock{0};  // not part of report.json
};

/// Aggregates outcomes (in dataset order) into a report.
Report aggregate(const RunConfig& config, std::vector<ProofOutcome> outcomes);

struct BenchOptions {
    std::size_t workers = 1;
    std::function<void(std::size_t index, const ProofOutcome&)> on_outcome;
};

/// Runs prove on every problem. Problem-level failures are recorded, never thrown.
Report run_bench(const std::vector<Problem>& problems, const RunConfig& config, const Services& services,
                 const BenchOptions& options = {});

ojson to_json(const Report& report);
Report report_from_json(const ojson& j);

std::string render_summary_md(const Report& report);
std::string render_failures_md(const Report& report);

/// Writes report.json, summary.md, failures.md, traces.jsonl and timing.json into `out_dir`.
void emit_report(const Report& report, const std::filesystem::path& out_dir);

/// Display label used in tables: Base, RAG, Graphs.
std::string_view method_label(Method m);

}  // namespace kgp
