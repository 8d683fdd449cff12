// JSON/JSONL schemas, dataset ingestion, corpus emission and the batch
// evaluation driver.

#ifndef MOFASM_IO_HPP_
#define MOFASM_IO_HPP_

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mofasm/assembler.hpp"
#include "mofasm/descriptors.hpp"
#include "mofasm/matcher.hpp"
#include "mofasm/policy_sim.hpp"
#include "mofasm/reward.hpp"
#include "mofasm/text_codec.hpp"

namespace mofasm {

using json = nlohmann::json;

/// Records with more blocks are discarded on load.
inline constexpr std::size_t kMaxBlocks = 200;

struct StructureRecord {
  std::string id;
  AssemblySpec spec;
  std::optional<std::string> topology_code;
  std::optional<std::string> topology_description;
};

// All *_from_json functions throw Error(Schema) on malformed input and
// Error(UnknownElement) for unknown species.
LatticeParams lattice_params_from_json(const json& j);
json lattice_params_to_json(const LatticeParams& p);
/// Accepts {"a",...,"gamma"} or a 3x3 array of rows.
LatticeMatrix lattice_from_json(const json& j);
int species_from_json(const json& j);
BuildingBlock block_from_json(const json& j);
json block_to_json(const BuildingBlock& b);
BlockPose pose_from_json(const json& j);
json pose_to_json(const BlockPose& p);
StructureRecord record_from_json(const json& j);
json record_to_json(const StructureRecord& r);

/// {"species", "frac_coords", "lattice" | "lattice_matrix"}.
AtomStructure atoms_from_json(const json& j);
json atoms_to_json(const AtomStructure& s);
/// A block-level record is assembled; an atom-level record is read as is.
AtomStructure structure_from_json(const json& j);

json match_report_to_json(const MatchReport& r);
json descriptors_to_json(const DescriptorReport& r);
json parse_result_to_json(const ParseResult& r);

Scenario scenario_from_json(const json& j);
json scenario_to_json(const Scenario& s);

json read_json_file(const std::filesystem::path& path);

struct RecordIssue {
  std::size_t line = 0;  // 1-based
  std::string id;        // empty when the line had no readable id
  std::string message;
  bool skipped = false;  // valid but filtered (e.g. too many blocks)
};

struct DatasetLoad {
  std::vector<StructureRecord> records;
  std::vector<RecordIssue> issues;
};

/// Per-record problems are collected, not fatal. Blank lines are ignored.
DatasetLoad parse_dataset(std::istream& in);
/// Throws Error(Io) when the file cannot be opened.
DatasetLoad load_dataset(const std::filesystem::path& path);

enum class CorpusMode { Cpt, Sft };

struct EmitCounts {
  std::size_t emitted = 0;
  std::size_t skipped = 0;
  std::vector<std::string> reasons;
};

/// CPT lines are {"id","text"}; SFT lines are {"id","prompt","response"}.
/// CPT skips records without topology fields.
EmitCounts emit_corpus(const std::vector<StructureRecord>& records, CorpusMode mode, std::ostream& out,
                       const TemplateSet& templates = TemplateSet::builtin());
/// Throws Error(Io).
EmitCounts emit_corpora(const std::vector<StructureRecord>& records, CorpusMode mode,
                        const std::filesystem::path& out_path,
                        const TemplateSet& templates = TemplateSet::builtin());

struct EvalCase {
  std::string id;
  StructureRecord gt;
  std::vector<std::string> candidates;
};

/// {"id", "gt": StructureRecord, "candidates": [text, ...]}.
EvalCase eval_case_from_json(const json& j);
std::vector<EvalCase> load_eval_cases(const std::filesystem::path& path);

struct EvalRow {
  MatchTolerances tol;
  double match_rate = 0;
  double mean_rmse = 0;  // NaN when nothing matched
  std::size_t matched = 0;
  double seconds_per_structure = 0;
};

struct EvalSummary {
  std::size_t cases = 0;
  std::size_t samples = 0;  // candidates used per case, 0 = all
  std::size_t parse_failures = 0;
  std::vector<EvalRow> rows;
};

/// Parses (expected block count from the ground truth), assembles with the
/// ground-truth blocks and matches. `samples` > 0 keeps only the first
/// `samples` candidates of each case.
EvalSummary evaluate(const std::vector<EvalCase>& cases, const std::vector<MatchTolerances>& tolerance_sets,
                     std::size_t samples = 0, const ParseOptions& parse = {}, Exec exec = Exec::Parallel);
json eval_summary_to_json(const EvalSummary& s);
std::string format_eval_table(const EvalSummary& s);

/// "stol,ltol,atol[;stol,ltol,atol...]". Throws std::invalid_argument.
std::vector<MatchTolerances> parse_tolerance_sets(const std::string& text);

} // namespace mofasm

#endif
