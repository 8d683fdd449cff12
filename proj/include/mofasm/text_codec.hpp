// Text encodings of block-level structures: the pre-training description
// (CPT), the instruction/response pair used for fine-tuning (SFT), and a
// tolerant parser for model responses.

#ifndef MOFASM_TEXT_CODEC_HPP_
#define MOFASM_TEXT_CODEC_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mofasm/assembler.hpp"
#include "mofasm/block_frames.hpp"
#include "mofasm/lattice.hpp"

namespace mofasm {

/// Template texts. Placeholders are "[Name]" where Name starts with a letter
/// and contains only letters and spaces; "[0]" or "[1,0,0]" are literal.
struct TemplateSet {
  std::string cpt_base;
  std::string cpt_block;
  std::string cpt_placement;
  std::string sft_instruction;
  std::string sft_task;
  std::string sft_output_format;

  static const TemplateSet& builtin();
  /// Reads <dir>/cpt_base.txt etc. Throws Io for missing files.
  static TemplateSet load_dir(const std::filesystem::path& dir);
  /// MOFASM_TEMPLATE_DIR when set, builtin() otherwise.
  static TemplateSet from_env();
};

/// Substitutes every placeholder; values are inserted verbatim and not
/// rescanned. Throws Template for placeholders missing from `values`.
std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values);

/// Fixed-point rendering with round-half-away-from-zero applied to the
/// shortest decimal representation of `v`. Never emits "-0.00".
std::string format_fixed(double v, int decimals);

/// "a b c alpha beta gamma", two decimals each.
std::string format_lattice(const LatticeParams& p);
/// "x y z", or "(x,y,z)" when `parenthesized`.
std::string format_triple(const Vec3& v, int decimals, bool parenthesized = true);
/// "[i] translation=(x,y,z) rotation=(roll,pitch,yaw)", three decimals.
std::string format_pose(std::size_t index, const BlockPose& pose);

struct CptBlock {
  std::string smiles;
  double molecular_weight = 0;
  Vec3 pca_span = Vec3::Zero();
};

struct CptPlacement {
  Vec3 translation = Vec3::Zero();
  EulerAngles euler;
  Vec3 rotated_principal_axis = Vec3::UnitX();
};

struct CptRecord {
  std::string topology_code;
  std::string topology_description;
  LatticeParams lattice;
  std::vector<CptBlock> blocks;
  std::vector<CptPlacement> placements;
};

CptRecord make_cpt_record(const AssemblySpec& spec, std::string topology_code,
                          std::string topology_description);

/// Throws EmptyBlockList, CountMismatch for misaligned lists.
std::string render_cpt(const CptRecord& record, const TemplateSet& t = TemplateSet::builtin());
std::string render_sft(const std::vector<BuildingBlock>& blocks,
                       const TemplateSet& t = TemplateSet::builtin());
/// Lattice line followed by one pose line per block, '\n'-separated.
std::string render_sft_response(const LatticeParams& lattice, const std::vector<BlockPose>& poses);

struct ParsedPrediction {
  LatticeParams lattice;
  std::vector<BlockPose> poses;
};

enum class ParseErrorKind { MalformedNumber, MissingField, IndexGap, CountMismatch, Empty, RangeError };

std::string_view to_string(ParseErrorKind kind);

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::Empty;
  std::size_t offset = 0;
  std::string message;
};

using ParseResult = std::variant<ParsedPrediction, ParseError>;

struct ParseOptions {
  /// Canonical layout only: no preamble, no extra lines, exact pose syntax.
  bool strict = false;
};

/// Total: returns a value for every input. `expected_blocks` unset accepts
/// any positive count.
ParseResult parse_response(std::string_view text, std::optional<std::size_t> expected_blocks,
                           const ParseOptions& opts = {});

inline bool parsed_ok(const ParseResult& r) { return std::holds_alternative<ParsedPrediction>(r); }

} // namespace mofasm

#endif
