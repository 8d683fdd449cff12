#include "mofasm/text_codec.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mofasm/error.hpp"
#include "mofasm_templates_builtin.hpp"

namespace mofasm {

// ---------------------------------------------------------------- templates

namespace {

std::string strip_final_newline(std::string s) {
  if (!s.empty() && s.back() == '\n')
    s.pop_back();
  if (!s.empty() && s.back() == '\r')
    s.pop_back();
  return s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, "cannot read template " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_placeholder_char(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == ' '; }

} // namespace

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet t{
      strip_final_newline(builtin_templates::cpt_base),
      strip_final_newline(builtin_templates::cpt_block),
      strip_final_newline(builtin_templates::cpt_placement),
      strip_final_newline(builtin_templates::sft_instruction),
      strip_final_newline(builtin_templates::sft_task),
      strip_final_newline(builtin_templates::sft_output_format),
  };
  return t;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  return TemplateSet{
      strip_final_newline(read_file(dir / "cpt_base.txt")),
      strip_final_newline(read_file(dir / "cpt_block.txt")),
      strip_final_newline(read_file(dir / "cpt_placement.txt")),
      strip_final_newline(read_file(dir / "sft_instruction.txt")),
      strip_final_newline(read_file(dir / "sft_task.txt")),
      strip_final_newline(read_file(dir / "sft_output_format.txt")),
  };
}

TemplateSet TemplateSet::from_env() {
  const char* dir = std::getenv("MOFASM_TEMPLATE_DIR");
  if (dir && *dir)
    return load_dir(dir);
  return builtin();
}

std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size() * 2);
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '[' && i + 1 < tpl.size() && std::isalpha(static_cast<unsigned char>(tpl[i + 1]))) {
      std::size_t j = i + 1;
      while (j < tpl.size() && is_placeholder_char(tpl[j]))
        ++j;
      if (j < tpl.size() && tpl[j] == ']') {
        std::string name(tpl.substr(i + 1, j - i - 1));
        auto it = values.find(name);
        if (it == values.end())
          throw Error(ErrorKind::Template, "no value for placeholder [" + name + "]");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += tpl[i++];
  }
  return out;
}

// ---------------------------------------------------------------- rendering

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v))
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string s(buf, res.ptr);

  bool negative = !s.empty() && s[0] == '-';
  if (negative)
    s.erase(0, 1);
  std::size_t dot = s.find('.');
  std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac_part = dot == std::string::npos ? std::string() : s.substr(dot + 1);

  bool round_up = frac_part.size() > static_cast<std::size_t>(decimals) && frac_part[decimals] >= '5';
  frac_part.resize(decimals, '0');
  std::string digits = int_part + frac_part;
  if (round_up) {
    int k = static_cast<int>(digits.size()) - 1;
    while (k >= 0 && digits[k] == '9')
      digits[k--] = '0';
    if (k >= 0)
      ++digits[k];
    else
      digits.insert(digits.begin(), '1');
  }
  std::size_t int_len = digits.size() - decimals;
  std::string out = digits.substr(0, int_len);
  if (decimals > 0)
    out += "." + digits.substr(int_len);
  bool all_zero = digits.find_first_not_of('0') == std::string::npos;
  if (negative && !all_zero)
    out.insert(out.begin(), '-');
  return out;
}

std::string format_lattice(const LatticeParams& p) {
  std::string out;
  for (double v : {p.a, p.b, p.c, p.alpha, p.beta, p.gamma}) {
    if (!out.empty())
      out += ' ';
    out += format_fixed(v, 2);
  }
  return out;
}

std::string format_triple(const Vec3& v, int decimals, bool parenthesized) {
  std::string sep = parenthesized ? "," : " ";
  std::string body = format_fixed(v.x(), decimals) + sep + format_fixed(v.y(), decimals) + sep +
                     format_fixed(v.z(), decimals);
  return parenthesized ? "(" + body + ")" : body;
}

namespace {

Vec3 euler_vec(const EulerAngles& e) { return Vec3(e.roll, e.pitch, e.yaw); }

} // namespace

std::string format_pose(std::size_t index, const BlockPose& pose) {
  return "[" + std::to_string(index) + "] translation=" + format_triple(pose.translation, 3) +
         " rotation=" + format_triple(euler_vec(pose.euler), 3);
}

CptRecord make_cpt_record(const AssemblySpec& spec, std::string topology_code,
                          std::string topology_description) {
  if (spec.blocks.size() != spec.poses.size())
    throw Error(ErrorKind::CountMismatch, "blocks and poses differ in length");
  CptRecord r;
  r.topology_code = std::move(topology_code);
  r.topology_description = std::move(topology_description);
  r.lattice = spec.lattice;
  for (std::size_t m = 0; m < spec.blocks.size(); ++m) {
    const BuildingBlock& b = spec.blocks[m];
    r.blocks.push_back({b.smiles, b.molecular_weight, b.pca_span});
    const BlockPose& p = spec.poses[m];
    r.placements.push_back(
        {p.translation, p.euler, rotated_principal_axis(euler_to_matrix(p.euler))});
  }
  return r;
}

std::string render_cpt(const CptRecord& record, const TemplateSet& t) {
  if (record.blocks.empty())
    throw Error(ErrorKind::EmptyBlockList, "CPT record without blocks");
  if (record.blocks.size() != record.placements.size())
    throw Error(ErrorKind::CountMismatch, "block and placement lists differ in length");

  std::string props, places;
  for (std::size_t m = 0; m < record.blocks.size(); ++m) {
    const CptBlock& b = record.blocks[m];
    const CptPlacement& p = record.placements[m];
    std::string idx = "[" + std::to_string(m) + "]";
    if (m) {
      props += '\n';
      places += '\n';
    }
    props += fill_template(t.cpt_block, {{"Block Index", idx},
                                         {"SMILES", b.smiles},
                                         {"Molecular Weight", format_fixed(b.molecular_weight, 2)},
                                         {"PCA Span", format_triple(b.pca_span, 2)}});
    places += fill_template(t.cpt_placement,
                            {{"Block Index", idx},
                             {"Translation", format_triple(p.translation, 3)},
                             {"Rotation", format_triple(euler_vec(p.euler), 3)},
                             {"Rotated Principal Axis", format_triple(p.rotated_principal_axis, 3)}});
  }
  return fill_template(t.cpt_base, {{"Topo Code", record.topology_code},
                                    {"Topo Description", record.topology_description},
                                    {"Lattice Parameters", format_lattice(record.lattice)},
                                    {"Block Properties", props},
                                    {"Block Placements", places}});
}

std::string render_sft(const std::vector<BuildingBlock>& blocks, const TemplateSet& t) {
  if (blocks.empty())
    throw Error(ErrorKind::EmptyBlockList, "SFT instruction without blocks");
  std::string smiles;
  for (const BuildingBlock& b : blocks) {
    if (!smiles.empty())
      smiles += ' ';
    smiles += b.smiles;
  }
  return fill_template(t.sft_instruction, {{"Task Description", t.sft_task},
                                           {"Output Format", t.sft_output_format},
                                           {"SMILES List", smiles}});
}

std::string render_sft_response(const LatticeParams& lattice, const std::vector<BlockPose>& poses) {
  std::string out = format_lattice(lattice);
  for (std::size_t m = 0; m < poses.size(); ++m)
    out += "\n" + format_pose(m, poses[m]);
  return out;
}

// ---------------------------------------------------------------- parsing

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedNumber: return "malformed-number";
    case ParseErrorKind::MissingField: return "missing-field";
    case ParseErrorKind::IndexGap: return "index-gap";
    case ParseErrorKind::CountMismatch: return "count-mismatch";
    case ParseErrorKind::Empty: return "empty";
    case ParseErrorKind::RangeError: return "range-error";
  }
  return "unknown";
}

namespace {

constexpr double kPi = std::numbers::pi;
// a value rendered at three decimals may exceed its range by half an ulp of
// the rendering
constexpr double kAngleSlack = 5e-4;
constexpr std::size_t kMaxNumberLength = 40;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [+-]?\d+(\.\d+)?
std::optional<double> parse_number(std::string_view tok) {
  if (tok.empty() || tok.size() > kMaxNumberLength)
    return std::nullopt;
  std::size_t i = 0;
  if (tok[0] == '+' || tok[0] == '-')
    ++i;
  std::size_t int_start = i;
  while (i < tok.size() && is_digit(tok[i]))
    ++i;
  if (i == int_start)
    return std::nullopt;
  if (i < tok.size()) {
    if (tok[i] != '.')
      return std::nullopt;
    ++i;
    std::size_t frac_start = i;
    while (i < tok.size() && is_digit(tok[i]))
      ++i;
    if (i == frac_start || i != tok.size())
      return std::nullopt;
  }
  std::string_view body = tok[0] == '+' ? tok.substr(1) : tok;
  double v = 0;
  auto res = std::from_chars(body.data(), body.data() + body.size(), v);
  if (res.ec != std::errc() || res.ptr != body.data() + body.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

bool looks_numeric(std::string_view tok) {
  if (tok.empty())
    return false;
  char c = tok[0];
  if (!(is_digit(c) || c == '+' || c == '-' || c == '.'))
    return false;
  for (char ch : tok)
    if (is_digit(ch))
      return true;
  return false;
}

struct Line {
  std::string_view text;
  std::size_t offset;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r')
      l.remove_suffix(1);
    lines.push_back({l, start});
    if (end == text.size())
      break;
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)))
      return false;
  return true;
}

enum class TokKind { Number, BadNumber, Word };

struct Token {
  std::string_view text;
  std::size_t offset;  // within the line
  TokKind kind;
  double value = 0;
};

bool is_separator(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')' ||
         c == '=' || c == ':' || c == ';';
}

std::vector<Token> tokenize(std::string_view line, std::size_t from = 0) {
  std::vector<Token> toks;
  std::size_t i = from;
  while (i < line.size()) {
    while (i < line.size() && is_separator(line[i]))
      ++i;
    if (i >= line.size())
      break;
    std::size_t j = i;
    while (j < line.size() && !is_separator(line[j]))
      ++j;
    Token t{line.substr(i, j - i), i, TokKind::Word};
    if (auto v = parse_number(t.text)) {
      t.kind = TokKind::Number;
      t.value = *v;
    } else if (looks_numeric(t.text)) {
      t.kind = TokKind::BadNumber;
    }
    toks.push_back(t);
    i = j;
  }
  return toks;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// "[digits]" prefix after optional leading whitespace. Returns the position
// after ']' or npos.
struct IndexPrefix {
  bool present = false;
  bool valid = false;
  std::size_t index = 0;
  std::size_t end = 0;     // position after ']'
  std::size_t start = 0;   // position of '['
};

IndexPrefix index_prefix(std::string_view line) {
  IndexPrefix ip;
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
    ++i;
  if (i >= line.size() || line[i] != '[')
    return ip;
  std::size_t j = i + 1;
  while (j < line.size() && is_digit(line[j]))
    ++j;
  if (j == i + 1 || j >= line.size() || line[j] != ']')
    return ip;
  ip.present = true;
  ip.start = i;
  ip.end = j + 1;
  if (j - (i + 1) > 9)
    return ip;
  ip.valid = true;
  std::from_chars(line.data() + i + 1, line.data() + j, ip.index);
  return ip;
}

ParseError make_error(ParseErrorKind kind, std::size_t offset, std::string msg) {
  return ParseError{kind, offset, std::move(msg)};
}

std::optional<ParseError> check_ranges(const ParsedPrediction& p, std::size_t offset) {
  if (!is_valid(p.lattice))
    return make_error(ParseErrorKind::RangeError, offset, "lattice parameters do not form a valid cell");
  for (std::size_t m = 0; m < p.poses.size(); ++m) {
    const BlockPose& pose = p.poses[m];
    std::string where = "block " + std::to_string(m) + ": ";
    if (std::abs(pose.euler.pitch) > kPi / 2 + kAngleSlack)
      return make_error(ParseErrorKind::RangeError, offset, where + "pitch outside [-pi/2, pi/2]");
    if (std::abs(pose.euler.roll) > kPi + kAngleSlack || std::abs(pose.euler.yaw) > kPi + kAngleSlack)
      return make_error(ParseErrorKind::RangeError, offset, where + "roll/yaw outside [-pi, pi]");
  }
  return std::nullopt;
}

BlockPose pose_from(const double* v) {
  BlockPose p;
  p.translation = Vec3(v[0], v[1], v[2]);
  p.euler = {v[3], v[4], v[5]};
  return p;
}

LatticeParams lattice_from(const double* v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }

// Lenient parse: prose before the lattice line and between/after pose lines
// is skipped; pose numbers may be bare or wrapped in labels and parentheses.
ParseResult parse_lenient(std::string_view text, std::optional<std::size_t> expected) {
  auto lines = split_lines(text);
  std::optional<LatticeParams> lattice;
  std::size_t lattice_offset = 0;
  ParsedPrediction out;

  for (const Line& line : lines) {
    if (is_blank(line.text))
      continue;
    IndexPrefix ip = index_prefix(line.text);
    if (!lattice) {
      if (ip.present)
        return make_error(ParseErrorKind::MissingField, line.offset + ip.start,
                          "block line before the lattice line");
      auto toks = tokenize(line.text);
      bool candidate = !toks.empty();
      bool any_number = false;
      for (const Token& t : toks) {
        if (t.kind == TokKind::Word) {
          std::string w = lower(t.text);
          if (w != "lattice" && w != "parameters" && w != "lattice_parameters")
            candidate = false;
        } else {
          any_number = true;
        }
      }
      if (!candidate || !any_number)
        continue;  // prose
      std::vector<double> nums;
      for (const Token& t : toks) {
        if (t.kind == TokKind::BadNumber)
          return make_error(ParseErrorKind::MalformedNumber, line.offset + t.offset,
                            "malformed number '" + std::string(t.text.substr(0, 32)) + "'");
        if (t.kind == TokKind::Number)
          nums.push_back(t.value);
      }
      if (nums.size() != 6)
        return make_error(ParseErrorKind::MissingField, line.offset,
                          "lattice line needs 6 numbers, found " + std::to_string(nums.size()));
      lattice = lattice_from(nums.data());
      lattice_offset = line.offset;
      continue;
    }

    if (!ip.present)
      continue;  // trailing or interleaved prose
    if (!ip.valid)
      return make_error(ParseErrorKind::MalformedNumber, line.offset + ip.start, "block index too long");
    std::size_t want = out.poses.size();
    if (ip.index != want)
      return make_error(ParseErrorKind::IndexGap, line.offset + ip.start,
                        "expected block [" + std::to_string(want) + "], found [" +
                            std::to_string(ip.index) + "]");
    std::vector<double> nums;
    for (const Token& t : tokenize(line.text, ip.end)) {
      if (t.kind == TokKind::BadNumber)
        return make_error(ParseErrorKind::MalformedNumber, line.offset + t.offset,
                          "malformed number '" + std::string(t.text.substr(0, 32)) + "'");
      if (t.kind == TokKind::Number)
        nums.push_back(t.value);
    }
    if (nums.size() != 6)
      return make_error(ParseErrorKind::MissingField, line.offset,
                        "block line needs 6 numbers, found " + std::to_string(nums.size()));
    out.poses.push_back(pose_from(nums.data()));
  }

  if (!lattice) {
    bool any_digit = false;
    for (char c : text)
      if (is_digit(c)) {
        any_digit = true;
        break;
      }
    if (!any_digit)
      return make_error(ParseErrorKind::Empty, 0, "no structure found in response");
    return make_error(ParseErrorKind::MissingField, 0, "no lattice line found");
  }
  out.lattice = *lattice;
  if (out.poses.empty() || (expected && out.poses.size() != *expected))
    return make_error(ParseErrorKind::CountMismatch, text.size(),
                      "found " + std::to_string(out.poses.size()) + " blocks, expected " +
                          (expected ? std::to_string(*expected) : std::string("at least 1")));
  if (auto err = check_ranges(out, lattice_offset))
    return *err;
  return out;
}

// Cursor over one line for the canonical layout.
struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  bool literal(std::string_view lit) {
    if (s.substr(pos, lit.size()) != lit)
      return false;
    pos += lit.size();
    return true;
  }
  std::optional<double> number() {
    std::size_t end = pos;
    // swallow letters too so that "1e1" fails as a number, not as a separator
    while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                              s[end] == '-' || s[end] == '+'))
      ++end;
    auto v = parse_number(s.substr(pos, end - pos));
    if (v)
      pos = end;
    return v;
  }
  bool done() const { return pos == s.size(); }
};

ParseResult parse_strict(std::string_view text, std::optional<std::size_t> expected) {
  auto lines = split_lines(text);
  if (!lines.empty() && lines.back().text.empty())
    lines.pop_back();
  if (lines.empty() || is_blank(text))
    return make_error(ParseErrorKind::Empty, 0, "empty response");

  ParsedPrediction out;
  {
    Cursor c{lines[0].text};
    double v[6];
    for (int k = 0; k < 6; ++k) {
      if (k && !c.literal(" "))
        return make_error(ParseErrorKind::MissingField, lines[0].offset + c.pos, "lattice line needs 6 numbers");
      auto n = c.number();
      if (!n)
        return make_error(ParseErrorKind::MalformedNumber, lines[0].offset + c.pos, "bad lattice number");
      v[k] = *n;
    }
    if (!c.done())
      return make_error(ParseErrorKind::MalformedNumber, lines[0].offset + c.pos, "trailing text on lattice line");
    out.lattice = lattice_from(v);
  }

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Line& line = lines[li];
    IndexPrefix ip = index_prefix(line.text);
    if (!ip.present || ip.start != 0)
      return make_error(ParseErrorKind::MissingField, line.offset, "expected a block line");
    if (!ip.valid)
      return make_error(ParseErrorKind::MalformedNumber, line.offset, "block index too long");
    if (ip.index != out.poses.size())
      return make_error(ParseErrorKind::IndexGap, line.offset,
                        "expected block [" + std::to_string(out.poses.size()) + "]");
    Cursor c{line.text, ip.end};
    double v[6];
    int k = 0;
    for (std::string_view label : {" translation=(", " rotation=("}) {
      if (!c.literal(label))
        return make_error(ParseErrorKind::MissingField, line.offset + c.pos, "expected '" + std::string(label) + "'");
      for (int j = 0; j < 3; ++j, ++k) {
        if (j && !c.literal(","))
          return make_error(ParseErrorKind::MissingField, line.offset + c.pos, "expected ','");
        auto n = c.number();
        if (!n)
          return make_error(ParseErrorKind::MalformedNumber, line.offset + c.pos, "bad pose number");
        v[k] = *n;
      }
      if (!c.literal(")"))
        return make_error(ParseErrorKind::MissingField, line.offset + c.pos, "expected ')'");
    }
    if (!c.done())
      return make_error(ParseErrorKind::MalformedNumber, line.offset + c.pos, "trailing text on block line");
    out.poses.push_back(pose_from(v));
  }

  if (out.poses.empty() || (expected && out.poses.size() != *expected))
    return make_error(ParseErrorKind::CountMismatch, text.size(),
                      "found " + std::to_string(out.poses.size()) + " blocks");
  if (auto err = check_ranges(out, 0))
    return *err;
  return out;
}

} // namespace

ParseResult parse_response(std::string_view text, std::optional<std::size_t> expected_blocks,
                           const ParseOptions& opts) {
  try {
    return opts.strict ? parse_strict(text, expected_blocks) : parse_lenient(text, expected_blocks);
  } catch (const std::exception& e) {
    // allocation failure and the like; keep the parser total
    return make_error(ParseErrorKind::MalformedNumber, 0, e.what());
  }
}

} // namespace mofasm
