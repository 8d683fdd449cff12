#include "mofasm/io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mofasm/elements.hpp"
#include "mofasm/error.hpp"

namespace mofasm {

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorKind::Schema, msg); }

const json& field(const json& j, const char* key) {
  if (!j.is_object())
    schema(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end())
    schema(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number())
    schema(std::string("'") + what + "' must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v))
    schema(std::string("'") + what + "' must be finite");
  return v;
}

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    schema(std::string("'") + what + "' must be an array of 3 numbers");
  return Vec3(number(j[0], what), number(j[1], what), number(j[2], what));
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Points points(const json& j, const char* what) {
  if (!j.is_array())
    schema(std::string("'") + what + "' must be an array");
  Points out;
  for (const json& e : j)
    out.push_back(vec3(e, what));
  return out;
}

std::vector<int> species_list(const json& j) {
  if (!j.is_array())
    schema("'species' must be an array");
  std::vector<int> out;
  for (const json& e : j)
    out.push_back(species_from_json(e));
  return out;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null())
    return std::nullopt;
  if (!it->is_string())
    schema(std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}


json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

// ---------------------------------------------------------------- records

LatticeParams lattice_params_from_json(const json& j) {
  return {number(field(j, "a"), "a"),         number(field(j, "b"), "b"),
          number(field(j, "c"), "c"),         number(field(j, "alpha"), "alpha"),
          number(field(j, "beta"), "beta"),   number(field(j, "gamma"), "gamma")};
}

json lattice_params_to_json(const LatticeParams& p) {
  return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}};
}

LatticeMatrix lattice_from_json(const json& j) {
  if (j.is_object())
    return params_to_matrix(lattice_params_from_json(j));
  if (!j.is_array() || j.size() != 3)
    schema("lattice must be parameters or a 3x3 matrix");
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    m.row(i) = vec3(j[i], "lattice row").transpose();
  if (std::abs(m.determinant()) < 1e-9)
    throw Error(ErrorKind::SingularLattice, "lattice matrix is singular");
  return LatticeMatrix(m);
}

int species_from_json(const json& j) {
  int z = 0;
  if (j.is_number_integer())
    z = j.get<int>();
  else if (j.is_string())
    z = atomic_number(j.get<std::string>());
  else
    schema("species must be an atomic number or a symbol");
  if (!is_known_element(z))
    throw Error(ErrorKind::UnknownElement, "unknown element " + j.dump());
  return z;
}

BuildingBlock block_from_json(const json& j) {
  std::vector<int> species = species_list(field(j, "species"));
  Points local = points(field(j, "local_coords"), "local_coords");
  if (species.empty() || species.size() != local.size())
    schema("block species and local_coords must be non-empty and aligned");
  return make_block(std::move(species), std::move(local), opt_string(j, "smiles").value_or(""));
}

json block_to_json(const BuildingBlock& b) {
  json coords = json::array();
  for (const Vec3& v : b.local_coords)
    coords.push_back(vec3_json(v));
  json species = json::array();
  for (int z : b.species)
    species.push_back(std::string(element_symbol(z)));
  return {{"species", species}, {"local_coords", coords}, {"smiles", b.smiles}};
}

BlockPose pose_from_json(const json& j) {
  BlockPose p;
  p.translation = vec3(field(j, "translation"), "translation");
  Vec3 e = vec3(field(j, "euler"), "euler");
  p.euler = {e.x(), e.y(), e.z()};
  return p;
}

json pose_to_json(const BlockPose& p) {
  return {{"translation", vec3_json(p.translation)},
          {"euler", json::array({p.euler.roll, p.euler.pitch, p.euler.yaw})}};
}

StructureRecord record_from_json(const json& j) {
  StructureRecord r;
  const json& id = field(j, "id");
  r.id = id.is_string() ? id.get<std::string>() : id.dump();
  r.spec.lattice = lattice_params_from_json(field(j, "lattice"));
  if (!is_valid(r.spec.lattice))
    throw Error(ErrorKind::InvalidLattice, "record " + r.id + ": invalid lattice parameters");
  const json& blocks = field(j, "blocks");
  const json& poses = field(j, "poses");
  if (!blocks.is_array() || !poses.is_array())
    schema("'blocks' and 'poses' must be arrays");
  if (blocks.size() != poses.size())
    schema("'blocks' and 'poses' differ in length");
  if (blocks.empty())
    throw Error(ErrorKind::EmptyBlockList, "record " + r.id + " has no blocks");
  r.spec.blocks.reserve(blocks.size());
  for (const json& b : blocks)
    r.spec.blocks.push_back(block_from_json(b));
  for (const json& p : poses)
    r.spec.poses.push_back(pose_from_json(p));
  r.topology_code = opt_string(j, "topology_code");
  r.topology_description = opt_string(j, "topology_description");
  return r;
}

json record_to_json(const StructureRecord& r) {
  json blocks = json::array(), poses = json::array();
  for (const BuildingBlock& b : r.spec.blocks)
    blocks.push_back(block_to_json(b));
  for (const BlockPose& p : r.spec.poses)
    poses.push_back(pose_to_json(p));
  json j{{"id", r.id}, {"lattice", lattice_params_to_json(r.spec.lattice)}, {"blocks", blocks}, {"poses", poses}};
  if (r.topology_code)
    j["topology_code"] = *r.topology_code;
  if (r.topology_description)
    j["topology_description"] = *r.topology_description;
  return j;
}

AtomStructure atoms_from_json(const json& j) {
  AtomStructure s;
  s.species = species_list(field(j, "species"));
  s.frac_coords = points(field(j, "frac_coords"), "frac_coords");
  if (s.species.size() != s.frac_coords.size())
    schema("'species' and 'frac_coords' differ in length");
  if (j.contains("lattice_matrix"))
    s.lattice = lattice_from_json(j["lattice_matrix"]);
  else
    s.lattice = lattice_from_json(field(j, "lattice"));
  for (Vec3& f : s.frac_coords)
    f = wrap_frac(f);
  return s;
}

json atoms_to_json(const AtomStructure& s) {
  json species = json::array(), coords = json::array(), rows = json::array();
  for (int z : s.species)
    species.push_back(std::string(element_symbol(z)));
  for (const Vec3& f : s.frac_coords)
    coords.push_back(vec3_json(f));
  for (int i = 0; i < 3; ++i)
    rows.push_back(vec3_json(s.lattice.row(i)));
  return {{"species", species},
          {"frac_coords", coords},
          {"lattice", lattice_params_to_json(matrix_to_params(s.lattice))},
          {"lattice_matrix", rows}};
}

AtomStructure structure_from_json(const json& j) {
  if (j.is_object() && j.contains("blocks"))
    return assemble(record_from_json(j).spec);
  return atoms_from_json(j);
}

json match_report_to_json(const MatchReport& r) {
  return {{"matched", r.matched},
          {"lattice_matched", r.lattice_matched},
          {"rmse", number_or_null(r.rmse)},
          {"max_disp", number_or_null(r.max_disp)},
          {"tier", to_string(r.tier)},
          {"mappings", r.mappings},
          {"solver", to_string(r.solver)}};
}

json descriptors_to_json(const DescriptorReport& r) {
  return {{"ucv", r.ucv},
          {"density", r.density},
          {"vf_grid", r.void_fraction},
          {"lcd_grid", r.lcd},
          {"grid_resolution", r.grid_resolution},
          {"probe_radius", r.probe_radius}};
}

json parse_result_to_json(const ParseResult& r) {
  if (const auto* p = std::get_if<ParsedPrediction>(&r)) {
    json poses = json::array();
    for (const BlockPose& b : p->poses)
      poses.push_back(pose_to_json(b));
    return {{"ok", true}, {"lattice", lattice_params_to_json(p->lattice)}, {"poses", poses}};
  }
  const auto& e = std::get<ParseError>(r);
  return {{"ok", false},
          {"error", {{"kind", std::string(to_string(e.kind))}, {"offset", e.offset}, {"message", e.message}}}};
}

// ---------------------------------------------------------------- scenario

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = opt_string(j, "name").value_or("scenario");
  if (j.contains("vocab")) {
    const json& v = j["vocab"];
    if (v.contains("lengths"))
      s.vocab.lengths = v["lengths"].get<std::vector<double>>();
    if (v.contains("angles"))
      s.vocab.angles = v["angles"].get<std::vector<double>>();
    if (v.contains("translation_bins"))
      s.vocab.translation_bins = v["translation_bins"].get<int>();
    if (v.contains("euler_bins"))
      s.vocab.euler_bins = v["euler_bins"].get<int>();
    if (s.vocab.lengths.empty() || s.vocab.angles.empty() || s.vocab.translation_bins < 1 ||
        s.vocab.euler_bins < 1)
      schema("vocab grids must be non-empty");
  }
  StructureRecord r = record_from_json(field(j, "structure"));
  s.blocks = r.spec.blocks;
  s.gt_lattice = r.spec.lattice;
  s.gt_poses = r.spec.poses;
  return s;
}

json scenario_to_json(const Scenario& s) {
  StructureRecord r{s.name, {s.gt_lattice, s.blocks, s.gt_poses}, std::nullopt, std::nullopt};
  return {{"name", s.name},
          {"vocab",
           {{"lengths", s.vocab.lengths},
            {"angles", s.vocab.angles},
            {"translation_bins", s.vocab.translation_bins},
            {"euler_bins", s.vocab.euler_bins}}},
          {"structure", record_to_json(r)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    schema(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- datasets

DatasetLoad parse_dataset(std::istream& in) {
  DatasetLoad out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    RecordIssue issue{lineno, {}, {}, false};
    try {
      json j = json::parse(line);
      if (j.is_object() && j.contains("id"))
        issue.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      if (j.is_object() && j.contains("blocks") && j["blocks"].is_array() && j["blocks"].size() > kMaxBlocks) {
        issue.skipped = true;
        issue.message = "skipped: " + std::to_string(j["blocks"].size()) + " blocks exceeds the limit of " +
                        std::to_string(kMaxBlocks);
        out.issues.push_back(issue);
        continue;
      }
      out.records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      issue.message = std::string("malformed JSON: ") + e.what();
      out.issues.push_back(issue);
    } catch (const Error& e) {
      issue.message = e.what();
      out.issues.push_back(issue);
    }
  }
  return out;
}

DatasetLoad load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_dataset(in);
}

EmitCounts emit_corpus(const std::vector<StructureRecord>& records, CorpusMode mode, std::ostream& out,
                       const TemplateSet& templates) {
  EmitCounts c;
  for (const StructureRecord& r : records) {
    json line;
    try {
      if (mode == CorpusMode::Cpt) {
        if (!r.topology_code || !r.topology_description) {
          ++c.skipped;
          c.reasons.push_back(r.id + ": missing topology fields");
          continue;
        }
        CptRecord cpt = make_cpt_record(r.spec, *r.topology_code, *r.topology_description);
        line = {{"id", r.id}, {"text", render_cpt(cpt, templates)}};
      } else {
        line = {{"id", r.id},
                {"prompt", render_sft(r.spec.blocks, templates)},
                {"response", render_sft_response(r.spec.lattice, r.spec.poses)}};
      }
    } catch (const Error& e) {
      ++c.skipped;
      c.reasons.push_back(r.id + ": " + e.what());
      continue;
    }
    out << line.dump() << '\n';
    ++c.emitted;
  }
  return c;
}

EmitCounts emit_corpora(const std::vector<StructureRecord>& records, CorpusMode mode,
                        const std::filesystem::path& out_path, const TemplateSet& templates) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::Io, "cannot write " + out_path.string());
  EmitCounts c = emit_corpus(records, mode, out, templates);
  if (!out)
    throw Error(ErrorKind::Io, "write failed for " + out_path.string());
  return c;
}

// ---------------------------------------------------------------- evaluation

EvalCase eval_case_from_json(const json& j) {
  EvalCase c;
  c.gt = record_from_json(field(j, "gt"));
  c.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump()) : c.gt.id;
  const json& cands = field(j, "candidates");
  if (!cands.is_array() || cands.empty())
    schema("'candidates' must be a non-empty array");
  for (const json& t : cands) {
    if (!t.is_string())
      schema("candidates must be strings");
    c.candidates.push_back(t.get<std::string>());
  }
  return c;
}

std::vector<EvalCase> load_eval_cases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<EvalCase> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      out.push_back(eval_case_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      schema("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

EvalSummary evaluate(const std::vector<EvalCase>& cases, const std::vector<MatchTolerances>& tolerance_sets,
                     std::size_t samples, const ParseOptions& parse, Exec exec) {
  using clock = std::chrono::steady_clock;
  EvalSummary s;
  s.cases = cases.size();
  s.samples = samples;

  auto t0 = clock::now();
  std::vector<AtomStructure> gts(cases.size());
  std::vector<CandidateSet> cands(cases.size());
  std::vector<std::size_t> failures(cases.size(), 0);
  const long n = static_cast<long>(cases.size());
  for (long i = 0; i < n; ++i)
    gts[i] = assemble(cases[i].gt.spec);
  auto prepare = [&](long i) {
    const EvalCase& c = cases[i];
    std::size_t k = samples ? std::min(samples, c.candidates.size()) : c.candidates.size();
    for (std::size_t m = 0; m < k; ++m) {
      ParseResult r = parse_response(c.candidates[m], c.gt.spec.blocks.size(), parse);
      std::optional<AtomStructure> a;
      if (const auto* p = std::get_if<ParsedPrediction>(&r)) {
        try {
          a = assemble({p->lattice, c.gt.spec.blocks, p->poses});
        } catch (const Error&) {
        }
      }
      if (!a)
        ++failures[i];
      cands[i].push_back(std::move(a));
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i)
      prepare(i);
  } else {
    for (long i = 0; i < n; ++i)
      prepare(i);
  }
  for (std::size_t f : failures)
    s.parse_failures += f;
  double prep_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  for (const MatchTolerances& tol : tolerance_sets) {
    auto t1 = clock::now();
    BatchSummary b = evaluate_batch(cands, gts, tol, exec);
    double secs = std::chrono::duration<double>(clock::now() - t1).count() + prep_seconds;
    s.rows.push_back({tol, b.match_rate, b.mean_rmse, b.matched, n ? secs / static_cast<double>(n) : 0.0});
  }
  return s;
}

json eval_summary_to_json(const EvalSummary& s) {
  json rows = json::array();
  for (const EvalRow& r : s.rows)
    rows.push_back({{"stol", r.tol.stol},
                    {"ltol", r.tol.ltol},
                    {"atol", r.tol.atol},
                    {"match_rate", r.match_rate},
                    {"rmse", number_or_null(r.mean_rmse)},
                    {"matched", r.matched},
                    {"avg_time_s", r.seconds_per_structure}});
  return {{"cases", s.cases}, {"samples", s.samples}, {"parse_failures", s.parse_failures}, {"results", rows}};
}

std::string format_eval_table(const EvalSummary& s) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %8s %8s %8s %12s\n", "tolerances", "samples", "MR (%)", "RMSE",
                "Avg time (s)");
  out << buf;
  for (const EvalRow& r : s.rows) {
    std::string tol = "(" + format_fixed(r.tol.stol, 2) + "," + format_fixed(r.tol.ltol, 2) + "," +
                      format_fixed(r.tol.atol, 2) + ")";
    std::string rmse = std::isfinite(r.mean_rmse) ? format_fixed(r.mean_rmse, 4) : "-";
    std::string samples = s.samples ? std::to_string(s.samples) : "all";
    std::snprintf(buf, sizeof buf, "%-18s %8s %8s %8s %12s\n", tol.c_str(), samples.c_str(),
                  format_fixed(r.match_rate, 2).c_str(), rmse.c_str(),
                  format_fixed(r.seconds_per_structure, 4).c_str());
    out << buf;
  }
  return out.str();
}

std::vector<MatchTolerances> parse_tolerance_sets(const std::string& text) {
  std::vector<MatchTolerances> out;
  std::stringstream sets(text);
  std::string set;
  while (std::getline(sets, set, ';')) {
    if (set.find_first_not_of(" ") == std::string::npos)
      continue;
    std::stringstream parts(set);
    std::string part;
    std::vector<double> v;
    while (std::getline(parts, part, ',')) {
      std::size_t used = 0;
      double x = std::stod(part, &used);
      if (part.find_first_not_of(" ", used) != std::string::npos || !(x > 0))
        throw std::invalid_argument("bad tolerance '" + part + "'");
      v.push_back(x);
    }
    if (v.size() != 3)
      throw std::invalid_argument("a tolerance set needs stol,ltol,atol");
    out.push_back({v[0], v[1], v[2]});
  }
  if (out.empty())
    throw std::invalid_argument("no tolerance sets given");
  return out;
}

} // namespace mofasm
