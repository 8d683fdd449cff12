// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "mofasm/assembler.hpp"
#include "mofasm/descriptors.hpp"
#include "mofasm/error.hpp"
#include "mofasm/io.hpp"
#include "mofasm/matcher.hpp"
#include "mofasm/policy_sim.hpp"
#include "mofasm/reward.hpp"
#include "mofasm/text_codec.hpp"

using namespace mofasm;

namespace {

constexpr int kDataError = 2;

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json read_json_input(const std::string& path) {
  std::string text = read_input(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, path + ": " + e.what());
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_input(path));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    lines.push_back(l);
  return lines;
}

void set_workers(int workers) {
#ifdef _OPENMP
  if (workers > 0)
    omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

void report_issues(const DatasetLoad& d) {
  for (const RecordIssue& i : d.issues)
    std::cerr << (i.skipped ? "warning" : "error") << ": line " << i.line << (i.id.empty() ? "" : " (" + i.id + ")")
              << ": " << i.message << '\n';
}

int run_encode(const std::string& input, const std::string& output, CorpusMode mode) {
  DatasetLoad d = load_dataset(input);
  report_issues(d);
  TemplateSet t = TemplateSet::from_env();
  EmitCounts c;
  if (output.empty() || output == "-")
    c = emit_corpus(d.records, mode, std::cout, t);
  else
    c = emit_corpora(d.records, mode, output, t);
  for (const std::string& r : c.reasons)
    std::cerr << "skipped: " << r << '\n';
  json summary{{"emitted", c.emitted}, {"skipped", c.skipped}, {"load_errors", d.issues.size()}};
  std::cerr << summary.dump() << '\n';
  return 0;
}

int run_parse(const std::string& input, std::optional<std::size_t> blocks, bool strict) {
  ParseResult r = parse_response(read_input(input), blocks, ParseOptions{strict});
  print(parse_result_to_json(r));
  return parsed_ok(r) ? 0 : kDataError;
}

int run_assemble(const std::string& input, const std::string& cif) {
  StructureRecord r = record_from_json(read_json_input(input));
  AtomStructure s = assemble(r.spec);
  json j = atoms_to_json(s);
  j["id"] = r.id;
  print(j);
  if (!cif.empty()) {
    std::ofstream out(cif);
    if (!out)
      throw Error(ErrorKind::Io, "cannot write " + cif);
    out << write_cif(s, r.id.empty() ? "mofasm" : r.id);
  }
  return 0;
}

int run_match(const std::string& pred, const std::string& gt, const std::string& tolerances) {
  AtomStructure p = structure_from_json(read_json_input(pred));
  AtomStructure g = structure_from_json(read_json_input(gt));
  std::vector<MatchTolerances> sets = parse_tolerance_sets(tolerances);
  json out = json::array();
  for (const MatchTolerances& tol : sets) {
    json j = match_report_to_json(structures_match(p, g, tol));
    j["tolerances"] = {tol.stol, tol.ltol, tol.atol};
    out.push_back(j);
  }
  print(out.size() == 1 ? out[0] : out);
  return 0;
}

int run_evaluate(const std::string& input, const std::string& tolerances, std::size_t samples, bool strict) {
  std::vector<EvalCase> cases = load_eval_cases(input);
  EvalSummary s = evaluate(cases, parse_tolerance_sets(tolerances), samples, ParseOptions{strict});
  print(eval_summary_to_json(s));
  std::cerr << format_eval_table(s);
  return 0;
}

int run_reward(const std::string& input, bool strict) {
  std::vector<std::string> lines = read_lines(input);
  std::vector<json> out(lines.size());
  std::vector<std::string> errors(lines.size());
  const long n = static_cast<long>(lines.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      json j = json::parse(lines[i]);
      StructureRecord gt = record_from_json(j.at("gt_structure"));
      std::vector<BuildingBlock> blocks = gt.spec.blocks;
      if (j.contains("blocks")) {
        blocks.clear();
        for (const json& b : j["blocks"])
          blocks.push_back(block_from_json(b));
      }
      ParseResult parsed = parse_response(j.at("response_text").get<std::string>(), blocks.size(),
                                          ParseOptions{strict});
      RewardOutcome o = compute_reward(parsed, blocks, assemble(gt.spec));
      json r{{"line", i + 1},
             {"id", gt.id},
             {"reward", o.reward},
             {"parsed", o.parsed},
             {"tier", o.parsed ? to_string(o.tier) : "parse-failed"},
             {"rmse", std::isfinite(o.rmse) ? json(o.rmse) : json(nullptr)}};
      if (const auto* e = std::get_if<ParseError>(&parsed))
        r["parse_error"] = {{"kind", std::string(to_string(e->kind))}, {"offset", e->offset}, {"message", e->message}};
      out[i] = r;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  int code = 0;
  for (long i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      std::cerr << "error: line " << i + 1 << ": " << errors[i] << '\n';
      code = kDataError;
    } else if (!out[i].is_null()) {
      std::cout << out[i].dump() << '\n';
    }
  }
  return code;
}

struct TrainArgs {
  std::string scenario;
  std::string output;
  int steps = 500;
  int group_size = 8;
  double tau_pos = 1.0;
  double tau_neg = 1.05;
  double lr = 0.5;
  std::uint64_t seed = 0;
  double sft_lr = 2.0;
  double sft_target = 0.05;
  bool no_warm_start = false;
};

int run_train(const TrainArgs& a) {
  Scenario sc = a.scenario.empty() ? two_block_scenario() : scenario_from_json(read_json_input(a.scenario));
  ToyPolicy policy = ToyPolicy::uniform(sc.vocab.slot_sizes(sc.blocks.size()));
  if (!a.no_warm_start) {
    double nll = sft_warm_start(policy, sc.gt_tokens(), a.sft_lr, a.sft_target);
    std::cerr << json{{"sft_nll", nll}}.dump() << '\n';
  }
  TrainConfig cfg;
  cfg.steps = a.steps;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.sapo.group_size = a.group_size;
  cfg.sapo.tau_pos = a.tau_pos;
  cfg.sapo.tau_neg = a.tau_neg;
  std::vector<StepStats> curve;
  if (a.output.empty() || a.output == "-") {
    curve = run_training(policy, sc, cfg, &std::cout);
  } else {
    std::ofstream out(a.output);
    if (!out)
      throw Error(ErrorKind::Io, "cannot write " + a.output);
    curve = run_training(policy, sc, cfg, &out);
  }
  std::cerr << json{{"trailing_mean_reward_100", trailing_mean_reward(curve, 100)}}.dump() << '\n';
  return 0;
}

int run_descriptors(const std::string& input, double probe, int grid) {
  AtomStructure s = structure_from_json(read_json_input(input));
  print(descriptors_to_json(compute_descriptors(s, probe, grid)));
  return 0;
}

int run_niggli(const std::string& input) {
  json j = read_json_input(input);
  json out;
  LatticeMatrix L;
  bool has_atoms = j.is_object() && (j.contains("blocks") || j.contains("frac_coords"));
  AtomStructure s;
  if (has_atoms) {
    s = structure_from_json(j);
    L = s.lattice;
  } else {
    L = lattice_from_json(j.is_object() && j.contains("lattice") ? j["lattice"] : j);
  }
  NiggliResult r = niggli_reduce(L);
  json rows = json::array(), transform = json::array();
  for (int i = 0; i < 3; ++i) {
    rows.push_back({r.reduced.rows(i, 0), r.reduced.rows(i, 1), r.reduced.rows(i, 2)});
    transform.push_back({r.transform(i, 0), r.transform(i, 1), r.transform(i, 2)});
  }
  out = {{"input", lattice_params_to_json(matrix_to_params(L))},
         {"reduced", lattice_params_to_json(matrix_to_params(r.reduced))},
         {"reduced_matrix", rows},
         {"transform", transform},
         {"iterations", r.iterations}};
  if (has_atoms)
    out["structure"] = atoms_to_json(reduce_structure(s));
  print(out);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-level MOF structure toolkit"};
  app.require_subcommand(1);
  std::string default_tols = "0.5,0.3,1.0;1.0,0.3,1.0";

  int workers = 0;
  std::string input, output, second, tolerances, cif;
  bool strict = false;
  std::size_t samples = 0;
  std::optional<std::size_t> blocks;
  double probe = 0.0;
  int grid = 64;
  TrainArgs train;

  auto* cpt = app.add_subcommand("encode-cpt", "render the pre-training corpus from a dataset");
  auto* sft = app.add_subcommand("encode-sft", "render instruction/response pairs from a dataset");
  for (auto* sub : {cpt, sft}) {
    sub->add_option("input", input, "dataset JSONL")->required();
    sub->add_option("-o,--output", output, "output JSONL (default stdout)");
  }

  auto* parse = app.add_subcommand("parse", "parse a model response");
  parse->add_option("input", input, "response text file, - for stdin")->default_val("-");
  parse->add_option("--blocks", blocks, "expected number of blocks");
  parse->add_flag("--strict-parse", strict, "accept only the canonical layout");

  auto* asm_cmd = app.add_subcommand("assemble", "assemble a block-level record into atoms");
  asm_cmd->add_option("input", input, "structure record JSON")->required();
  asm_cmd->add_option("--cif", cif, "also write a P1 CIF");

  auto* match = app.add_subcommand("match", "match a predicted structure against a reference");
  match->add_option("pred", input, "predicted structure JSON")->required();
  match->add_option("gt", second, "reference structure JSON")->required();
  match->add_option("--tolerances", tolerances, "stol,ltol,atol[;...]")->default_val("0.5,0.3,1.0");

  auto* eval = app.add_subcommand("evaluate", "match rate and RMSE over evaluation cases");
  eval->add_option("input", input, "cases JSONL")->required();
  eval->add_option("--tolerances", tolerances, "stol,ltol,atol[;...]")->default_val(default_tols);
  eval->add_option("--samples", samples, "candidates used per case (0 = all)");
  eval->add_option("--workers", workers, "worker threads");
  eval->add_flag("--strict-parse", strict, "accept only the canonical layout");

  auto* reward = app.add_subcommand("reward", "score responses against reference structures");
  reward->add_option("input", input, "JSONL of {response_text, gt_structure, blocks?}")->required();
  reward->add_option("--workers", workers, "worker threads");
  reward->add_flag("--strict-parse", strict, "accept only the canonical layout");

  auto* tr = app.add_subcommand("train-sim", "toy-policy SFT warm start followed by policy optimization");
  tr->add_option("--scenario", train.scenario, "scenario JSON (default: built-in two-block cell)");
  tr->add_option("-o,--output", train.output, "metrics JSONL (default stdout)");
  tr->add_option("--steps", train.steps)->check(CLI::NonNegativeNumber);
  tr->add_option("--group-size", train.group_size)->check(CLI::Range(2, 1 << 20));
  tr->add_option("--tau-pos", train.tau_pos)->check(CLI::PositiveNumber);
  tr->add_option("--tau-neg", train.tau_neg)->check(CLI::PositiveNumber);
  tr->add_option("--lr", train.lr);
  tr->add_option("--seed", train.seed);
  tr->add_option("--sft-lr", train.sft_lr);
  tr->add_option("--sft-target", train.sft_target);
  tr->add_flag("--no-warm-start", train.no_warm_start);

  auto* desc = app.add_subcommand("descriptors", "cell volume, density, grid void fraction and LCD");
  desc->add_option("input", input, "structure JSON")->required();
  desc->add_option("--probe-radius", probe)->check(CLI::NonNegativeNumber);
  desc->add_option("--grid", grid)->check(CLI::Range(8, 1024));
  desc->add_option("--workers", workers, "worker threads");

  auto* nig = app.add_subcommand("niggli", "Niggli-reduce a lattice or structure");
  nig->add_option("input", input, "lattice or structure JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  set_workers(workers);
  try {
    if (*cpt)
      return run_encode(input, output, CorpusMode::Cpt);
    if (*sft)
      return run_encode(input, output, CorpusMode::Sft);
    if (*parse)
      return run_parse(input, blocks, strict);
    if (*asm_cmd)
      return run_assemble(input, cif);
    if (*match)
      return run_match(input, second, tolerances);
    if (*eval)
      return run_evaluate(input, tolerances, samples, strict);
    if (*reward)
      return run_reward(input, strict);
    if (*tr)
      return run_train(train);
    if (*desc)
      return run_descriptors(input, probe, grid);
    if (*nig)
      return run_niggli(input);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 1;
}
