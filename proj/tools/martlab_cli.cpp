// martlab: verify models, run the refinement pipelines, generate fixtures.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage/parse/validation error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "martlab/generators.hpp"
#include "martlab/suites.hpp"

using namespace martlab;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

LevelRange parse_levels(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--levels expects A..B, got '" + text + "'");
  try {
    std::size_t used = 0;
    std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    LevelRange r{std::stoul(a, &used), 0};
    if (used != a.size()) throw UsageError("bad level '" + a + "'");
    r.last = std::stoul(b, &used);
    if (used != b.size()) throw UsageError("bad level '" + b + "'");
    if (r.first > r.last) throw UsageError("--levels A..B needs A <= B");
    return r;
  } catch (const std::logic_error&) {
    throw UsageError("--levels expects A..B with natural numbers, got '" + text + "'");
  }
}

void write_report(const std::string& path, const Json& doc) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write report to '" + path + "'");
  out << doc.dump(2) << "\n";
}

std::string witness_text(const VerificationReport& r) {
  if (!r.witness) return {};
  std::ostringstream s;
  s << "      witness: time index " << r.witness->time_index << ", block {";
  for (std::size_t i = 0; i < r.witness->block.size(); ++i) s << (i ? ", " : "") << r.witness->block[i];
  s << "}\n";
  return s.str();
}

int cmd_verify(const std::string& model_path, const std::string& suite, const SuiteOptions& opt,
               const std::string& report_path) {
  Model m = load_model(model_path);
  auto checks = run_suite(m, suite, opt);
  bool ok = all_passed(checks);
  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (!c.report.passed) ++failed;
    std::cout << (c.report.passed ? "[PASS] " : "[FAIL] ") << c.suite << " / " << c.name;
    if (!c.report.passed) std::cout << "  violation " << to_string(c.report.worst_violation);
    std::cout << "\n";
    if (!c.report.detail.empty()) std::cout << "      " << c.report.detail << "\n";
    std::cout << witness_text(c.report);
  }
  std::cout << checks.size() << " checks, " << failed << " failed: " << (ok ? "PASS" : "FAIL") << "\n";
  Json doc = Json::object();
  doc["version"] = 1;
  doc["command"] = "verify";
  doc["model"] = model_path;
  doc["suite"] = suite;
  doc["passed"] = ok;
  doc["checks"] = checks_json(checks);
  write_report(report_path, doc);
  return ok ? kPass : kFail;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

int cmd_pipeline(const std::string& model_path, const std::string& pipeline, std::string process,
                 const std::string& levels_text, std::size_t window, const MazurOptions& mopt,
                 const std::string& report_path) {
  if (pipeline != "compensator" && pipeline != "qv")
    throw UsageError("--pipeline must be 'compensator' or 'qv', got '" + pipeline + "'");
  if (window < 1) throw UsageError("--window must be at least 1");
  Model m = load_model(model_path);
  const NamedProcess* target = nullptr;
  if (!process.empty()) {
    target = m.find_process(process);
    if (!target) throw ValidationError("processes", "no process named '" + process + "'");
  } else {
    const char* wanted = pipeline == "compensator" ? "increasing" : "martingale";
    for (const auto& p : m.processes)
      if (p.kind == wanted) {
        target = &p;
        break;
      }
    if (!target) throw ValidationError("processes", std::string("no process of kind '") + wanted + "'");
  }
  const std::size_t fine = grid_level(*m.filtration);
  LevelRange levels = levels_text.empty() ? LevelRange{0, fine} : parse_levels(levels_text);
  if (levels.last > fine)
    throw UsageError("--levels " + levels_text + " goes above the model's grid level " + std::to_string(fine));

  ConvergenceTable t = pipeline == "compensator" ? compensator_pipeline(target->path, levels, window, mopt)
                                                 : qv_pipeline(target->path, levels, window, mopt);
  bool ok = t.passed();

  std::cout << pipeline << " pipeline on " << target->name << ", levels " << levels.first << ".." << levels.last
            << ", window " << window << "\n";
  std::cout << pad("level", 7) << pad("sup_error", 16) << pad("terminal_error", 16)
            << (pipeline == "qv" ? pad("jump_error", 16) : "") << "alpha\n";
  for (const auto& r : t.rows) {
    std::cout << pad(std::to_string(r.level), 7) << pad(to_string(r.sup_error), 16)
              << pad(to_string(r.terminal_error), 16) << (r.jump_error ? pad(to_string(*r.jump_error), 16) : "");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", r.alpha);
    std::cout << buf << "\n";
  }
  for (const auto& note : t.notes) std::cout << "note: " << note << "\n";

  Json doc = Json::object();
  doc["version"] = 1;
  doc["command"] = "pipeline";
  doc["model"] = model_path;
  doc["process"] = target->name;
  doc["levels"] = {levels.first, levels.last};
  doc["table"] = table_json(t);

  Json limsup = Json::array();
  if (pipeline == "compensator") {
    for (const auto& s : m.stopping_times) {
      StoppingTime st = s.time.capped(m.filtration->steps());
      auto rep = limsup_at_stopping_time_check(target->path, st, levels);
      ok = ok && rep.passed;
      std::cout << (rep.passed ? "[PASS] " : "[FAIL] ") << "limsup at " << s.name << ": " << rep.detail << "\n";
      Json j = report_json(rep);
      j["stopping_time"] = s.name;
      limsup.push_back(j);
    }
    doc["limsup_checks"] = limsup;
  }
  std::cout << "top level exact: " << (t.top_exact() ? "yes" : "no")
            << ", nonincreasing over last three levels: " << (t.tail_nonincreasing() ? "yes" : "no") << ": "
            << (ok ? "PASS" : "FAIL") << "\n";
  doc["passed"] = ok;
  write_report(report_path, doc);
  return ok ? kPass : kFail;
}

int cmd_generate(const std::string& name, const GeneratorParams& params, const std::string& out_path) {
  Model m = generate_model(name, params);
  std::string text = dump_model(m);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + out_path + "'");
    out << text;
    std::cout << "wrote " << out_path << " (" << m.space->size() << " outcomes, " << m.filtration->steps()
              << " steps, " << m.processes.size() << " processes)\n";
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact martingale laboratory on finite filtered spaces"};
  app.require_subcommand(1);

  std::string model, suite = "all", report, pipeline, process, levels, generator, out, p_up = "1/2", scale = "1",
                     p_jump = "1/2", jump_law = "1:1";
  std::size_t window = 16, depth = 3, n_max = 6;
  std::uint64_t seed = 0;
  bool exact = false;

  auto* verify = app.add_subcommand("verify", "Run a verification suite on a model file");
  verify->add_option("--model", model, "Model file")->required();
  verify->add_option("--suite", suite, "martingale | compensator | quadratic | mazur | appendix | all");
  verify->add_option("--window", window, "Mazur window");
  verify->add_flag("--exact-mazur", exact, "Rational KKT over all supports");
  verify->add_option("--report", report, "Write a JSON report");

  auto* pipe = app.add_subcommand("pipeline", "Run a refinement pipeline on a dyadic model");
  pipe->add_option("--model", model, "Model file")->required();
  pipe->add_option("--pipeline", pipeline, "compensator | qv")->required();
  pipe->add_option("--process", process, "Process name (default: first of the matching kind)");
  pipe->add_option("--levels", levels, "Level range A..B (default 0..n_max)");
  pipe->add_option("--window", window, "Mazur window");
  pipe->add_flag("--exact-mazur", exact, "Rational KKT over all supports");
  pipe->add_option("--report", report, "Write a JSON report");

  auto* gen = app.add_subcommand("generate", "Write a generated model file");
  gen->add_option("--generator", generator, "binary_tree | random_walk | poisson_skeleton | randomized | "
                                            "single_jump | up_counter | walk | stopped_walk | constant")
      ->required();
  gen->add_option("--depth", depth, "Tree depth");
  gen->add_option("--p-up", p_up, "Up probability");
  gen->add_option("--scale", scale, "Walk scale");
  gen->add_option("--p-jump", p_jump, "Jump probability per step");
  gen->add_option("--jump-law", jump_law, "Jump law as value:prob,...");
  gen->add_option("--n-max", n_max, "Finest dyadic level for the grid fixtures");
  gen->add_option("--seed", seed, "Seed for the randomized generator");
  gen->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  MazurOptions mopt;
  mopt.exact = exact;
  try {
    if (*verify) {
      SuiteOptions opt;
      opt.window = window;
      opt.mazur = mopt;
      if (window < 1) throw UsageError("--window must be at least 1");
      return cmd_verify(model, suite, opt, report);
    }
    if (*pipe) return cmd_pipeline(model, pipeline, process, levels, window, mopt, report);
    GeneratorParams params;
    params.depth = depth;
    params.p_up = parse_rational(p_up);
    params.scale = parse_rational(scale);
    params.p_jump = parse_rational(p_jump);
    params.jump_law = parse_jump_law(jump_law);
    params.n_max = n_max;
    params.seed = seed;
    return cmd_generate(generator, params, out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "check failed: precondition violated: " << e.what() << "\n";
    return kFail;
  }
}
