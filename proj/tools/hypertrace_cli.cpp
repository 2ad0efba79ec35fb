#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypertrace/decide.hpp"
#include "hypertrace/eval.hpp"
#include "hypertrace/formula.hpp"
#include "hypertrace/minsky.hpp"
#include "hypertrace/syntax.hpp"
#include "hypertrace/transforms.hpp"

using json = nlohmann::json;
using namespace hypertrace;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;
constexpr int kExitResource = 70;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const json& j, bool pretty) {
  if (pretty)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << j.dump() << "\n";
}

AutomataLimits limits_from_env() {
  AutomataLimits limits;
  if (const char* cap = std::getenv("HYPERTRACE_STATE_CAP")) {
    limits.rank_input_cap = std::atoi(cap);
    limits.macro_budget = static_cast<size_t>(limits.rank_input_cap) * 20000;
  }
  return limits;
}

struct EvalFlags {
  uint64_t horizon_cap = 10000;
  int universe_prefix = 2;
  int universe_period = 2;
  std::string mode = "bounded";

  EvalOptions options(const AutomataLimits& limits) const {
    EvalOptions opts;
    opts.max_horizon = horizon_cap;
    opts.universe_prefix = universe_prefix;
    opts.universe_period = universe_period;
    if (mode == "exact") {
      opts = exact_eval_options(limits);
      opts.max_horizon = horizon_cap;
    }
    return opts;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"hypertrace: hypertrace-logic toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool pretty = false;
  app.add_flag("--pretty", pretty, "multi-line JSON output");

  AutomataLimits limits = limits_from_env();

  std::string file, file2;
  std::string dialect = "hyper";
  auto* cmd_parse = app.add_subcommand("parse", "parse and render a formula");
  cmd_parse->add_option("file", file)->required();
  cmd_parse->add_option("--dialect", dialect)
      ->check(CLI::IsMember({"hyper", "s1s", "ltl", "hqptl"}));

  std::string form = "nnf";
  auto* cmd_norm = app.add_subcommand("normalize", "normal forms");
  cmd_norm->add_option("file", file)->required();
  cmd_norm->add_option("--form", form)
      ->required()
      ->check(CLI::IsMember({"nnf", "prenex"}));

  auto* cmd_classify =
      app.add_subcommand("classify", "decidability class of the prefix");
  cmd_classify->add_option("file", file)->required();

  std::string pass;
  auto* cmd_transform = app.add_subcommand("transform", "formula transforms");
  cmd_transform->add_option("file", file)->required();
  cmd_transform->add_option("--pass", pass)
      ->required()
      ->check(CLI::IsMember({"flatten", "remove-forall", "remove-exists",
                             "to-unconstrained", "relax", "to-s1s", "to-hyper",
                             "tr-h"}));

  int state_cap = 0;
  auto* cmd_sat = app.add_subcommand("sat", "satisfiability");
  cmd_sat->add_option("file", file)->required();
  cmd_sat->add_option("--state-cap", state_cap);

  EvalFlags eflags;
  auto* cmd_check = app.add_subcommand("check", "model check");
  cmd_check->add_option("formula", file)->required();
  cmd_check->add_option("traces", file2)->required();
  cmd_check->add_option("--mode", eflags.mode)
      ->check(CLI::IsMember({"bounded", "exact"}));
  cmd_check->add_option("--horizon-cap", eflags.horizon_cap);
  cmd_check->add_option("--universe-prefix", eflags.universe_prefix);
  cmd_check->add_option("--universe-period", eflags.universe_period);

  auto* cmd_encode = app.add_subcommand("encode-minsky", "machine to formula");
  cmd_encode->add_option("file", file)->required();

  uint64_t counter_cap = 100, step_cap = 10000;
  auto* cmd_mrun = app.add_subcommand("minsky-run", "bounded lasso search");
  cmd_mrun->add_option("file", file)->required();
  cmd_mrun->add_option("--counter-cap", counter_cap);
  cmd_mrun->add_option("--step-cap", step_cap);

  bool dot = false;
  auto* cmd_auto = app.add_subcommand("automaton", "S1S to automaton");
  cmd_auto->add_option("file", file)->required();
  cmd_auto->add_flag("--dot", dot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (cmd_parse->parsed()) {
    std::string text = slurp(file);
    if (dialect == "hyper") {
      ParsedHyper r = parse_hyper(text);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << render(r.formula) << "\n";
    } else if (dialect == "s1s") {
      std::cout << render(parse_s1s(text).formula) << "\n";
    } else if (dialect == "ltl") {
      std::cout << render(parse_ltl(text).formula) << "\n";
    } else {
      std::cout << render(parse_hqptl(text).formula) << "\n";
    }
    return 0;
  }
  if (cmd_norm->parsed()) {
    ParsedHyper r = parse_hyper(slurp(file));
    HPtr out = form == "nnf" ? to_nnf(r.formula) : to_prenex(r.formula);
    std::cout << render(out) << "\n";
    return 0;
  }
  if (cmd_classify->parsed()) {
    ParsedHyper r = parse_hyper(slurp(file));
    FragmentClass cls = classify(r.formula);
    json j{{"v", 1}, {"class", to_string(cls.label)}};
    if (!cls.reason.empty()) j["reason"] = cls.reason;
    emit(j, pretty);
    return 0;
  }
  if (cmd_transform->parsed()) {
    std::string text = slurp(file);
    if (pass == "to-hyper") {
      ToHyperResult r = to_hyper(parse_s1s(text).formula);
      std::cout << render(r.formula) << "\n";
      return 0;
    }
    if (pass == "tr-h") {
      HPtr out = tr_hqptl_to_hyper(parse_hqptl(text).formula);
      std::cout << render(out) << "\n";
      return 0;
    }
    ParsedHyper r = parse_hyper(text);
    if (pass == "flatten") {
      std::cout << render(flatten(r.formula, r.alphabet, {})) << "\n";
    } else if (pass == "to-s1s") {
      std::cout << render(to_s1s(r.formula, r.alphabet).formula) << "\n";
    } else {
      HPtr p = to_prenex(r.formula);
      HPtr out;
      if (pass == "remove-forall") out = remove_forall(p);
      else if (pass == "remove-exists") out = remove_exists_hats(p);
      else if (pass == "to-unconstrained") out = to_unconstrained(p);
      else out = relax_existentials(p);
      std::cout << render(out) << "\n";
    }
    return 0;
  }
  if (cmd_sat->parsed()) {
    if (cmd_sat->count("--state-cap")) {
      limits.rank_input_cap = state_cap;
      limits.macro_budget = static_cast<size_t>(state_cap) * 20000;
    }
    ParsedHyper r = parse_hyper(slurp(file));
    SatResult res = check_sat(r.formula, limits);
    json j{{"v", 1}};
    switch (res.verdict) {
      case SatResult::Verdict::Sat:
        j["verdict"] = "sat";
        j["witness"] = render_trace_set(res.witness);
        emit(j, pretty);
        return 0;
      case SatResult::Verdict::Unsat:
        j["verdict"] = "unsat";
        emit(j, pretty);
        return 1;
      case SatResult::Verdict::Unknown:
        j["verdict"] = "unknown";
        j["reason"] = res.reason;
        emit(j, pretty);
        return 2;
    }
  }
  if (cmd_check->parsed()) {
    ParsedHyper r = parse_hyper(slurp(file));
    TraceSet model = parse_trace_set(slurp(file2));
    bool verdict;
    if (eflags.mode == "exact") {
      verdict = model_check(model, r.formula, limits);
    } else {
      EvalOptions opts = eflags.options(limits);
      verdict = eval_hyper(model, {}, r.formula, opts);
    }
    emit(json{{"v", 1}, {"verdict", verdict}}, pretty);
    return verdict ? 0 : 1;
  }
  if (cmd_encode->parsed()) {
    MinskyMachine m = parse_machine(slurp(file));
    std::cout << render(encode(m)) << "\n";
    return 0;
  }
  if (cmd_mrun->parsed()) {
    MinskyMachine m = parse_machine(slurp(file));
    auto l = find_lasso(m, counter_cap, step_cap);
    json j{{"v", 1}};
    if (!l) {
      j["result"] = "inconclusive";
    } else {
      j["result"] = "lasso";
      auto render_cfg = [](const Configuration& c) {
        return json{{"state", c.state}, {"c1", c.c1}, {"c2", c.c2}};
      };
      json stem = json::array(), cycle = json::array();
      for (const auto& c : l->stem) stem.push_back(render_cfg(c));
      for (const auto& c : l->cycle) cycle.push_back(render_cfg(c));
      j["stem"] = stem;
      j["cycle"] = cycle;
    }
    emit(j, pretty);
    return 0;
  }
  if (cmd_auto->parsed()) {
    ParsedS1S r = parse_s1s(slurp(file));
    NBW a = from_s1s(r.formula, limits);
    if (dot)
      std::cout << to_dot(a);
    else
      std::cout << "states: " << a.n << ", tracks: " << a.tracks.size()
                << "\n";
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const SortError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitResource;
  }
}
