#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wstl/data.hpp"
#include "wstl/encode.hpp"
#include "wstl/eval.hpp"
#include "wstl/formula.hpp"
#include "wstl/pruning.hpp"
#include "wstl/rct.hpp"
#include "wstl/solve.hpp"

using nlohmann::json;
using namespace wstl;

namespace {

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, end);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return text;
}

bool has_whole_interval(const FormulaNode& f) {
  if (is_temporal(f.kind) && f.interval.whole) return true;
  for (const auto& c : f.children)
    if (has_whole_interval(*c)) return true;
  return false;
}

/// parse -> (resolve when whole-signal operators are present) -> PNF.
FormulaPtr prepare_formula(const FormulaPtr& raw, const SignalStore& store) {
  FormulaPtr f = raw;
  if (has_whole_interval(*raw)) {
    if (store.empty()) throw DataError("no signals to resolve intervals with");
    Eigen::Index len = store.begin()->second.length();
    for (const auto& [id, sig] : store)
      if (sig.length() != len)
        throw DataError(
            "whole-signal operators need uniform signal lengths; '" + id +
            "' differs");
    f = resolve_intervals(f, static_cast<int>(len));
  }
  return to_pnf(f);
}

Valuation load_valuation(const std::string& path, const ParameterTable& table) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  json weights = doc.contains("weights") ? doc["weights"] : doc;
  Valuation v;
  for (const auto& p : table.params()) {
    double w = 1.0;
    if (weights.contains(p.id)) w = weights[p.id].get<double>();
    if (!(w > 0.0)) throw DataError("weight for " + p.id + " must be > 0");
    v.set(p.id, w);
  }
  return v;
}

void write_valuation(const std::string& path, const Valuation& v,
                     double objective, const std::string& status) {
  json weights = json::object();
  for (const auto& [id, w] : v.values()) weights[id] = w;
  json doc;
  doc["weights"] = weights;
  doc["objective"] = objective;
  doc["status"] = status;
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << doc.dump(2) << "\n";
}

// -- tree dump (rob --tree, prune) ------------------------------------------

std::string node_label(const RctNode& n) {
  if (n.role == RctRole::UntilOffset)
    return "until-offset " + std::to_string(n.offset);
  if (n.role == RctRole::UntilLeftWindow)
    return "left-window [" + std::to_string(n.time) + "," +
           std::to_string(n.time + n.offset) + ")";
  const FormulaNode& f = *n.source;
  switch (f.kind) {
    case Kind::True: return "true";
    case Kind::Pred: return print_formula(f);
    case Kind::And: return "and";
    case Kind::Or: return "or";
    case Kind::Eventually: return "F";
    case Kind::Always: return "G";
    case Kind::Until: return "U";
    default: return "?";
  }
}

void dump_tree(std::ostream& os, const RctNode& n, int depth,
               const std::optional<ParamId>& param) {
  os << std::string(2 * depth, ' ') << node_label(n) << " @" << n.time;
  if (n.cached) os << " = " << fmt(*n.cached);
  if (param) os << "   [" << *param << "]";
  os << "\n";
  for (const auto& e : n.edges) dump_tree(os, *e.child, depth + 1, e.param);
}

// -- shared command state ----------------------------------------------------

struct CommonOpts {
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 0;
};

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const MissingChannelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted STL preference learning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts common;
  app.add_option("--output", common.output, "output artifact path");
  app.add_option("--format", common.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", common.seed, "random seed");

  // ---- parse ----
  std::string parse_path, parse_text;
  bool parse_pnf = false;
  auto* cmd_parse = app.add_subcommand("parse", "parse and echo a formula");
  cmd_parse->add_option("formula", parse_path, "formula file");
  cmd_parse->add_option("--text", parse_text, "inline formula text");
  cmd_parse->add_flag("--pnf", parse_pnf, "print the positive normal form");

  // ---- rob ----
  std::string rob_formula, rob_signals, rob_id, rob_weights;
  bool rob_tree = false;
  int rob_t = 0;
  auto* cmd_rob = app.add_subcommand("rob", "robustness of a signal");
  cmd_rob->add_option("--formula", rob_formula)->required();
  cmd_rob->add_option("--signals", rob_signals, "signal CSV or manifest")
      ->required();
  cmd_rob->add_option("--id", rob_id, "signal id within a manifest");
  cmd_rob->add_option("--weights", rob_weights, "valuation JSON");
  cmd_rob->add_option("-t,--time", rob_t, "evaluation instant");
  cmd_rob->add_flag("--tree", rob_tree, "dump the computation tree");

  // ---- prune ----
  std::string prune_formula, prune_signals, prune_id;
  auto* cmd_prune = app.add_subcommand("prune", "structural pruning report");
  cmd_prune->add_option("--formula", prune_formula)->required();
  cmd_prune->add_option("--signals", prune_signals)->required();
  cmd_prune->add_option("--id", prune_id);

  // ---- learn ----
  std::string learn_formula, learn_signals, learn_feedback, learn_mode;
  std::string learn_solver = "internal", learn_import;
  bool learn_normalize = false;
  long learn_samples = 10000;
  double learn_time_limit = 3600.0, learn_vbound = 3.0;
  auto* cmd_learn = app.add_subcommand("learn", "learn weight valuations");
  cmd_learn->add_option("--formula", learn_formula)->required();
  cmd_learn->add_option("--signals", learn_signals)->required();
  cmd_learn->add_option("--feedback", learn_feedback)->required();
  cmd_learn->add_option("--mode", learn_mode, "preferences|ranking|demos")
      ->required();
  cmd_learn->add_option("--solver", learn_solver, "internal or lp-export")
      ->check(CLI::IsMember({"internal", "lp-export"}));
  cmd_learn->add_option("--samples", learn_samples,
                        "warm-start samples (0 disables)");
  cmd_learn->add_option("--time-limit", learn_time_limit, "seconds");
  cmd_learn->add_option("--v-bound", learn_vbound, "log-weight bound");
  cmd_learn->add_option("--import-result", learn_import,
                        "result file from an external solver");
  cmd_learn->add_flag("--normalize", learn_normalize,
                      "min-max normalize signals first");

  // ---- eval ----
  std::string eval_formula, eval_signals, eval_feedback, eval_mode;
  std::string eval_weights, eval_sweep;
  bool eval_normalize = false;
  long eval_rs_trials = 0, eval_rs_samples = 1000;
  auto* cmd_eval = app.add_subcommand("eval", "score a learned valuation");
  cmd_eval->add_option("--formula", eval_formula)->required();
  cmd_eval->add_option("--signals", eval_signals)->required();
  cmd_eval->add_option("--feedback", eval_feedback)->required();
  cmd_eval->add_option("--mode", eval_mode)->required();
  cmd_eval->add_option("--weights", eval_weights)->required();
  cmd_eval->add_option("--prefix-sweep", eval_sweep,
                       "write the accuracy-vs-K CSV here");
  cmd_eval->add_option("--rs-trials", eval_rs_trials,
                       "random-sampling baseline repetitions");
  cmd_eval->add_option("--samples", eval_rs_samples, "samples per RS trial");
  cmd_eval->add_flag("--normalize", eval_normalize);

  // ---- f1-derive ----
  std::string f1_input, f1_output;
  double f1_fuel = 1.5;
  bool f1_normalize = false;
  std::vector<std::string> f1_skip = {"b_sc"};
  auto* cmd_f1 = app.add_subcommand(
      "f1-derive", "derive fuel-corrected lap times from a lap CSV");
  cmd_f1->add_option("--input", f1_input)->required();
  cmd_f1->add_option("--fuel-per-lap", f1_fuel, "kg of fuel burned per lap");
  cmd_f1->add_flag("--normalize", f1_normalize, "min-max normalize channels");
  cmd_f1->add_option("--skip-normalize", f1_skip,
                     "channels to leave unscaled");

  CLI11_PARSE(app, argc, argv);

  if (cmd_parse->parsed()) {
    return guarded([&] {
      std::string text =
          parse_text.empty() ? read_file(parse_path) : parse_text;
      FormulaPtr f = parse_formula(text);
      if (parse_pnf) f = to_pnf(f);
      std::string printed = print_formula(*f) + "\n";
      write_text(common.output, printed);
    });
  }

  if (cmd_rob->parsed()) {
    return guarded([&] {
      SignalStore store = load_signals(rob_signals);
      const Signal& sig = rob_id.empty() ? store.begin()->second
                                         : [&]() -> const Signal& {
        auto it = store.find(rob_id);
        if (it == store.end()) throw DataError("unknown signal id " + rob_id);
        return it->second;
      }();
      FormulaPtr f = prepare_formula(parse_formula(read_file(rob_formula)),
                                     store);
      ParameterTable table = collect_parameters(f);
      auto rct =
          build_rct(f, table, rob_t, static_cast<int>(sig.length()));
      double rho = eval_robustness(*rct, sig);
      std::cout << "rho = " << fmt(rho) << "\n";
      if (!rob_weights.empty()) {
        Valuation v = load_valuation(rob_weights, table);
        double r = eval_weighted_robustness(*rct, sig, v);
        std::cout << "r = " << fmt(r) << "\n";
      }
      if (rob_tree) dump_tree(std::cout, *rct, 0, std::nullopt);
    });
  }

  if (cmd_prune->parsed()) {
    return guarded([&] {
      SignalStore store = load_signals(prune_signals);
      const Signal& sig = prune_id.empty() ? store.begin()->second
                                           : store.at(prune_id);
      FormulaPtr f = prepare_formula(parse_formula(read_file(prune_formula)),
                                     store);
      ParameterTable table = collect_parameters(f);
      auto rct = build_rct(f, table, 0, static_cast<int>(sig.length()));
      eval_robustness(*rct, sig);
      std::size_t before = rct->node_count();
      PrunedRct pruned = prune(*rct, sig);
      std::size_t after = pruned.root->node_count();
      std::cout << "root sign = " << pruned.root_sign << "\n";
      std::cout << "nodes kept = " << after << ", deleted = "
                << before - after << "\n";
      std::cout << "active parameters = " << pruned.active_params.size()
                << " of " << table.size() << "\n";
      dump_tree(std::cout, *pruned.root, 0, std::nullopt);
    });
  }

  if (cmd_learn->parsed()) {
    return guarded([&] {
      auto t0 = std::chrono::steady_clock::now();
      SignalStore store = load_signals(learn_signals);
      if (learn_normalize)
        min_max_normalize(store, load_signal_groups(learn_signals));
      FeedbackMode fmode = parse_mode(learn_mode);
      Feedback fb = load_feedback(learn_feedback, fmode, store);

      LearningProblem problem;
      problem.mode = mode_of(fmode);
      problem.formula =
          prepare_formula(parse_formula(read_file(learn_formula)), store);
      problem.table = collect_parameters(problem.formula);
      problem.signals = &store;
      problem.pairs = fb.pairs;
      problem.ranking = fb.ranking;
      problem.demos = fb.demos;

      EncodeOptions eopts;
      eopts.v_bound = learn_vbound;
      EncodedProblem encoded = build_problem(problem, eopts);

      std::size_t nodes_before = 0, nodes_after = 0;
      for (const auto& s : encoded.signals) {
        nodes_before += s.nodes_before;
        nodes_after += s.nodes_after;
      }
      long decisions = 0;
      for (const auto& p : encoded.pairs)
        if (p.kind == PairOutcome::Kind::Decision) ++decisions;

      std::cout << "signals: " << encoded.signals.size()
                << ", tree nodes " << nodes_before << " -> " << nodes_after
                << " after pruning\n";
      std::cout << "pairs: " << encoded.pairs.size() << " (" << decisions
                << " decision, " << encoded.constant_satisfied
                << " constant-satisfied, " << encoded.constant_violated
                << " constant-violated)\n";
      std::cout << "model: " << encoded.model.num_vars() << " vars ("
                << encoded.model.num_binaries() << " binary), "
                << encoded.model.constraints().size() << " constraints\n";
      if (problem.mode == Mode::Demonstrations)
        std::cout << "note: demonstration objective is the log-domain sum\n";

      std::string out_path =
          common.output.empty() ? "valuation.json" : common.output;

      if (learn_solver == "lp-export") {
        std::string lp_path = out_path;
        if (lp_path == "valuation.json") lp_path = "model.lp";
        export_lp(encoded.model, lp_path);
        std::cout << "wrote " << lp_path << "\n";
        if (learn_import.empty()) return;
        Solution sol = import_result(encoded.model, learn_import);
        Valuation v =
            extract_valuation(sol, encoded.param_vars, problem.table);
        write_valuation(lp_path + ".valuation.json", v, sol.objective,
                        status_name(sol.status));
        std::cout << "objective = " << fmt(sol.objective) << "\n";
        return;
      }

      SolveOptions sopts;
      sopts.time_limit = learn_time_limit;
      double rs_best = -kInf;
      if (learn_samples > 0) {
        SamplerConfig sc;
        sc.samples = learn_samples;
        sc.seed = common.seed;
        sc.v_min = -learn_vbound;
        sc.v_max = learn_vbound;
        auto [rs_val, rs_obj] = random_search(problem, sc);
        rs_best = rs_obj;
        sopts.warm_start = warm_start_from(encoded, rs_val);
        std::cout << "warm start: direct objective " << fmt(rs_obj)
                  << ", model objective "
                  << fmt(model_objective(encoded.model, *sopts.warm_start))
                  << "\n";
      }
      sopts.heuristic = make_rounding_heuristic(encoded);

      Solution sol = solve_internal(encoded.model, sopts);
      if (sol.status == SolveStatus::Infeasible ||
          sol.status == SolveStatus::Unbounded)
        throw std::runtime_error("solver returned " +
                                 status_name(sol.status));

      Valuation v = extract_valuation(sol, encoded.param_vars, problem.table);
      double recount = true_objective(problem, v);
      double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();

      write_valuation(out_path, v, sol.objective, status_name(sol.status));
      std::cout << "status = " << status_name(sol.status)
                << ", objective = " << fmt(sol.objective)
                << ", recounted = " << fmt(recount) << "\n";
      if (rs_best > -kInf)
        std::cout << "rs best = " << fmt(rs_best) << "\n";
      std::cout << "nodes explored = " << sol.nodes_explored
                << ", wall time = " << fmt(wall) << " s\n";
      std::cout << "wrote " << out_path << "\n";
    });
  }

  if (cmd_eval->parsed()) {
    return guarded([&] {
      SignalStore store = load_signals(eval_signals);
      if (eval_normalize)
        min_max_normalize(store, load_signal_groups(eval_signals));
      FeedbackMode fmode = parse_mode(eval_mode);
      Feedback fb = load_feedback(eval_feedback, fmode, store);
      FormulaPtr f =
          prepare_formula(parse_formula(read_file(eval_formula)), store);
      ParameterTable table = collect_parameters(f);
      Valuation v = load_valuation(eval_weights, table);

      json metrics;
      if (fmode == FeedbackMode::Preferences) {
        EvalReport rep = pairwise_accuracy(v, f, table, store, fb.pairs);
        metrics["concordant"] = rep.concordant;
        metrics["discordant"] = rep.discordant;
        metrics["constant_pairs"] = rep.constant_pairs;
        metrics["accuracy"] = rep.accuracy;
      } else if (fmode == FeedbackMode::Ranking) {
        EvalReport rep = kendall_accuracy(v, f, table, store, fb.ranking);
        metrics["concordant"] = rep.concordant;
        metrics["discordant"] = rep.discordant;
        metrics["constant_pairs"] = rep.constant_pairs;
        metrics["accuracy"] = rep.accuracy;
        metrics["kendall_tau_distance"] = rep.kendall_tau_distance;
      } else {
        double sum = 0.0;
        for (const auto& id : fb.demos.demos)
          sum += weighted_robustness(*f, table, store.at(id), 0, v);
        metrics["demo_objective"] = sum;
      }

      if (eval_rs_trials > 0) {
        LearningProblem problem;
        problem.mode = mode_of(fmode);
        problem.formula = f;
        problem.table = table;
        problem.signals = &store;
        problem.pairs = fb.pairs;
        problem.ranking = fb.ranking;
        problem.demos = fb.demos;
        long total = static_cast<long>(problem.effective_pairs().size());
        std::vector<double> acc;
        for (long trial = 0; trial < eval_rs_trials; ++trial) {
          SamplerConfig sc;
          sc.samples = eval_rs_samples;
          sc.seed = common.seed + static_cast<std::uint64_t>(trial);
          auto [val, obj] = random_search(problem, sc);
          acc.push_back(total > 0 ? obj / total : obj);
        }
        double mean = 0.0;
        for (double a : acc) mean += a;
        mean /= acc.size();
        double var = 0.0;
        for (double a : acc) var += (a - mean) * (a - mean);
        double stddev = acc.size() > 1 ? std::sqrt(var / (acc.size() - 1)) : 0.0;
        metrics["rs_mean_accuracy"] = mean;
        metrics["rs_std_accuracy"] = stddev;
        metrics["rs_trials"] = eval_rs_trials;
        metrics["rs_samples"] = eval_rs_samples;
      }

      if (!eval_sweep.empty()) {
        if (fmode != FeedbackMode::Ranking)
          throw DataError("--prefix-sweep needs ranking feedback");
        auto curve = prefix_sweep(v, f, store, fb.ranking);
        std::string csv = "K,accuracy\n";
        for (const auto& pt : curve)
          csv += std::to_string(pt.k) + "," + fmt(pt.accuracy) + "\n";
        write_text(eval_sweep, csv);
      }

      std::string rendered;
      if (common.format == "csv") {
        for (const auto& [key, value] : metrics.items())
          rendered += key + "," + value.dump() + "\n";
      } else {
        rendered = metrics.dump(2) + "\n";
      }
      write_text(common.output, rendered);
    });
  }

  if (cmd_f1->parsed()) {
    return guarded([&] {
      std::vector<LapRecord> laps = load_lap_records(f1_input);
      SignalStore store = load_signals(f1_input);
      Signal& sig = store.begin()->second;

      Eigen::VectorXd tbar(static_cast<Eigen::Index>(laps.size()));
      for (std::size_t i = 0; i < laps.size(); ++i)
        tbar[static_cast<Eigen::Index>(i)] =
            fuel_corrected_lap_time(laps[i], f1_fuel);
      sig.add_channel("tbar_lap", tbar);

      if (f1_normalize) {
        Signal scaled;
        SignalStore one;
        Signal tmp;
        for (const auto& [ch, vals] : sig.channels()) {
          bool skip = std::find(f1_skip.begin(), f1_skip.end(), ch) !=
                      f1_skip.end();
          if (!skip) tmp.add_channel(ch, vals);
        }
        one["x"] = tmp;
        min_max_normalize(one);
        for (const auto& [ch, vals] : sig.channels()) {
          bool skip = std::find(f1_skip.begin(), f1_skip.end(), ch) !=
                      f1_skip.end();
          scaled.add_channel(ch, skip ? vals : one["x"].channel(ch));
        }
        sig = scaled;
      }

      std::string csv;
      bool first = true;
      for (const auto& [ch, vals] : sig.channels()) {
        csv += (first ? "" : ",") + ch;
        first = false;
      }
      csv += "\n";
      for (Eigen::Index t = 0; t < sig.length(); ++t) {
        first = true;
        for (const auto& [ch, vals] : sig.channels()) {
          csv += (first ? "" : ",") + fmt(vals[t]);
          first = false;
        }
        csv += "\n";
      }
      write_text(common.output, csv);
    });
  }

  return 0;
}
