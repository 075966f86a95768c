#include "wstl/encode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wstl/rct.hpp"

namespace wstl {

namespace {

/// Leaves and empty Until windows carry constants; everything else folds.
bool value_bearing(const RctNode& n) { return n.is_leaf() || n.edges.empty(); }

RctOp effective_op(RctOp op, int sign) {
  if (sign >= 0) return op;
  return op == RctOp::Min ? RctOp::Max : RctOp::Min;
}

int tree_depth(const RctNode& n) {
  int d = 0;
  for (const auto& e : n.edges) d = std::max(d, tree_depth(*e.child));
  return d + 1;
}

void collect_leaf_logs(const RctNode& n, int sign, double eps_pred,
                       std::map<const RctNode*, double>& out,
                       std::vector<const RctNode*>& inf_leaves) {
  if (value_bearing(n)) {
    double val = n.cached.value();
    if (std::isinf(val)) {
      inf_leaves.push_back(&n);
      return;
    }
    if (sign_of(val) != sign && val != 0.0)
      throw std::logic_error("pruned tree is not sign-uniform");
    double mag = std::max(std::abs(val), eps_pred);
    out[&n] = std::log(mag);
    return;
  }
  for (const auto& e : n.edges)
    collect_leaf_logs(*e.child, sign, eps_pred, out, inf_leaves);
}

}  // namespace

SignedLogTree log_leaf_values(const PrunedRct& pruned, const Signal& sig,
                              const EncodeOptions& opts) {
  (void)sig;
  if (pruned.root_sign == 0)
    throw std::invalid_argument("log transform undefined for zero-sign trees");
  SignedLogTree tree;
  tree.root = pruned.root.get();
  tree.sign = pruned.root_sign;
  tree.depth = tree_depth(*pruned.root);

  std::vector<const RctNode*> inf_leaves;
  collect_leaf_logs(*pruned.root, pruned.root_sign, opts.eps_pred,
                    tree.leaf_log, inf_leaves);

  double max_log = 0.0;
  for (const auto& [node, lg] : tree.leaf_log)
    max_log = std::max(max_log, lg);
  // dominates any competing path even after depth worst-case reweighting
  tree.inf_proxy = max_log + 2.0 * (tree.depth + 1) * opts.v_bound + 1.0;
  for (const RctNode* n : inf_leaves) tree.leaf_log[n] = tree.inf_proxy;
  return tree;
}

double eval_log_domain(const SignedLogTree& tree,
                       const std::map<ParamId, double>& log_weights) {
  auto rec = [&](const auto& self, const RctNode& n) -> double {
    if (value_bearing(n)) return tree.leaf_log.at(&n);
    RctOp op = effective_op(n.op, tree.sign);
    double acc = op == RctOp::Min ? kInf : -kInf;
    for (const auto& e : n.edges) {
      double x = self(self, *e.child);
      if (e.param) x += log_weights.at(*e.param);
      acc = op == RctOp::Min ? std::min(acc, x) : std::max(acc, x);
    }
    return acc;
  };
  return rec(rec, *tree.root);
}

// ---------------------------------------------------------------------------
// tree -> MILP

namespace {

struct BoundedExpr {
  LinExpr value;
  double lo = 0.0, hi = 0.0;
};

class TreeEncoder {
public:
  TreeEncoder(const SignedLogTree& tree, MilpModel& model,
              std::map<ParamId, VarId>& param_vars, const EncodeOptions& opts)
      : tree_(tree), model_(model), param_vars_(param_vars), opts_(opts) {}

  BoundedExpr encode(const RctNode& n) {
    if (value_bearing(n)) {
      double c = tree_.leaf_log.at(&n);
      return {LinExpr(c), c, c};
    }

    std::vector<BoundedExpr> child_exprs;
    child_exprs.reserve(n.edges.size());
    for (const auto& e : n.edges) {
      BoundedExpr ce = encode(*e.child);
      if (e.param) {
        VarId v = log_weight_var(*e.param);
        ce.value.add(v, 1.0);
        ce.lo -= opts_.v_bound;
        ce.hi += opts_.v_bound;
      }
      child_exprs.push_back(std::move(ce));
    }

    RctOp op = effective_op(n.op, tree_.sign);
    double lo, hi;
    if (op == RctOp::Min) {
      lo = kInf;
      hi = kInf;
      for (const auto& ce : child_exprs) {
        lo = std::min(lo, ce.lo);
        hi = std::min(hi, ce.hi);
      }
    } else {
      lo = -kInf;
      hi = -kInf;
      for (const auto& ce : child_exprs) {
        lo = std::max(lo, ce.lo);
        hi = std::max(hi, ce.hi);
      }
    }

    VarId y = model_.add_var(VarKind::Continuous, lo, hi, VarTag::NodeValue);
    node_vars.push_back({&n, y});
    LinExpr yexpr = LinExpr::var(y);

    if (child_exprs.size() == 1) {
      // gadget degenerates: y = e_0
      model_.add_constraint(yexpr - child_exprs[0].value, Sense::EQ, 0.0);
      return {yexpr, lo, hi};
    }

    GadgetSelectors sel;
    sel.node = &n;
    for (std::size_t i = 0; i < child_exprs.size(); ++i) {
      const BoundedExpr& e = child_exprs[i];
      VarId d = model_.add_var(VarKind::Binary, 0, 1, VarTag::Selector);
      sel.deltas.push_back(d);
      if (op == RctOp::Min) {
        // y <= e_i ; y >= e_i - M(1-d_i)
        model_.add_constraint(yexpr - e.value, Sense::LE, 0.0);
        double m = std::max(0.0, e.hi - lo) + 1.0;
        LinExpr c = yexpr - e.value;
        c.add(d, -m);
        model_.add_constraint(std::move(c), Sense::GE, -m);
        max_big_m = std::max(max_big_m, m);
      } else {
        // y >= e_i ; y <= e_i + M(1-d_i)
        model_.add_constraint(yexpr - e.value, Sense::GE, 0.0);
        double m = std::max(0.0, hi - e.lo) + 1.0;
        LinExpr c = yexpr - e.value;
        c.add(d, m);
        model_.add_constraint(std::move(c), Sense::LE, m);
        max_big_m = std::max(max_big_m, m);
      }
    }
    LinExpr pick;
    for (VarId d : sel.deltas) pick.add(d, 1.0);
    model_.add_constraint(std::move(pick), Sense::EQ, 1.0);
    gadgets.push_back(std::move(sel));

    return {yexpr, lo, hi};
  }

  VarId log_weight_var(const ParamId& p) {
    auto it = param_vars_.find(p);
    if (it != param_vars_.end()) return it->second;
    VarId v = model_.add_var(VarKind::Continuous, -opts_.v_bound,
                             opts_.v_bound, VarTag::LogWeight);
    param_vars_.emplace(p, v);
    return v;
  }

  std::vector<NodeEncoding> node_vars;
  std::vector<GadgetSelectors> gadgets;
  double max_big_m = 0.0;

private:
  const SignedLogTree& tree_;
  MilpModel& model_;
  std::map<ParamId, VarId>& param_vars_;
  const EncodeOptions& opts_;
};

}  // namespace

EncodeResult encode_tree(const SignedLogTree& tree, MilpModel& model,
                         std::map<ParamId, VarId>& param_vars,
                         const EncodeOptions& opts) {
  TreeEncoder enc(tree, model, param_vars, opts);
  BoundedExpr root = enc.encode(*tree.root);
  model.big_m_default = std::max(model.big_m_default, enc.max_big_m);
  EncodeResult out;
  out.value = std::move(root.value);
  out.lo = root.lo;
  out.hi = root.hi;
  out.node_vars = std::move(enc.node_vars);
  out.gadgets = std::move(enc.gadgets);
  return out;
}

// ---------------------------------------------------------------------------
// pairs

std::optional<VarId> encode_pair(const RootHandle& first,
                                 const RootHandle& second, int label,
                                 MilpModel& model, const EncodeOptions& opts,
                                 PairOutcome::Kind& kind_out) {
  if (label != 1 && label != -1)
    throw std::invalid_argument("pair label must be +1 or -1");
  const RootHandle& a = label == 1 ? first : second;   // must win
  const RootHandle& b = label == 1 ? second : first;

  // mixed or zero signs: soundness fixes the outcome, no variables
  if (a.sign != b.sign || a.sign == 0) {
    bool satisfied = a.sign > b.sign;  // +1 beats 0 beats -1; ties lose
    kind_out = satisfied ? PairOutcome::Kind::ConstantSatisfied
                         : PairOutcome::Kind::ConstantViolated;
    return std::nullopt;
  }

  // same nonzero sign: z => winner's log value leads by the margin;
  // on the negative side the smaller magnitude wins, so the roles flip
  const RootHandle& hi_side = a.sign > 0 ? a : b;
  const RootHandle& lo_side = a.sign > 0 ? b : a;

  VarId z = model.add_var(VarKind::Binary, 0, 1, VarTag::PairIndicator);
  double m = std::max(0.0, opts.margin + lo_side.hi - hi_side.lo) + 1.0;
  LinExpr c = hi_side.value - lo_side.value;
  c.add(z, -m);
  model.add_constraint(std::move(c), Sense::GE, opts.margin - m);
  kind_out = PairOutcome::Kind::Decision;
  return z;
}

// ---------------------------------------------------------------------------
// learning problems

Mode mode_of(FeedbackMode m) {
  switch (m) {
    case FeedbackMode::Preferences: return Mode::Preferences;
    case FeedbackMode::Ranking: return Mode::Ranking;
    case FeedbackMode::Demonstrations: return Mode::Demonstrations;
  }
  return Mode::Preferences;
}

std::vector<PreferencePair> LearningProblem::effective_pairs() const {
  if (mode == Mode::Ranking) return ranking.expand();
  if (mode == Mode::Preferences) return pairs;
  return {};
}

const Signal& LearningProblem::signal(const std::string& id) const {
  auto it = signals->find(id);
  if (it == signals->end()) throw DataError("unknown signal id: " + id);
  return it->second;
}

double true_objective(const LearningProblem& problem, const Valuation& v) {
  std::map<std::string, double> r;
  auto value = [&](const std::string& id) {
    auto it = r.find(id);
    if (it != r.end()) return it->second;
    double x =
        weighted_robustness(*problem.formula, problem.table,
                            problem.signal(id), 0, v);
    r.emplace(id, x);
    return x;
  };

  if (problem.mode == Mode::Demonstrations) {
    double sum = 0.0;
    for (const auto& id : problem.demos.demos) sum += value(id);
    return sum;
  }
  double count = 0.0;
  for (const auto& p : problem.effective_pairs())
    if (p.label * (value(p.left) - value(p.right)) > 0.0) count += 1.0;
  return count;
}

// ---------------------------------------------------------------------------
// whole-problem assembly

namespace {

struct SignalTree {
  PrunedRct pruned;
  SignedLogTree tree;  // valid when pruned.root_sign != 0
  std::size_t nodes_before = 0;
};

SignalTree make_signal_tree(const LearningProblem& problem, const Signal& sig,
                            const EncodeOptions& opts) {
  auto rct = build_rct(problem.formula, problem.table, 0,
                       static_cast<int>(sig.length()));
  eval_robustness(*rct, sig);
  SignalTree out;
  out.nodes_before = rct->node_count();
  out.pruned = prune(*rct, sig);
  if (out.pruned.root_sign != 0)
    out.tree = log_leaf_values(out.pruned, sig, opts);
  return out;
}

std::vector<std::string> referenced_ids(const LearningProblem& problem) {
  std::vector<std::string> ids;
  auto push = [&ids](const std::string& id) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  };
  if (problem.mode == Mode::Demonstrations) {
    for (const auto& id : problem.demos.demos) push(id);
  } else {
    for (const auto& p : problem.effective_pairs()) {
      push(p.left);
      push(p.right);
    }
  }
  return ids;
}

}  // namespace

EncodedProblem build_problem(const LearningProblem& problem,
                             const EncodeOptions& opts) {
  std::vector<std::string> ids = referenced_ids(problem);
  if (ids.empty()) throw EvalError("empty dataset");

  EncodedProblem out;
  out.mode = problem.mode;
  out.opts = opts;

  for (const auto& id : ids) {
    const Signal& sig = problem.signal(id);
    SignalTree st = make_signal_tree(problem, sig, opts);

    EncodedSignal enc;
    enc.id = id;
    enc.pruned = std::move(st.pruned);
    enc.nodes_before = st.nodes_before;
    enc.nodes_after = enc.pruned.root->node_count();
    enc.root.sign = enc.pruned.root_sign;
    if (enc.root.sign != 0) {
      enc.log_tree = std::move(st.tree);
      enc.log_tree.root = enc.pruned.root.get();
      EncodeResult res =
          encode_tree(enc.log_tree, out.model, out.param_vars, opts);
      enc.root.value = std::move(res.value);
      enc.root.lo = res.lo;
      enc.root.hi = res.hi;
      enc.node_vars = std::move(res.node_vars);
      enc.gadgets = std::move(res.gadgets);
    }
    out.signal_index[id] = out.signals.size();
    out.signals.push_back(std::move(enc));
  }

  if (problem.mode == Mode::Demonstrations) {
    for (const auto& id : problem.demos.demos) {
      const EncodedSignal& s = out.signals[out.signal_index.at(id)];
      if (s.root.sign != 0)
        out.model.objective.add(s.root.value, static_cast<double>(s.root.sign));
    }
    return out;
  }

  for (const auto& p : problem.effective_pairs()) {
    PairOutcome po;
    po.left = out.signal_index.at(p.left);
    po.right = out.signal_index.at(p.right);
    po.label = p.label;
    auto z = encode_pair(out.signals[po.left].root,
                         out.signals[po.right].root, p.label, out.model, opts,
                         po.kind);
    if (z) {
      po.z = *z;
      out.model.objective.add(*z, 1.0);
    } else if (po.kind == PairOutcome::Kind::ConstantSatisfied) {
      ++out.constant_satisfied;
    } else {
      ++out.constant_violated;
    }
    out.pairs.push_back(po);
  }
  out.model.objective.add_constant(
      static_cast<double>(out.constant_satisfied));
  return out;
}

// ---------------------------------------------------------------------------
// integral completion at fixed log-weights

std::vector<double> complete_assignment(const EncodedProblem& encoded,
                                        const std::map<ParamId, double>& logw) {
  std::vector<double> x(encoded.model.num_vars(), 0.0);
  for (const auto& [param, var] : encoded.param_vars) x[var] = logw.at(param);

  std::vector<double> root_values(encoded.signals.size(), 0.0);
  for (std::size_t si = 0; si < encoded.signals.size(); ++si) {
    const EncodedSignal& s = encoded.signals[si];
    if (s.root.sign == 0) continue;

    std::map<const RctNode*, VarId> yvar;
    for (const auto& nv : s.node_vars) yvar[nv.node] = nv.value;
    std::map<const RctNode*, const GadgetSelectors*> gad;
    for (const auto& g : s.gadgets) gad[g.node] = &g;

    auto rec = [&](const auto& self, const RctNode& n) -> double {
      if (value_bearing(n)) return s.log_tree.leaf_log.at(&n);
      RctOp op = effective_op(n.op, s.root.sign);
      std::vector<double> vals;
      vals.reserve(n.edges.size());
      for (const auto& e : n.edges) {
        double cv = self(self, *e.child);
        if (e.param) cv += x[encoded.param_vars.at(*e.param)];
        vals.push_back(cv);
      }
      auto it = op == RctOp::Min ? std::min_element(vals.begin(), vals.end())
                                 : std::max_element(vals.begin(), vals.end());
      double value = *it;
      x[yvar.at(&n)] = value;
      auto g = gad.find(&n);
      if (g != gad.end()) {
        std::size_t pick = static_cast<std::size_t>(it - vals.begin());
        for (std::size_t i = 0; i < g->second->deltas.size(); ++i)
          x[g->second->deltas[i]] = i == pick ? 1.0 : 0.0;
      }
      return value;
    };
    root_values[si] = rec(rec, *s.log_tree.root);
  }

  for (const auto& po : encoded.pairs) {
    if (po.kind != PairOutcome::Kind::Decision) continue;
    std::size_t a = po.label == 1 ? po.left : po.right;
    std::size_t b = po.label == 1 ? po.right : po.left;
    int sign = encoded.signals[a].root.sign;
    double diff = sign > 0 ? root_values[a] - root_values[b]
                           : root_values[b] - root_values[a];
    x[po.z] = diff >= encoded.opts.margin ? 1.0 : 0.0;
  }
  return x;
}

double model_objective(const MilpModel& model, const std::vector<double>& x) {
  double obj = model.objective.constant();
  for (const auto& [v, c] : model.objective.terms()) obj += c * x[v];
  return obj;
}

double surrogate_objective(const LearningProblem& problem,
                           const EncodeOptions& opts, const Valuation& v) {
  EncodedProblem enc = build_problem(problem, opts);
  std::map<ParamId, double> logw;
  for (const auto& [p, var] : enc.param_vars) logw[p] = std::log(v.at(p));
  return model_objective(enc.model, complete_assignment(enc, logw));
}

// ---------------------------------------------------------------------------
// reusable log-domain objective (margin 0)

LogDomainObjective::LogDomainObjective(const LearningProblem& problem,
                                       const EncodeOptions& opts)
    : problem_(problem), opts_(opts) {
  pairs_ = problem.effective_pairs();
  for (const auto& id : referenced_ids(problem)) {
    PerSignal ps;
    SignalTree st = make_signal_tree(problem, problem.signal(id), opts);
    ps.pruned = std::move(st.pruned);
    ps.tree = std::move(st.tree);
    ps.tree.root = ps.pruned.root.get();
    index_[id] = per_signal_.size();
    per_signal_.push_back(std::move(ps));
  }
}

double LogDomainObjective::operator()(const Valuation& v) const {
  std::map<ParamId, double> logw;
  for (const auto& [p, w] : v.values()) logw[p] = std::log(w);

  std::vector<double> value(per_signal_.size(), 0.0);
  std::vector<int> sign(per_signal_.size(), 0);
  for (std::size_t i = 0; i < per_signal_.size(); ++i) {
    sign[i] = per_signal_[i].pruned.root_sign;
    if (sign[i] != 0) value[i] = eval_log_domain(per_signal_[i].tree, logw);
  }

  if (problem_.mode == Mode::Demonstrations) {
    double sum = 0.0;
    for (const auto& id : problem_.demos.demos) {
      std::size_t i = index_.at(id);
      sum += sign[i] * value[i];
    }
    return sum;
  }

  double count = 0.0;
  for (const auto& p : pairs_) {
    std::size_t a = index_.at(p.label == 1 ? p.left : p.right);
    std::size_t b = index_.at(p.label == 1 ? p.right : p.left);
    if (sign[a] != sign[b] || sign[a] == 0) {
      if (sign[a] > sign[b]) count += 1.0;
      continue;
    }
    double diff = sign[a] > 0 ? value[a] - value[b] : value[b] - value[a];
    if (diff > 0.0) count += 1.0;
  }
  return count;
}

}  // namespace wstl
