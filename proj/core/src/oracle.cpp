#include <taintflow/oracle.h>

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

namespace taintflow {

std::string ForwardFact::to_string() const {
  if (kind == Kind::Zero) {
    return "0";
  }
  std::string out = base.str();
  for (Symbol f : fields) {
    out += "." + f.str();
  }
  if (kind == Kind::Star) {
    out += ".*(" + std::to_string(bound) + ")";
  }
  return out + "@" + std::to_string(source);
}

namespace {

using Facts = std::vector<ForwardFact>;
using FieldList = std::vector<Symbol>;

bool starts_with(const FieldList& fields, const FieldList& prefix) {
  return prefix.size() <= fields.size() &&
      std::equal(prefix.begin(), prefix.end(), fields.begin());
}

FieldList concat(const FieldList& a, const FieldList& b) {
  FieldList out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

ForwardFact rebased(const ForwardFact& d, Symbol base) {
  ForwardFact out = d;
  out.base = base;
  return out;
}

/// Forward transfer functions for one label.
class Transfer {
 public:
  Transfer(const Program& program, const CallGraph& callgraph,
           const TaintRoles& roles, Symbol label,
           const OracleOptions& options)
      : program_(program),
        callgraph_(callgraph),
        roles_(roles),
        label_(label),
        k_(options.k.k),
        model_(options.external_model) {}

  CallRole role(const Statement& call) const {
    return roles_.role(call, label_);
  }

  const std::vector<MethodId>& callees(const Statement& call) const {
    return *callgraph_.callees(call.id);
  }

  static bool covers_bare(const ForwardFact& d, Symbol var) {
    return d.kind != ForwardFact::Kind::Zero && d.base == var &&
        d.fields.empty();
  }

  Facts normal(const Statement& s, const ForwardFact& d) const {
    if (d.kind == ForwardFact::Kind::Zero) {
      return {d};
    }
    Facts out;
    bool killed = false;
    switch (s.kind) {
      case StmtKind::Alloc:
      case StmtKind::Const:
        killed = d.base == s.result;
        break;
      case StmtKind::Assign:
        killed = d.base == s.result;
        if (d.base == s.value) {
          out.push_back(rebased(d, s.result));
        }
        break;
      case StmtKind::BinOp:
        killed = d.base == s.result;
        if (d.fields.empty() &&
            std::find(s.args.begin(), s.args.end(), d.base) != s.args.end()) {
          path(out, d.source, s.result, {});
        }
        break;
      case StmtKind::Load:
        killed = d.base == s.result;
        load(s, d, out);
        break;
      case StmtKind::Store:
        killed = store(s, d, out);
        break;
      default:
        break;
    }
    if (!killed) {
      out.push_back(d);
    }
    return out;
  }

  Facts call_to_return(const Statement& c, const ForwardFact& d) const {
    const CallRole r = role(c);
    const Symbol x = c.result;
    if (d.kind == ForwardFact::Kind::Zero) {
      Facts out{d};
      if (r == CallRole::Source && !x.empty()) {
        star(out, c.id.value, x, {}, k_);
      }
      return out;
    }
    const bool x_rooted = !x.empty() && d.base == x;
    auto actuals = c.actuals();
    const bool passed =
        std::find(actuals.begin(), actuals.end(), d.base) != actuals.end();
    Facts out;
    switch (r) {
      case CallRole::Source:
      case CallRole::Sanitizer:
        if (!x_rooted) {
          out.push_back(d);
        }
        break;
      case CallRole::External:
        if (!x_rooted) {
          out.push_back(d);
        }
        if (model_ == ExternalModel::TaintThrough && !x.empty() && passed) {
          out.push_back(rebased(d, x));
        }
        break;
      case CallRole::Resolved:
        if (x_rooted) {
          break;
        }
        if (!passed) {
          out.push_back(d);
        } else if (d.fields.empty()) {
          path(out, d.source, d.base, {});
        }
        break;
    }
    return out;
  }

  Facts call_to_start(const Statement& c, const Method& callee,
                      const ForwardFact& d) const {
    if (d.kind == ForwardFact::Kind::Zero) {
      return {d};
    }
    Facts out;
    auto actuals = c.actuals();
    for (std::size_t i = 0; i < actuals.size() && i < callee.params.size();
         ++i) {
      if (actuals[i] == d.base) {
        out.push_back(rebased(d, callee.params[i]));
      }
    }
    return out;
  }

  Facts exit_to_return(const Statement& c, const Method& callee,
                       const Statement& ret, const ForwardFact& d) const {
    Facts out;
    if (d.kind == ForwardFact::Kind::Zero) {
      return out;
    }
    if (!ret.value.empty() && d.base == ret.value && !c.result.empty()) {
      out.push_back(rebased(d, c.result));
    }
    auto idx = callee.param_index(d.base);
    auto actuals = c.actuals();
    if (!idx || *idx >= actuals.size()) {
      return out;
    }
    const Symbol a = actuals[*idx];
    if (!d.fields.empty()) {
      out.push_back(rebased(d, a));
    } else if (d.kind == ForwardFact::Kind::Star) {
      for (Symbol h : program_.field_names()) {
        star(out, d.source, a, {h}, d.bound);
      }
    }
    return out;
  }

  Facts edge(const BasicBlock& to, Symbol pred_label,
             const ForwardFact& d) const {
    if (d.kind == ForwardFact::Kind::Zero) {
      return {d};
    }
    Facts out;
    bool target = false;
    for (std::size_t i = 0; i < to.phi_count(); ++i) {
      const Statement& phi = to.stmts[i];
      target = target || phi.result == d.base;
      for (const auto& in : phi.incoming) {
        if (in.label == pred_label && in.value == d.base) {
          out.push_back(rebased(d, phi.result));
        }
      }
    }
    if (!target) {
      out.push_back(d);
    }
    return out;
  }

 private:
  struct Access {
    Symbol base;
    FieldList fields;
  };

  Access access(Symbol var, Symbol field, MethodId method) const {
    const Method& m = program_.method(method);
    Access a{var, {field}};
    for (std::size_t guard = 0; guard <= m.definitions.size(); ++guard) {
      auto def = m.definitions.find(a.base);
      if (def == m.definitions.end()) {
        break;
      }
      const Statement& s = program_.statement(def->second);
      if (s.kind != StmtKind::Load) {
        break;
      }
      a.fields.insert(a.fields.begin(), s.field);
      a.base = s.object;
    }
    return a;
  }

  void path(Facts& out, std::uint32_t source, Symbol base,
            FieldList fields) const {
    if (static_cast<int>(fields.size()) > k_) {
      return;
    }
    out.push_back(ForwardFact{ForwardFact::Kind::Path, source, base,
                              std::move(fields), 0});
  }

  void star(Facts& out, std::uint32_t source, Symbol base, FieldList fields,
            int bound) const {
    const int len = static_cast<int>(fields.size());
    if (len > bound) {
      return;
    }
    if (len == bound) {
      path(out, source, base, std::move(fields));
      return;
    }
    out.push_back(ForwardFact{ForwardFact::Kind::Star, source, base,
                              std::move(fields), bound});
  }

  void load(const Statement& s, const ForwardFact& d, Facts& out) const {
    Access a = access(s.object, s.field, program_.location(s.id).method);
    if (d.base != a.base) {
      return;
    }
    const int m = static_cast<int>(a.fields.size());
    if (starts_with(d.fields, a.fields)) {
      FieldList rest(d.fields.begin() + m, d.fields.end());
      if (d.kind == ForwardFact::Kind::Path) {
        path(out, d.source, s.result, std::move(rest));
      } else {
        star(out, d.source, s.result, std::move(rest), d.bound - m);
      }
    } else if (d.kind == ForwardFact::Kind::Star &&
               starts_with(a.fields, d.fields) && d.bound >= m) {
      star(out, d.source, s.result, {}, d.bound - m);
    }
  }

  /// Returns whether `d` itself is overwritten.
  bool store(const Statement& s, const ForwardFact& d, Facts& out) const {
    Access a = access(s.object, s.field, program_.location(s.id).method);
    const int m = static_cast<int>(a.fields.size());
    if (d.base == s.value) {
      if (d.kind == ForwardFact::Kind::Path) {
        path(out, d.source, a.base, concat(a.fields, d.fields));
      } else {
        star(out, d.source, a.base, concat(a.fields, d.fields),
             std::min(d.bound + m, k_));
      }
    }
    const bool array =
        std::any_of(a.fields.begin(), a.fields.end(),
                    [&](Symbol f) { return program_.is_array_field(f); });
    if (d.base != a.base || array) {
      return false;
    }
    if (starts_with(d.fields, a.fields)) {
      return true;
    }
    if (d.kind != ForwardFact::Kind::Star ||
        !starts_with(a.fields, d.fields)) {
      return false;
    }
    // Keep every covered path except the overwritten subtree.
    for (std::size_t i = d.fields.size(); i < a.fields.size(); ++i) {
      FieldList prefix(a.fields.begin(), a.fields.begin() + i);
      if (static_cast<int>(i) <= d.bound) {
        path(out, d.source, a.base, prefix);
      }
      for (Symbol h : program_.field_names()) {
        if (h != a.fields[i]) {
          star(out, d.source, a.base, concat(prefix, {h}), d.bound);
        }
      }
    }
    return true;
  }

  const Program& program_;
  const CallGraph& callgraph_;
  const TaintRoles& roles_;
  Symbol label_;
  int k_;
  ExternalModel model_;
};

StmtId first_statement(const Method& method, std::size_t block) {
  const BasicBlock& b = method.blocks[block];
  return b.stmts[b.phi_count()].id;
}

std::map<StmtId, std::vector<std::size_t>> sinks_for(const TaintRoles& roles,
                                                     Symbol label) {
  std::map<StmtId, std::vector<std::size_t>> out;
  for (const auto& q : roles.sink_queries()) {
    if (q.label == label) {
      out[q.stmt].push_back(q.arg);
    }
  }
  return out;
}

class Tabulator {
 public:
  Tabulator(const Program& program, const Transfer& transfer, Symbol label,
            std::map<StmtId, std::vector<std::size_t>> sinks,
            std::set<RawFinding>& findings)
      : program_(program),
        t_(transfer),
        label_(label),
        sinks_(std::move(sinks)),
        findings_(findings) {}

  void run() {
    for (std::uint32_t m = 0; m < program_.methods.size(); ++m) {
      seed(MethodId{m}, ForwardFact::zero());
    }
    drain();
  }

  void seed(MethodId id, const ForwardFact& entry) {
    const Method& method = program_.method(id);
    const std::uint32_t d = intern(entry);
    propagate(d, first_statement(method, method.entry), d);
  }

  /// Facts before the returns of `id` in the context entered with `entry`.
  std::vector<std::pair<StmtId, ForwardFact>> at_returns(
      MethodId id, const ForwardFact& entry) {
    std::vector<std::pair<StmtId, ForwardFact>> out;
    for (const auto& [ret, d] : end_[Context{id.value, intern(entry)}]) {
      out.emplace_back(ret, facts_[d]);
    }
    return out;
  }

  void drain() {
    while (!worklist_.empty()) {
      Edge e = worklist_.front();
      worklist_.pop_front();
      process(e);
    }
  }

 private:
  struct Edge {
    std::uint32_t d1;
    std::uint32_t stmt;
    std::uint32_t d2;
    friend bool operator==(const Edge&, const Edge&) = default;
  };
  struct EdgeHash {
    std::size_t operator()(const Edge& e) const {
      std::uint64_t h = (std::uint64_t{e.d1} << 32) ^ e.d2;
      return std::hash<std::uint64_t>{}(h * 0x9e3779b97f4a7c15ULL ^ e.stmt);
    }
  };
  using Context = std::pair<std::uint32_t, std::uint32_t>; // method, d1

  std::uint32_t intern(const ForwardFact& f) {
    auto [it, fresh] =
        ids_.emplace(f, static_cast<std::uint32_t>(facts_.size()));
    if (fresh) {
      facts_.push_back(f);
    }
    return it->second;
  }

  void propagate(std::uint32_t d1, StmtId stmt, const ForwardFact& fact) {
    propagate(d1, stmt, intern(fact));
  }

  void propagate(std::uint32_t d1, StmtId stmt, std::uint32_t d2) {
    Edge e{d1, stmt.value, d2};
    if (edges_.insert(e).second) {
      worklist_.push_back(e);
    }
  }

  StmtId next(StmtId s) const {
    const auto& loc = program_.location(s);
    return program_.method(loc.method)
        .blocks[loc.block]
        .stmts[loc.index + 1]
        .id;
  }

  void process(const Edge& e) {
    const StmtId sid{e.stmt};
    const Statement& s = program_.statement(sid);
    const auto& loc = program_.location(sid);
    const Method& method = program_.method(loc.method);
    const ForwardFact d = facts_[e.d2];

    if (auto sink = sinks_.find(sid); sink != sinks_.end()) {
      for (std::size_t arg : sink->second) {
        if (Transfer::covers_bare(d, s.args[arg])) {
          findings_.insert(RawFinding{sid, arg, StmtId{d.source}, label_});
        }
      }
    }

    switch (s.kind) {
      case StmtKind::Return: {
        Context ctx{loc.method.value, e.d1};
        end_[ctx].emplace_back(sid, e.d2);
        for (const auto& [caller_d1, call] : incoming_[ctx]) {
          const Statement& c = program_.statement(call);
          for (const auto& f : t_.exit_to_return(c, method, s, d)) {
            propagate(caller_d1, next(call), f);
          }
        }
        return;
      }
      case StmtKind::Goto:
      case StmtKind::If: {
        const BasicBlock& block = method.blocks[loc.block];
        for (std::size_t succ : block.succs) {
          for (const auto& f : t_.edge(method.blocks[succ], block.label, d)) {
            propagate(e.d1, first_statement(method, succ), f);
          }
        }
        return;
      }
      case StmtKind::Call:
      case StmtKind::VCall:
        for (const auto& f : t_.call_to_return(s, d)) {
          propagate(e.d1, next(sid), f);
        }
        if (t_.role(s) == CallRole::Resolved) {
          for (MethodId callee_id : t_.callees(s)) {
            const Method& callee = program_.method(callee_id);
            for (const auto& f : t_.call_to_start(s, callee, d)) {
              const std::uint32_t d3 = intern(f);
              Context ctx{callee_id.value, d3};
              auto& inc = incoming_[ctx];
              std::pair<std::uint32_t, StmtId> link{e.d1, sid};
              if (std::find(inc.begin(), inc.end(), link) == inc.end()) {
                inc.push_back(link);
              }
              propagate(d3, first_statement(callee, callee.entry), d3);
              for (const auto& [ret, d4] : end_[ctx]) {
                const Statement& r = program_.statement(ret);
                for (const auto& g :
                     t_.exit_to_return(s, callee, r, facts_[d4])) {
                  propagate(e.d1, next(sid), g);
                }
              }
            }
          }
        }
        return;
      default:
        for (const auto& f : t_.normal(s, d)) {
          propagate(e.d1, next(sid), f);
        }
        return;
    }
  }

  const Program& program_;
  const Transfer& t_;
  Symbol label_;
  std::map<StmtId, std::vector<std::size_t>> sinks_;
  std::set<RawFinding>& findings_;

  std::map<ForwardFact, std::uint32_t> ids_;
  std::vector<ForwardFact> facts_;
  std::unordered_set<Edge, EdgeHash> edges_;
  std::deque<Edge> worklist_;
  std::map<Context, std::vector<std::pair<StmtId, std::uint32_t>>> end_;
  std::map<Context, std::vector<std::pair<std::uint32_t, StmtId>>> incoming_;
};

struct TooManyPaths {};

class Enumerator {
 public:
  using FactSet = std::set<ForwardFact>;
  using Exit = std::function<void(const Statement&, const FactSet&)>;

  Enumerator(const Program& program, const Transfer& transfer, Symbol label,
             std::map<StmtId, std::vector<std::size_t>> sinks,
             std::set<RawFinding>& findings, std::size_t max_steps)
      : program_(program),
        t_(transfer),
        label_(label),
        sinks_(std::move(sinks)),
        findings_(findings),
        max_steps_(max_steps) {}

  void run() {
    for (std::uint32_t m = 0; m < program_.methods.size(); ++m) {
      run_method(MethodId{m}, {ForwardFact::zero()},
                 [](const Statement&, const FactSet&) {});
    }
  }

 private:
  void run_method(MethodId id, const FactSet& in, const Exit& exit) {
    const Method& m = program_.method(id);
    run_from(m, m.entry, m.blocks[m.entry].phi_count(), in, exit);
  }

  void run_from(const Method& m, std::size_t b, std::size_t idx,
                FactSet facts, const Exit& exit) {
    const BasicBlock& block = m.blocks[b];
    for (std::size_t i = idx; i < block.stmts.size(); ++i) {
      if (++steps_ > max_steps_) {
        throw TooManyPaths{};
      }
      const Statement& s = block.stmts[i];
      check_sinks(s, facts);
      if (s.kind == StmtKind::Return) {
        exit(s, facts);
        return;
      }
      if (s.kind == StmtKind::Goto || s.kind == StmtKind::If) {
        for (std::size_t succ : block.succs) {
          FactSet next;
          for (const auto& d : facts) {
            for (auto& f : t_.edge(m.blocks[succ], block.label, d)) {
              next.insert(std::move(f));
            }
          }
          run_from(m, succ, m.blocks[succ].phi_count(), next, exit);
        }
        return;
      }
      if (s.is_call()) {
        FactSet after;
        for (const auto& d : facts) {
          for (auto& f : t_.call_to_return(s, d)) {
            after.insert(std::move(f));
          }
        }
        if (t_.role(s) != CallRole::Resolved) {
          facts = std::move(after);
          continue;
        }
        for (MethodId callee_id : t_.callees(s)) {
          const Method& callee = program_.method(callee_id);
          FactSet start;
          for (const auto& d : facts) {
            for (auto& f : t_.call_to_start(s, callee, d)) {
              start.insert(std::move(f));
            }
          }
          run_method(callee_id, start,
                     [&](const Statement& ret, const FactSet& at_exit) {
                       FactSet out = after;
                       for (const auto& d : at_exit) {
                         for (auto& f : t_.exit_to_return(s, callee, ret, d)) {
                           out.insert(std::move(f));
                         }
                       }
                       run_from(m, b, i + 1, out, exit);
                     });
        }
        return;
      }
      FactSet next;
      for (const auto& d : facts) {
        for (auto& f : t_.normal(s, d)) {
          next.insert(std::move(f));
        }
      }
      facts = std::move(next);
    }
  }

  void check_sinks(const Statement& s, const FactSet& facts) {
    auto sink = sinks_.find(s.id);
    if (sink == sinks_.end()) {
      return;
    }
    for (std::size_t arg : sink->second) {
      for (const auto& d : facts) {
        if (Transfer::covers_bare(d, s.args[arg])) {
          findings_.insert(RawFinding{s.id, arg, StmtId{d.source}, label_});
        }
      }
    }
  }

  const Program& program_;
  const Transfer& t_;
  Symbol label_;
  std::map<StmtId, std::vector<std::size_t>> sinks_;
  std::set<RawFinding>& findings_;
  std::size_t max_steps_;
  std::size_t steps_ = 0;
};

bool has_cycle(std::size_t nodes,
               const std::function<std::vector<std::size_t>(std::size_t)>&
                   succs) {
  std::vector<int> color(nodes, 0);
  std::function<bool(std::size_t)> visit = [&](std::size_t n) {
    color[n] = 1;
    for (std::size_t s : succs(n)) {
      if (color[s] == 1 || (color[s] == 0 && visit(s))) {
        return true;
      }
    }
    color[n] = 2;
    return false;
  };
  for (std::size_t n = 0; n < nodes; ++n) {
    if (color[n] == 0 && visit(n)) {
      return true;
    }
  }
  return false;
}

} // namespace

std::vector<RawFinding> oracle_findings(const Program& program,
                                        const CallGraph& callgraph,
                                        const TaintRoles& roles,
                                        const OracleOptions& options) {
  std::set<RawFinding> findings;
  for (Symbol label : roles.labels()) {
    Transfer transfer(program, callgraph, roles, label, options);
    Tabulator(program, transfer, label, sinks_for(roles, label), findings)
        .run();
  }
  return {findings.begin(), findings.end()};
}

std::vector<Finding> oracle_analyze(const Program& program,
                                    const CallGraph& callgraph,
                                    const TaintRoles& roles,
                                    const OracleOptions& options) {
  return aggregate_findings(
      oracle_findings(program, callgraph, roles, options));
}

std::vector<ForwardFact> oracle_exit_facts(const Program& program,
                                           const CallGraph& callgraph,
                                           const TaintRoles& roles,
                                           Symbol label,
                                           MethodId method,
                                           const ForwardFact& entry,
                                           const OracleOptions& options) {
  std::set<RawFinding> findings;
  Transfer transfer(program, callgraph, roles, label, options);
  Tabulator tabulator(program, transfer, label, {}, findings);
  tabulator.seed(method, ForwardFact::zero());
  tabulator.seed(method, entry);
  tabulator.drain();
  static const Symbol ret("<ret>");
  const Method& m = program.method(method);
  std::set<ForwardFact> out;
  for (const auto& [ret_id, d] : tabulator.at_returns(method, entry)) {
    if (d.kind == ForwardFact::Kind::Zero) {
      continue;
    }
    const Statement& r = program.statement(ret_id);
    if (!r.value.empty() && d.base == r.value) {
      out.insert(rebased(d, ret));
    }
    if (m.param_index(d.base)) {
      out.insert(d);
    }
  }
  return {out.begin(), out.end()};
}

std::optional<std::vector<RawFinding>> enumerate_findings(
    const Program& program,
    const CallGraph& callgraph,
    const TaintRoles& roles,
    const OracleOptions& options,
    std::size_t max_methods,
    std::size_t max_steps) {
  if (program.methods.size() > max_methods) {
    return std::nullopt;
  }
  for (const auto& m : program.methods) {
    if (has_cycle(m.blocks.size(),
                  [&](std::size_t b) { return m.blocks[b].succs; })) {
      return std::nullopt;
    }
  }
  std::vector<std::vector<std::size_t>> calls(program.methods.size());
  for (const auto& [stmt, targets] : callgraph.edges()) {
    auto caller = program.location(stmt).method.value;
    for (MethodId t : targets) {
      calls[caller].push_back(t.value);
    }
  }
  if (has_cycle(program.methods.size(),
                [&](std::size_t m) { return calls[m]; })) {
    return std::nullopt;
  }
  std::set<RawFinding> findings;
  try {
    for (Symbol label : roles.labels()) {
      Transfer transfer(program, callgraph, roles, label, options);
      Enumerator(program, transfer, label, sinks_for(roles, label), findings,
                 max_steps)
          .run();
    }
  } catch (const TooManyPaths&) {
    return std::nullopt;
  }
  return std::vector<RawFinding>(findings.begin(), findings.end());
}

} // namespace taintflow
