#include <taintflow/solver.h>

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace taintflow {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct Witness {
  enum class Kind { Seed, Intra, Skip, Summary, Unbalanced };
  Kind kind = Kind::Seed;
  std::uint32_t pred = kNone;          // node whose processing created this one
  std::uint32_t callee_origin = kNone; // Summary
  std::uint32_t callee_node = kNone;   // Summary: entry node in the callee
};

struct Node {
  std::uint32_t origin;
  StmtId stmt;
  Fact fact;
  Witness witness;
};

struct Incoming {
  std::uint32_t origin; // caller origin
  std::uint32_t after;  // caller node right after the call
  StmtId call;
};

struct SourceHit {
  StmtId source;
  std::uint64_t sequence;
  bool direct;
  std::uint32_t node;          // node right after `at`
  StmtId at;                   // source call, or the call into the callee
  std::uint32_t callee_origin; // !direct
};

struct Origin {
  enum class Kind { Query, Summary, Unbalanced };
  Kind kind;
  MethodId method;
  Fact exit_fact = Fact::zero(); // Summary

  std::vector<std::pair<Fact, std::uint32_t>> entries; // fact, entry node
  std::unordered_set<Fact> entry_set;
  std::vector<Incoming> incoming;
  std::vector<SourceHit> hits;
  std::unordered_map<std::uint32_t, std::size_t> hit_index;
  bool entry_logged = false;
};

struct NodeKey {
  std::uint32_t origin;
  StmtId stmt;
  Fact fact;

  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& key) const {
    std::size_t h = key.fact.hash();
    h ^= std::hash<std::uint64_t>{}(
             (std::uint64_t{key.origin} << 32) | key.stmt.value) +
        0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct SummaryKey {
  MethodId method;
  Fact exit;

  friend bool operator==(const SummaryKey&, const SummaryKey&) = default;
};

struct SummaryKeyHash {
  std::size_t operator()(const SummaryKey& key) const {
    return key.exit.hash() * 31 + key.method.value;
  }
};

std::string join_facts(const std::vector<Fact>& facts) {
  std::string out = "{";
  for (std::size_t i = 0; i < facts.size(); ++i) {
    out += (i ? ", " : "") + facts[i].to_string();
  }
  return out + "}";
}

} // namespace

class TabulationState {
 public:
  const Program* program = nullptr;
  std::deque<Node> nodes;
  std::deque<Origin> origins;
};

Symbol return_variable() {
  static const Symbol ret("<ret>");
  return ret;
}

std::string render_canonical(Fact fact, const Method& method) {
  if (fact.is_zero()) {
    return "0";
  }
  AccessPath path = fact.path();
  std::string out;
  if (path.base() == return_variable()) {
    out = "<ret>";
  } else if (auto idx = method.param_index(path.base())) {
    if (method.is_instance && *idx == 0) {
      out = "this";
    } else {
      out = "arg" + std::to_string(*idx - (method.is_instance ? 1 : 0));
    }
  } else {
    out = path.base().str();
  }
  for (Symbol field : path.fields()) {
    out += "." + field.str();
  }
  return out;
}

std::string SummaryRecord::render(const Program& program) const {
  const Method& m = program.method(method);
  std::vector<std::string> entries;
  for (Fact fact : entry_facts) {
    entries.push_back(render_canonical(fact, m));
  }
  std::sort(entries.begin(), entries.end());
  std::string out = m.name.str() + ": " + render_canonical(exit_fact, m) +
      " <- {";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out += (i ? ", " : "") + entries[i];
  }
  return out + "}";
}

std::vector<Fact> map_to_callee(const Statement& call, AccessPath caller_fact,
                                const Method& callee,
                                AccessPathFactory& paths) {
  std::vector<Fact> out;
  const Symbol base = caller_fact.base();
  if (!call.result.empty() && call.result == base) {
    out.push_back(Fact(paths.rebase(caller_fact, return_variable())));
  }
  auto actuals = call.actuals();
  for (std::size_t i = 0; i < actuals.size() && i < callee.params.size();
       ++i) {
    if (actuals[i] == base) {
      Fact fact(paths.rebase(caller_fact, callee.params[i]));
      if (std::find(out.begin(), out.end(), fact) == out.end()) {
        out.push_back(fact);
      }
    }
  }
  return out;
}

Fact map_to_caller(const Statement& call, Fact entry_fact,
                   const Method& callee, AccessPathFactory& paths) {
  if (entry_fact.is_zero()) {
    return entry_fact;
  }
  auto idx = callee.param_index(entry_fact.path().base());
  auto actuals = call.actuals();
  if (!idx || *idx >= actuals.size()) {
    throw InvalidSummary("entry fact '" + entry_fact.to_string() + "' of " +
                         callee.name.str() + " is not rooted at a parameter");
  }
  return Fact(paths.rebase(entry_fact.path(), actuals[*idx]));
}

std::vector<Fact> handle_external(const Statement& call, AccessPath fact,
                                  ExternalModel model,
                                  AccessPathFactory& paths, KConfig k) {
  if (call.result.empty() || call.result != fact.base()) {
    return {Fact(fact)};
  }
  std::vector<Fact> out;
  if (model == ExternalModel::Opaque) {
    return out;
  }
  for (Symbol actual : call.actuals()) {
    if (auto path = paths.make(actual, fact.fields(), k)) {
      Fact f(*path);
      if (std::find(out.begin(), out.end(), f) == out.end()) {
        out.push_back(f);
      }
    }
  }
  return out;
}

std::optional<StmtId> single_predecessor(const Program& program,
                                         StmtId stmt) {
  const auto& loc = program.location(stmt);
  const Method& method = program.method(loc.method);
  const BasicBlock& block = method.blocks[loc.block];
  const std::size_t head = block.phi_count();
  if (loc.index > head) {
    return block.stmts[loc.index - 1].id;
  }
  if (loc.block == method.entry || block.preds.size() != 1 || head > 0) {
    return std::nullopt;
  }
  return method.blocks[block.preds.front()].terminator().id;
}

bool is_identity_for(const Program& program, const Statement& stmt,
                     AccessPath fact) {
  const Symbol base = fact.base();
  switch (stmt.kind) {
    case StmtKind::Alloc:
    case StmtKind::Assign:
    case StmtKind::Const:
    case StmtKind::Load:
    case StmtKind::BinOp:
      return stmt.result != base;
    case StmtKind::Store: {
      const Method& method = program.method(program.location(stmt.id).method);
      return reify(stmt.object, stmt.field, program, method).base != base;
    }
    case StmtKind::Goto:
    case StmtKind::If:
      return true;
    case StmtKind::Call:
    case StmtKind::VCall: {
      if (!stmt.result.empty() && stmt.result == base) {
        return false;
      }
      auto actuals = stmt.actuals();
      return std::find(actuals.begin(), actuals.end(), base) == actuals.end();
    }
    case StmtKind::Phi:
    case StmtKind::Return:
      return false;
  }
  return false;
}

StmtId skip_identity_chain(const Program& program, StmtId from,
                           AccessPath fact, std::vector<StmtId>* chain) {
  StmtId cur = from;
  while (auto pred = single_predecessor(program, cur)) {
    if (!is_identity_for(program, program.statement(*pred), fact)) {
      break;
    }
    cur = *pred;
    if (chain) {
      chain->push_back(cur);
    }
  }
  return cur;
}

namespace {

/// One tabulation run. Nodes are (origin, statement, fact) with the fact
/// holding before the statement; each origin is a query seed, a callee
/// summary keyed by its exit fact, or the unbalanced continuation into a
/// caller of the query's method.
class Tabulation {
 public:
  Tabulation(const Program& program, const CallGraph& callgraph,
             const TaintRoles& roles, Symbol label, AccessPathFactory& paths,
             const SolverConfig& config)
      : program_(program),
        callgraph_(callgraph),
        roles_(roles),
        label_(label),
        paths_(paths),
        config_(config),
        state_(std::make_shared<TabulationState>()),
        roles_cache_(program.statement_count(), -1),
        visited_(program.statement_count(), false),
        unbalanced_(program.methods.size(), kNone),
        contexts_(program.methods.size()) {
    state_->program = &program;
  }

  ReachabilityResult run(const Query& query) {
    const auto method = program_.location(query.stmt).method;
    auto origin = new_origin(Origin::Kind::Query, method, Fact::zero());
    log_visit(query.stmt);
    propagate(origin, query.stmt, Fact(query.fact), Witness{});

    while (!worklist_.empty()) {
      if (++stats_.worklist_pops > config_.budget) {
        throw BudgetExceeded("worklist budget of " +
                             std::to_string(config_.budget) +
                             " pops exhausted");
      }
      std::uint32_t n = worklist_.front();
      worklist_.pop_front();
      process(n);
    }
    return finish();
  }

 private:
  std::uint32_t new_origin(Origin::Kind kind, MethodId method, Fact exit) {
    auto& origin = state_->origins.emplace_back();
    origin.kind = kind;
    origin.method = method;
    origin.exit_fact = exit;
    stats_.methods_visited.insert(method);
    if (kind != Origin::Kind::Query) {
      log_event(VisitEvent::Kind::Exit, StmtId{}, method);
    }
    return static_cast<std::uint32_t>(state_->origins.size() - 1);
  }

  void log_event(VisitEvent::Kind kind, StmtId stmt, MethodId method) {
    if (config_.record_visits) {
      visits_.push_back(VisitEvent{kind, stmt, method});
    }
  }

  void log_visit(StmtId stmt) {
    if (!visited_[stmt.value]) {
      visited_[stmt.value] = true;
      log_event(VisitEvent::Kind::Statement, stmt, MethodId{});
    }
  }

  void propagate(std::uint32_t origin, StmtId stmt, Fact fact,
                 Witness witness) {
    ++stats_.edges_materialized;
    NodeKey key{origin, stmt, fact};
    if (index_.count(key)) {
      return;
    }
    auto id = static_cast<std::uint32_t>(state_->nodes.size());
    state_->nodes.push_back(Node{origin, stmt, fact, witness});
    index_.emplace(key, id);
    worklist_.push_back(id);
  }

  CallRole role(const Statement& call) {
    auto& cached = roles_cache_[call.id.value];
    if (cached < 0) {
      cached = static_cast<int>(roles_.role(call, label_));
    }
    return static_cast<CallRole>(cached);
  }

  const FlowContext& context(MethodId id) {
    auto& slot = contexts_[id.value];
    if (!slot) {
      slot.emplace(FlowContext{
          program_, program_.method(id), paths_, config_.k,
          [this](const Statement& s) { return role(s) == CallRole::Source; }});
    }
    return *slot;
  }

  void trace_flow(const Statement& stmt, AccessPath in,
                  const std::vector<Fact>& out, const char* rule) {
    if (!config_.flow_log) {
      return;
    }
    std::ostringstream line;
    line << "flow " << stmt.id.value << " " << label_.str() << " "
         << in.to_string() << " -> " << join_facts(out) << " [" << rule
         << "]";
    config_.flow_log(line.str());
  }

  void process(std::uint32_t n) {
    const Node node = state_->nodes[n];
    const AccessPath ap = node.fact.path();

    if (config_.skip_identity) {
      StmtId furthest = skip_identity_chain(program_, node.stmt, ap);
      if (furthest != node.stmt) {
        propagate(node.origin, furthest, node.fact,
                  Witness{Witness::Kind::Skip, n});
        return;
      }
    }

    const auto& loc = program_.location(node.stmt);
    const Method& method = program_.method(loc.method);
    const BasicBlock& block = method.blocks[loc.block];
    const std::size_t head = block.phi_count();

    if (loc.index > head) {
      apply(node.origin, n, block.stmts[loc.index - 1], ap);
      return;
    }
    if (loc.block == method.entry) {
      reach_entry(node.origin, n, ap);
      return;
    }
    for (std::size_t p : block.preds) {
      const BasicBlock& pred = method.blocks[p];
      AccessPath edge_fact = ap;
      for (std::size_t i = 0; i < head; ++i) {
        ++stats_.flow_invocations;
        auto r = flow_phi(block.stmts[i], ap, pred.label, paths_);
        if (r.applied == FlowCase::Phi) {
          trace_flow(block.stmts[i], ap, r.facts, "phi");
          edge_fact = r.facts.front().path();
          break;
        }
      }
      apply(node.origin, n, pred.terminator(), edge_fact);
    }
  }

  /// Backward transfer across `stmt`; `ap` holds right after it.
  void apply(std::uint32_t origin, std::uint32_t n, const Statement& stmt,
             AccessPath ap) {
    log_visit(stmt.id);
    if (stmt.is_call() && role(stmt) != CallRole::Source) {
      apply_call(origin, n, stmt, ap);
      return;
    }
    ++stats_.flow_invocations;
    auto r = flow(stmt, ap, context(program_.location(stmt.id).method));
    trace_flow(stmt, ap, r.facts, to_string(r.applied));
    if (is_core_case(r.applied)) {
      stats_.max_core_fanout = std::max(stats_.max_core_fanout,
                                        r.facts.size());
    }
    for (Fact f : r.facts) {
      if (f.is_zero()) {
        add_hit(origin, SourceHit{stmt.id, 0, true, n, stmt.id, kNone});
      } else {
        propagate(origin, stmt.id, f, Witness{Witness::Kind::Intra, n});
      }
    }
  }

  void apply_call(std::uint32_t origin, std::uint32_t n,
                  const Statement& call, AccessPath ap) {
    const Symbol base = ap.base();
    switch (role(call)) {
      case CallRole::Source:
        break;
      case CallRole::Sanitizer: {
        ++stats_.flow_invocations;
        auto r = flow_sanitizer(call, ap);
        trace_flow(call, ap, r.facts, to_string(r.applied));
        for (Fact f : r.facts) {
          propagate(origin, call.id, f, Witness{Witness::Kind::Intra, n});
        }
        return;
      }
      case CallRole::External: {
        ++stats_.flow_invocations;
        auto facts = handle_external(call, ap, config_.external_model, paths_,
                                     config_.k);
        trace_flow(call, ap, facts, "external");
        for (Fact f : facts) {
          propagate(origin, call.id, f, Witness{Witness::Kind::Intra, n});
        }
        return;
      }
      case CallRole::Resolved: {
        auto actuals = call.actuals();
        bool returned = !call.result.empty() && call.result == base;
        bool passed = ap.length() > 0 &&
            std::find(actuals.begin(), actuals.end(), base) != actuals.end();
        if (!returned && !passed) {
          propagate(origin, call.id, Fact(ap),
                    Witness{Witness::Kind::Intra, n});
          return;
        }
        for (MethodId callee : *callgraph_.callees(call.id)) {
          const Method& target = program_.method(callee);
          for (Fact exit : map_to_callee(call, ap, target, paths_)) {
            demand(callee, exit, Incoming{origin, n, call.id});
          }
        }
        return;
      }
    }
  }

  void demand(MethodId callee, Fact exit, Incoming inc) {
    SummaryKey key{callee, exit};
    auto found = summaries_.find(key);
    if (found == summaries_.end()) {
      auto id = new_origin(Origin::Kind::Summary, callee, exit);
      summaries_.emplace(key, id);
      state_->origins[id].incoming.push_back(inc);
      seed_summary(id);
      return;
    }
    const std::uint32_t id = found->second;
    state_->origins[id].incoming.push_back(inc);
    for (std::size_t i = 0; i < state_->origins[id].entries.size(); ++i) {
      auto [fact, node] = state_->origins[id].entries[i];
      apply_summary(inc, id, fact, node);
    }
    for (std::size_t i = 0; i < state_->origins[id].hits.size(); ++i) {
      const SourceHit hit = state_->origins[id].hits[i];
      add_hit(inc.origin, SourceHit{hit.source, 0, false, inc.after, inc.call, id});
    }
  }

  void seed_summary(std::uint32_t id) {
    const Origin& origin = state_->origins[id];
    const Method& method = program_.method(origin.method);
    const AccessPath exit = origin.exit_fact.path();
    for (StmtId ret : method.returns) {
      const Statement& stmt = program_.statement(ret);
      log_visit(ret);
      if (exit.base() == return_variable()) {
        if (stmt.value.empty()) {
          continue;
        }
        propagate(id, ret, Fact(paths_.rebase(exit, stmt.value)), Witness{});
      } else {
        propagate(id, ret, origin.exit_fact, Witness{});
      }
    }
  }

  void apply_summary(const Incoming& inc, std::uint32_t callee_origin,
                     Fact entry, std::uint32_t entry_node) {
    const Method& callee = program_.method(
        state_->origins[callee_origin].method);
    Fact caller = map_to_caller(program_.statement(inc.call), entry, callee,
                                paths_);
    propagate(inc.origin, inc.call, caller,
              Witness{Witness::Kind::Summary, inc.after, callee_origin,
                      entry_node});
  }

  void reach_entry(std::uint32_t origin_id, std::uint32_t n, AccessPath ap) {
    Origin& origin = state_->origins[origin_id];
    const Method& method = program_.method(origin.method);
    if (!origin.entry_logged) {
      origin.entry_logged = true;
      log_event(VisitEvent::Kind::Entry, StmtId{}, origin.method);
    }
    auto idx = method.param_index(ap.base());
    if (!idx) {
      return;
    }
    Fact fact(ap);
    if (origin.kind == Origin::Kind::Summary) {
      if (!origin.entry_set.insert(fact).second) {
        return;
      }
      origin.entries.emplace_back(fact, n);
      for (std::size_t i = 0; i < state_->origins[origin_id].incoming.size();
           ++i) {
        apply_summary(state_->origins[origin_id].incoming[i], origin_id, fact,
                      n);
      }
      return;
    }
    const MethodId method_id = origin.method;
    for (const CallSite& site : callgraph_.callers(method_id)) {
      const Statement& call = program_.statement(site.stmt);
      if (role(call) != CallRole::Resolved) {
        continue;
      }
      auto actuals = call.actuals();
      if (*idx >= actuals.size()) {
        continue;
      }
      auto& slot = unbalanced_[site.caller.value];
      if (slot == kNone) {
        slot = new_origin(Origin::Kind::Unbalanced, site.caller,
                          Fact::zero());
      }
      propagate(slot, call.id, Fact(paths_.rebase(ap, actuals[*idx])),
                Witness{Witness::Kind::Unbalanced, n});
    }
  }

  void add_hit(std::uint32_t origin_id, SourceHit hit) {
    Origin& origin = state_->origins[origin_id];
    if (origin.hit_index.count(hit.source.value)) {
      return;
    }
    hit.sequence = next_hit_++;
    origin.hit_index.emplace(hit.source.value, origin.hits.size());
    origin.hits.push_back(hit);
    if (origin.kind != Origin::Kind::Summary) {
      return;
    }
    for (std::size_t i = 0; i < state_->origins[origin_id].incoming.size();
         ++i) {
      const Incoming inc = state_->origins[origin_id].incoming[i];
      add_hit(inc.origin, SourceHit{hit.source, 0, false, inc.after, inc.call,
                        origin_id});
    }
  }

  ReachabilityResult finish() {
    ReachabilityResult result;
    std::set<StmtId> sources;
    for (const Origin& origin : state_->origins) {
      if (origin.kind == Origin::Kind::Summary) {
        SummaryRecord record{origin.method, origin.exit_fact, {}, {}};
        for (const auto& [fact, node] : origin.entries) {
          record.entry_facts.push_back(fact);
        }
        for (const SourceHit& hit : origin.hits) {
          record.sources.insert(hit.source);
        }
        if (!record.sources.empty()) {
          record.entry_facts.push_back(Fact::zero());
        }
        std::sort(record.entry_facts.begin(), record.entry_facts.end());
        result.summaries.push_back(std::move(record));
        continue;
      }
      for (const SourceHit& hit : origin.hits) {
        sources.insert(hit.source);
      }
    }
    std::sort(result.summaries.begin(), result.summaries.end(),
              [&](const SummaryRecord& a, const SummaryRecord& b) {
                auto an = program_.method(a.method).name;
                auto bn = program_.method(b.method).name;
                if (an != bn) {
                  return an < bn;
                }
                return a.exit_fact < b.exit_fact;
              });
    result.sources.assign(sources.begin(), sources.end());
    result.reachable = !result.sources.empty();
    stats_.nodes = state_->nodes.size();
    result.stats = stats_;
    result.visits = std::move(visits_);
    result.state = state_;
    return result;
  }

  const Program& program_;
  const CallGraph& callgraph_;
  const TaintRoles& roles_;
  Symbol label_;
  AccessPathFactory& paths_;
  const SolverConfig& config_;

  std::shared_ptr<TabulationState> state_;
  std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> index_;
  std::unordered_map<SummaryKey, std::uint32_t, SummaryKeyHash> summaries_;
  std::deque<std::uint32_t> worklist_;
  std::vector<int> roles_cache_;
  std::vector<bool> visited_;
  std::vector<std::uint32_t> unbalanced_;
  std::vector<std::optional<FlowContext>> contexts_;
  std::uint64_t next_hit_ = 0;
  SolverStats stats_;
  std::vector<VisitEvent> visits_;
};

} // namespace

BackwardSolver::BackwardSolver(const Program& program,
                               const CallGraph& callgraph,
                               const TaintRoles& roles,
                               Symbol label,
                               AccessPathFactory& paths,
                               SolverConfig config)
    : program_(program),
      callgraph_(callgraph),
      roles_(roles),
      label_(label),
      paths_(paths),
      config_(std::move(config)) {}

ReachabilityResult BackwardSolver::solve(const Query& query) {
  Tabulation tabulation(program_, callgraph_, roles_, label_, paths_,
                        config_);
  return tabulation.run(query);
}

namespace {

class TraceBuilder {
 public:
  explicit TraceBuilder(const TabulationState& state) : state_(state) {}

  /// Steps from the origin's seed down to `hit`'s source, sink side first.
  std::vector<TraceStep> from_hit(const SourceHit& hit, std::size_t depth) {
    guard(depth);
    auto steps = path_to(hit.node, depth);
    if (hit.direct) {
      steps.push_back(TraceStep{hit.at, Fact::zero()});
      return steps;
    }
    const Origin& callee = origin(hit.callee_origin);
    auto found = callee.hit_index.find(hit.source.value);
    if (found == callee.hit_index.end()) {
      throw TraceCorrupt("callee origin lost source hit");
    }
    const SourceHit& inner = callee.hits[found->second];
    if (inner.sequence >= hit.sequence) {
      throw TraceCorrupt("source hit does not precede its propagation");
    }
    auto rest = from_hit(inner, depth + 1);
    steps.insert(steps.end(), rest.begin(), rest.end());
    return steps;
  }

 private:
  /// Steps from the origin's seed to node `n` inclusive.
  std::vector<TraceStep> path_to(std::uint32_t n, std::size_t depth) {
    guard(depth);
    std::vector<TraceStep> reversed;
    std::uint32_t cur = n;
    while (true) {
      const Node& node = at(cur);
      reversed.push_back(TraceStep{node.stmt, node.fact});
      const Witness& w = node.witness;
      if (w.kind == Witness::Kind::Seed) {
        break;
      }
      if (w.pred >= cur) {
        throw TraceCorrupt("witness does not precede node");
      }
      if (w.kind == Witness::Kind::Skip) {
        std::vector<StmtId> chain;
        skip_identity_chain(*state_.program, at(w.pred).stmt,
                            node.fact.path(), &chain);
        auto stop = std::find(chain.begin(), chain.end(), node.stmt);
        if (stop == chain.end()) {
          throw TraceCorrupt("skipped chain no longer reaches its target");
        }
        for (auto it = std::make_reverse_iterator(stop); it != chain.rend();
             ++it) {
          reversed.push_back(TraceStep{*it, node.fact});
        }
      } else if (w.kind == Witness::Kind::Summary) {
        if (w.callee_node >= state_.nodes.size()) {
          throw TraceCorrupt("dangling callee node");
        }
        auto inner = path_to(w.callee_node, depth + 1);
        reversed.insert(reversed.end(), inner.rbegin(), inner.rend());
      }
      cur = w.pred;
    }
    return {reversed.rbegin(), reversed.rend()};
  }

  const Node& at(std::uint32_t n) const {
    if (n >= state_.nodes.size()) {
      throw TraceCorrupt("dangling node reference");
    }
    return state_.nodes[n];
  }

  const Origin& origin(std::uint32_t o) const {
    if (o >= state_.origins.size()) {
      throw TraceCorrupt("dangling origin reference");
    }
    return state_.origins[o];
  }

  void guard(std::size_t depth) const {
    if (depth > state_.nodes.size() + state_.origins.size() + 1) {
      throw TraceCorrupt("trace reconstruction does not terminate");
    }
  }

  const TabulationState& state_;
};

} // namespace

std::vector<TraceStep> build_trace(const ReachabilityResult& result,
                                   StmtId source) {
  if (!result.state) {
    throw std::invalid_argument("result carries no tabulation state");
  }
  const SourceHit* best = nullptr;
  for (const Origin& origin : result.state->origins) {
    if (origin.kind == Origin::Kind::Summary) {
      continue;
    }
    auto found = origin.hit_index.find(source.value);
    if (found == origin.hit_index.end()) {
      continue;
    }
    const SourceHit& hit = origin.hits[found->second];
    if (!best || hit.sequence < best->sequence) {
      best = &hit;
    }
  }
  if (!best) {
    throw std::invalid_argument("source statement " +
                                std::to_string(source.value) +
                                " was not reached");
  }
  return TraceBuilder(*result.state).from_hit(*best, 0);
}

} // namespace taintflow
