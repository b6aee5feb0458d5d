#include <taintflow/flow_functions.h>

#include <algorithm>

namespace taintflow {

namespace {

FlowResult identity(AccessPath incoming) {
  return FlowResult{{Fact(incoming)}, FlowCase::Identity};
}

FlowResult kill(FlowCase c) {
  return FlowResult{{}, c};
}

} // namespace

const char* to_string(FlowCase c) {
  switch (c) {
    case FlowCase::Identity:
      return "identity";
    case FlowCase::Alloc:
      return "1";
    case FlowCase::Assign:
      return "2";
    case FlowCase::Source:
      return "3";
    case FlowCase::Load:
      return "4";
    case FlowCase::Store:
      return "5";
    case FlowCase::Const:
      return "const";
    case FlowCase::BinOp:
      return "binop";
    case FlowCase::Phi:
      return "phi";
    case FlowCase::Sanitizer:
      return "sanitizer";
  }
  return "?";
}

ReifiedAccess reify(Symbol var, Symbol field, const Program& program,
                    const Method& method) {
  ReifiedAccess access{var, {field}};
  // Strict SSA makes load chains acyclic; the bound guards hand-written
  // inputs that skipped validation.
  for (std::size_t steps = 0; steps <= method.definitions.size(); ++steps) {
    auto def = method.definitions.find(access.base);
    if (def == method.definitions.end()) {
      break;
    }
    const auto& stmt = program.statement(def->second);
    if (stmt.kind != StmtKind::Load) {
      break;
    }
    access.fields.insert(access.fields.begin(), stmt.field);
    access.base = stmt.object;
  }
  return access;
}

FlowResult flow(const Statement& stmt, AccessPath incoming,
                const FlowContext& ctx) {
  const Symbol b = incoming.base();
  switch (stmt.kind) {
    case StmtKind::Alloc:
      return stmt.result == b ? kill(FlowCase::Alloc) : identity(incoming);

    case StmtKind::Assign:
      if (stmt.result != b) {
        return identity(incoming);
      }
      return FlowResult{{Fact(ctx.paths.rebase(incoming, stmt.value))},
                        FlowCase::Assign};

    case StmtKind::Const:
      return stmt.result == b ? kill(FlowCase::Const) : identity(incoming);

    case StmtKind::Load: {
      if (stmt.result != b) {
        return identity(incoming);
      }
      auto access = reify(stmt.object, stmt.field, ctx.program, ctx.method);
      auto path =
          ctx.paths.prepend_fields(incoming, access.base, access.fields, ctx.k);
      if (!path) {
        return kill(FlowCase::Load);
      }
      return FlowResult{{Fact(*path)}, FlowCase::Load};
    }

    case StmtKind::Store: {
      auto access = reify(stmt.object, stmt.field, ctx.program, ctx.method);
      if (access.base != b) {
        return identity(incoming);
      }
      auto rest = strip_prefix(incoming, access.fields);
      if (!rest) {
        return identity(incoming);
      }
      FlowResult result{{}, FlowCase::Store};
      result.facts.push_back(Fact(*ctx.paths.make(stmt.value, *rest, ctx.k)));
      bool through_array =
          std::any_of(access.fields.begin(), access.fields.end(),
                      [&](Symbol f) { return ctx.program.is_array_field(f); });
      if (through_array) {
        result.facts.push_back(Fact(incoming));
      }
      return result;
    }

    case StmtKind::BinOp: {
      if (stmt.result != b) {
        return identity(incoming);
      }
      if (incoming.length() > 0) {
        return kill(FlowCase::BinOp);
      }
      FlowResult result{{}, FlowCase::BinOp};
      for (Symbol operand : stmt.args) {
        Fact fact(ctx.paths.make_variable(operand));
        if (std::find(result.facts.begin(), result.facts.end(), fact) ==
            result.facts.end()) {
          result.facts.push_back(fact);
        }
      }
      return result;
    }

    case StmtKind::Goto:
    case StmtKind::If:
      return identity(incoming);

    case StmtKind::Call:
    case StmtKind::VCall:
      if (ctx.is_source && ctx.is_source(stmt)) {
        if (!stmt.result.empty() && stmt.result == b) {
          return FlowResult{{Fact::zero()}, FlowCase::Source};
        }
        return identity(incoming);
      }
      throw FlowError("call statements are handled by the solver");

    case StmtKind::Phi:
      throw FlowError("phi statements are handled per incoming edge");
    case StmtKind::Return:
      throw FlowError("return statements are handled by the solver");
  }
  throw FlowError("unknown statement kind");
}

FlowResult flow_phi(const Statement& phi, AccessPath incoming,
                    Symbol pred_label, AccessPathFactory& paths) {
  if (phi.kind != StmtKind::Phi) {
    throw FlowError("flow_phi on a non-phi statement");
  }
  auto in = std::find_if(
      phi.incoming.begin(), phi.incoming.end(),
      [&](const PhiIncoming& entry) { return entry.label == pred_label; });
  if (in == phi.incoming.end()) {
    throw FlowError("unknown predecessor '" + pred_label.str() +
                    "' for phi of '" + phi.result.str() + "'");
  }
  if (phi.result != incoming.base()) {
    return identity(incoming);
  }
  return FlowResult{{Fact(paths.rebase(incoming, in->value))}, FlowCase::Phi};
}

FlowResult flow_sanitizer(const Statement& stmt, AccessPath incoming) {
  if (!stmt.result.empty() && stmt.result == incoming.base()) {
    return kill(FlowCase::Sanitizer);
  }
  return identity(incoming);
}

} // namespace taintflow
