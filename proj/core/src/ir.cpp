#include <taintflow/ir.h>

#include <algorithm>
#include <set>
#include <unordered_set>

namespace taintflow {

const char* to_string(StmtKind kind) {
  switch (kind) {
    case StmtKind::Alloc:
      return "alloc";
    case StmtKind::Assign:
      return "assign";
    case StmtKind::Const:
      return "const";
    case StmtKind::Load:
      return "load";
    case StmtKind::Store:
      return "store";
    case StmtKind::BinOp:
      return "binop";
    case StmtKind::Call:
      return "call";
    case StmtKind::VCall:
      return "vcall";
    case StmtKind::Phi:
      return "phi";
    case StmtKind::Return:
      return "return";
    case StmtKind::Goto:
      return "goto";
    case StmtKind::If:
      return "if";
  }
  return "?";
}

std::optional<Symbol> Statement::defined() const {
  switch (kind) {
    case StmtKind::Alloc:
    case StmtKind::Assign:
    case StmtKind::Const:
    case StmtKind::Load:
    case StmtKind::BinOp:
    case StmtKind::Phi:
      return result;
    case StmtKind::Call:
    case StmtKind::VCall:
      if (!result.empty()) {
        return result;
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::vector<Symbol> Statement::uses() const {
  switch (kind) {
    case StmtKind::Assign:
      return {value};
    case StmtKind::Load:
      return {object};
    case StmtKind::Store:
      return {object, value};
    case StmtKind::BinOp:
      return args;
    case StmtKind::Call:
      return args;
    case StmtKind::VCall:
      return actuals();
    case StmtKind::Return:
      if (value.empty()) {
        return {};
      }
      return {value};
    case StmtKind::If:
      return {value};
    default:
      return {};
  }
}

std::vector<Symbol> Statement::actuals() const {
  if (kind != StmtKind::VCall) {
    return args;
  }
  std::vector<Symbol> all;
  all.reserve(args.size() + 1);
  all.push_back(object);
  all.insert(all.end(), args.begin(), args.end());
  return all;
}

std::size_t BasicBlock::phi_count() const {
  std::size_t n = 0;
  while (n < stmts.size() && stmts[n].kind == StmtKind::Phi) {
    ++n;
  }
  return n;
}

Symbol Method::owner() const {
  const auto& text = name.str();
  auto dot = text.rfind('.');
  if (dot == std::string::npos) {
    return Symbol();
  }
  return Symbol(std::string_view(text).substr(0, dot));
}

Symbol Method::simple_name() const {
  const auto& text = name.str();
  auto dot = text.rfind('.');
  if (dot == std::string::npos) {
    return name;
  }
  return Symbol(std::string_view(text).substr(dot + 1));
}

void Method::link_blocks() {
  for (auto& block : blocks) {
    block.preds.clear();
    block.succs.clear();
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& block = blocks[b];
    if (block.stmts.empty()) {
      continue;
    }
    for (Symbol target : block.stmts.back().targets) {
      auto succ = block_index(target);
      if (!succ) {
        throw ParseError("jump to undefined label '" + target.str() + "'",
                         block.stmts.back().line);
      }
      if (std::find(block.succs.begin(), block.succs.end(), *succ) ==
          block.succs.end()) {
        block.succs.push_back(*succ);
      }
    }
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t succ : blocks[b].succs) {
      blocks[succ].preds.push_back(b);
    }
  }
}

std::optional<std::size_t> Method::param_index(Symbol var) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == var) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> Method::block_index(Symbol label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].label == label) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t Method::statement_count() const {
  std::size_t n = 0;
  for (const auto& block : blocks) {
    n += block.stmts.size();
  }
  return n;
}

IrError::IrError(const std::string& message, int line, int column)
    : std::runtime_error(
          line > 0 ? std::to_string(line) + ":" + std::to_string(column) +
                  ": " + message
                   : message),
      line_(line),
      column_(column) {}

SsaError::SsaError(const std::string& message, Symbol variable)
    : IrError(message), variable_(variable) {}

void Program::finalize() {
  class_index_.clear();
  method_index_.clear();
  field_is_array_.clear();
  field_names_.clear();
  index_.clear();

  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!class_index_.emplace(classes[i].name, i).second) {
      throw ResolveError(
          "duplicate type '" + classes[i].name.str() + "'", classes[i].line);
    }
    for (const auto& field : classes[i].fields) {
      auto [it, inserted] = field_is_array_.emplace(field.name, field.is_array);
      if (!inserted) {
        it->second = it->second || field.is_array;
      } else {
        field_names_.push_back(field.name);
      }
    }
  }
  std::sort(field_names_.begin(), field_names_.end());

  for (const auto& cls : classes) {
    if (!cls.superclass) {
      continue;
    }
    if (!class_index_.count(*cls.superclass)) {
      throw ResolveError(
          "undeclared supertype '" + cls.superclass->str() + "'", cls.line);
    }
    // Acyclic: the chain must terminate within |classes| steps.
    Symbol current = cls.name;
    for (std::size_t steps = 0;; ++steps) {
      const auto& decl = classes[class_index_.at(current)];
      if (!decl.superclass) {
        break;
      }
      if (steps > classes.size()) {
        throw ResolveError(
            "cyclic supertype chain through '" + cls.name.str() + "'",
            cls.line);
      }
      current = *decl.superclass;
    }
  }

  std::uint32_t next_id = 0;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    auto& method = methods[m];
    if (!method_index_.emplace(method.name, MethodId{std::uint32_t(m)})
             .second) {
      throw ResolveError(
          "duplicate method '" + method.name.str() + "'", method.line);
    }
    method.is_instance = !method.owner().empty();
    if (method.is_instance) {
      if (!class_index_.count(method.owner())) {
        throw ResolveError(
            "method '" + method.name.str() + "' declared on undeclared type",
            method.line);
      }
      if (method.params.empty()) {
        throw ResolveError(
            "instance method '" + method.name.str() +
                "' needs a receiver parameter",
            method.line);
      }
    }
    if (method.blocks.empty()) {
      throw ParseError(
          "method '" + method.name.str() + "' has no blocks", method.line);
    }

    std::unordered_set<Symbol> seen_labels;
    for (const auto& block : method.blocks) {
      if (!seen_labels.insert(block.label).second) {
        throw ParseError(
            "duplicate label '" + block.label.str() + "'", block.line);
      }
    }

    method.returns.clear();
    method.definitions.clear();
    for (std::size_t b = 0; b < method.blocks.size(); ++b) {
      auto& block = method.blocks[b];
      if (block.stmts.empty() || !block.stmts.back().is_terminator()) {
        throw ParseError(
            "block '" + block.label.str() + "' lacks a terminator",
            block.line);
      }
      bool past_phis = false;
      for (std::size_t s = 0; s < block.stmts.size(); ++s) {
        auto& stmt = block.stmts[s];
        if (stmt.is_terminator() && s + 1 != block.stmts.size()) {
          throw ParseError("terminator in the middle of a block", stmt.line);
        }
        if (stmt.kind == StmtKind::Phi) {
          if (past_phis) {
            throw ParseError("phi after a non-phi statement", stmt.line);
          }
        } else {
          past_phis = true;
        }
        if (stmt.kind == StmtKind::Alloc && !class_index_.count(stmt.type)) {
          throw ResolveError(
              "allocation of undeclared type '" + stmt.type.str() + "'",
              stmt.line);
        }
        if ((stmt.kind == StmtKind::Load || stmt.kind == StmtKind::Store) &&
            !field_is_array_.count(stmt.field)) {
          throw ResolveError(
              "access to undeclared field '" + stmt.field.str() + "'",
              stmt.line);
        }
        stmt.id = StmtId{next_id++};
        index_.push_back(StmtLocation{MethodId{std::uint32_t(m)}, b, s});
        if (auto def = stmt.defined()) {
          method.definitions.emplace(*def, stmt.id);
        }
        if (stmt.kind == StmtKind::Return) {
          method.returns.push_back(stmt.id);
        }
      }
    }
    method.link_blocks();
  }
}

std::optional<MethodId> Program::find_method(Symbol qualified_name) const {
  auto it = method_index_.find(qualified_name);
  if (it == method_index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const ClassDecl* Program::find_class(Symbol name) const {
  auto it = class_index_.find(name);
  if (it == class_index_.end()) {
    return nullptr;
  }
  return &classes[it->second];
}

const Statement& Program::statement(StmtId id) const {
  const auto& loc = index_.at(id.value);
  return methods[loc.method.value].blocks[loc.block].stmts[loc.index];
}

const StmtLocation& Program::location(StmtId id) const {
  return index_.at(id.value);
}

bool Program::is_array_field(Symbol field) const {
  auto it = field_is_array_.find(field);
  return it != field_is_array_.end() && it->second;
}

bool Program::is_declared_field(Symbol field) const {
  return field_is_array_.count(field) != 0;
}

std::optional<MethodId> Program::dispatch(Symbol cls, Symbol name) const {
  std::optional<Symbol> current = cls;
  while (current) {
    auto found = find_method(Symbol(current->str() + "." + name.str()));
    if (found) {
      return found;
    }
    const auto* decl = find_class(*current);
    if (decl == nullptr) {
      return std::nullopt;
    }
    current = decl->superclass;
  }
  return std::nullopt;
}

std::vector<Symbol> Program::subtypes(Symbol cls) const {
  std::vector<Symbol> result{cls};
  // Declaration order may list a subclass before its parent, so iterate to
  // a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& decl : classes) {
      if (!decl.superclass) {
        continue;
      }
      bool parent_in = std::find(result.begin(), result.end(),
                                 *decl.superclass) != result.end();
      bool self_in =
          std::find(result.begin(), result.end(), decl.name) != result.end();
      if (parent_in && !self_in) {
        result.push_back(decl.name);
        changed = true;
      }
    }
  }
  return result;
}

} // namespace taintflow
