#pragma once

#include <taintflow/symbol.h>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace taintflow {

/// Program-wide statement identifier. Ids are dense and follow source order.
struct StmtId {
  std::uint32_t value = 0;

  friend auto operator<=>(StmtId, StmtId) = default;
  friend bool operator==(StmtId, StmtId) = default;
};

struct MethodId {
  std::uint32_t value = 0;

  friend auto operator<=>(MethodId, MethodId) = default;
  friend bool operator==(MethodId, MethodId) = default;
};

enum class StmtKind {
  Alloc,  // x = new T
  Assign, // x = y
  Const,  // x = "..."
  Load,   // x = y.g
  Store,  // x.g = y
  BinOp,  // x = binop(y, z)
  Call,   // [x =] call m(args)
  VCall,  // [x =] vcall y.m(args)
  Phi,    // x = phi(L1: v1, ...)
  Return, // return [x]
  Goto,   // goto L
  If,     // if x goto L1 else L2
};

const char* to_string(StmtKind kind);

struct PhiIncoming {
  Symbol label;
  Symbol value;
};

/// One three-address statement. Which members are meaningful depends on
/// `kind`; see the accessors below for the per-kind roles.
struct Statement {
  StmtId id;
  StmtKind kind = StmtKind::Goto;
  int line = 0;

  Symbol result;   // defined variable; empty for void calls and non-defs
  Symbol object;   // Load base, Store base, VCall receiver
  Symbol value;    // Assign source, Store value, Return value, If condition
  Symbol field;    // Load/Store field
  Symbol type;     // Alloc class
  Symbol callee;   // Call: qualified name; VCall: method name
  std::string literal;
  std::vector<Symbol> args; // Call/VCall arguments, BinOp operands
  std::vector<PhiIncoming> incoming;
  std::vector<Symbol> targets; // Goto/If labels

  bool is_terminator() const {
    return kind == StmtKind::Return || kind == StmtKind::Goto ||
        kind == StmtKind::If;
  }
  bool is_call() const {
    return kind == StmtKind::Call || kind == StmtKind::VCall;
  }

  /// Variable defined by this statement, if any.
  std::optional<Symbol> defined() const;

  /// Variables read by this statement (phi operands excluded).
  std::vector<Symbol> uses() const;

  /// Call arguments with the receiver first for virtual calls. This is the
  /// positional list that lines up with a callee's parameter list.
  std::vector<Symbol> actuals() const;
};

struct BasicBlock {
  Symbol label;
  std::vector<Statement> stmts; // phis first, terminator last
  int line = 0;

  // Filled in by Program::finalize().
  std::vector<std::size_t> preds;
  std::vector<std::size_t> succs;

  const Statement& terminator() const { return stmts.back(); }
  std::size_t phi_count() const;
};

struct FieldDecl {
  Symbol name;
  bool is_array = false;
};

struct ClassDecl {
  Symbol name;
  std::optional<Symbol> superclass;
  std::vector<FieldDecl> fields;
  int line = 0;
};

/// Location of a statement inside its program.
struct StmtLocation {
  MethodId method;
  std::size_t block = 0;
  std::size_t index = 0;
};

struct Method {
  Symbol name;        // `Type.m` for instance methods, bare for static
  bool is_instance = false;
  std::vector<Symbol> params; // params[0] is the receiver when is_instance
  std::vector<BasicBlock> blocks;
  std::size_t entry = 0;
  int line = 0;

  // Filled in by Program::finalize().
  std::vector<StmtId> returns;
  std::unordered_map<Symbol, StmtId> definitions;

  /// Class part of an instance method name (`Box` for `Box.get`).
  Symbol owner() const;
  /// Method part of the name (`get` for `Box.get`).
  Symbol simple_name() const;

  /// Recomputes block preds/succs from terminator targets. Throws
  /// ParseError on a jump to an undefined label.
  void link_blocks();

  std::optional<std::size_t> param_index(Symbol var) const;
  std::optional<std::size_t> block_index(Symbol label) const;
  std::size_t statement_count() const;
};

class IrError : public std::runtime_error {
 public:
  IrError(const std::string& message, int line = 0, int column = 0);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ParseError : public IrError {
  using IrError::IrError;
};

class ResolveError : public IrError {
  using IrError::IrError;
};

class SsaError : public IrError {
 public:
  SsaError(const std::string& message, Symbol variable = Symbol());

  Symbol variable() const { return variable_; }

 private:
  Symbol variable_;
};

/// Immutable program model once finalized.
class Program {
 public:
  std::vector<ClassDecl> classes;
  std::vector<Method> methods;
  bool declared_ssa = false;

  /// Validates declarations, assigns statement ids in source order and
  /// computes CFG edges, definition tables and the statement index.
  /// Throws ResolveError / ParseError on inconsistent input.
  void finalize();

  const Method& method(MethodId id) const { return methods.at(id.value); }
  std::optional<MethodId> find_method(Symbol qualified_name) const;
  const ClassDecl* find_class(Symbol name) const;

  const Statement& statement(StmtId id) const;
  const StmtLocation& location(StmtId id) const;
  std::size_t statement_count() const { return index_.size(); }

  bool is_array_field(Symbol field) const;
  bool is_declared_field(Symbol field) const;
  const std::vector<Symbol>& field_names() const { return field_names_; }

  /// Walks the superclass chain of `cls` looking for `name`.
  std::optional<MethodId> dispatch(Symbol cls, Symbol name) const;
  /// `cls` followed by every transitive subclass, in declaration order.
  std::vector<Symbol> subtypes(Symbol cls) const;

 private:
  std::vector<StmtLocation> index_;
  std::unordered_map<Symbol, MethodId> method_index_;
  std::unordered_map<Symbol, std::size_t> class_index_;
  std::vector<Symbol> field_names_; // sorted
  std::unordered_map<Symbol, bool> field_is_array_;
};

} // namespace taintflow
