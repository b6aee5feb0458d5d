#pragma once

#include <taintflow/symbol.h>

#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace taintflow {

/// Bound on access-path length.
struct KConfig {
  int k = 5;

  KConfig() = default;
  explicit KConfig(int limit);
};

namespace detail {
struct PathNode {
  Symbol base;
  std::vector<Symbol> fields;
  std::size_t hash = 0;
};
} // namespace detail

/// Handle to an interned access path `base.f1...fn`. Two handles are equal
/// exactly when the paths are structurally equal.
class AccessPath {
 public:
  AccessPath() = default;

  Symbol base() const { return node_->base; }
  std::span<const Symbol> fields() const { return node_->fields; }
  std::size_t length() const { return node_->fields.size(); }

  std::string to_string() const;

  friend bool operator==(AccessPath a, AccessPath b) {
    return a.node_ == b.node_;
  }
  /// Structural order (base text, then fields), independent of interning.
  friend bool operator<(AccessPath a, AccessPath b);

  std::size_t hash() const { return std::hash<const void*>{}(node_); }

 private:
  friend class AccessPathFactory;
  explicit AccessPath(const detail::PathNode* node) : node_(node) {}

  const detail::PathNode* node_ = nullptr;
};

/// Append-only flyweight store: every distinct path is allocated once per
/// analysis run. Safe to share between threads; handles stay valid for the
/// factory's lifetime.
class AccessPathFactory {
 public:
  AccessPathFactory() = default;
  AccessPathFactory(const AccessPathFactory&) = delete;
  AccessPathFactory& operator=(const AccessPathFactory&) = delete;

  /// nullopt means TooLong: more than `cfg.k` fields. Callers drop the fact.
  std::optional<AccessPath> make(Symbol base,
                                 std::span<const Symbol> fields,
                                 KConfig cfg);

  AccessPath make_variable(Symbol base);

  /// `base.prefix.(ap fields)`; TooLong when the combined length exceeds k.
  std::optional<AccessPath> prepend_fields(AccessPath ap,
                                           Symbol base,
                                           std::span<const Symbol> prefix,
                                           KConfig cfg);

  /// Same fields on a different base variable (never longer than `ap`).
  AccessPath rebase(AccessPath ap, Symbol base);

  /// Number of distinct paths interned so far.
  std::size_t size() const;
  /// Number of make/prepend requests rejected as TooLong.
  std::size_t too_long_count() const;

 private:
  AccessPath intern(Symbol base, std::span<const Symbol> fields);

  struct Key {
    Symbol base;
    std::span<const Symbol> fields;
    std::size_t hash;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const { return key.hash; }
  };
  struct KeyEqual {
    bool operator()(const Key& a, const Key& b) const;
  };

  mutable std::mutex mutex_;
  std::deque<detail::PathNode> nodes_;
  std::unordered_map<Key, const detail::PathNode*, KeyHash, KeyEqual> index_;
  std::size_t too_long_ = 0;
};

/// Remainder `f(m+1)...fn` when `prefix` equals the first m fields of `ap`;
/// nullopt (NoMatch) otherwise.
std::optional<std::vector<Symbol>> strip_prefix(AccessPath ap,
                                                std::span<const Symbol> prefix);

/// A dataflow fact: the null fact 0 or an access path.
class Fact {
 public:
  static Fact zero() { return Fact(); }
  Fact(AccessPath path) : path_(path), zero_(false) {}

  bool is_zero() const { return zero_; }
  AccessPath path() const { return path_; }

  std::string to_string() const;

  friend bool operator==(Fact a, Fact b) {
    return a.zero_ == b.zero_ && (a.zero_ || a.path_ == b.path_);
  }
  /// Zero sorts first; paths use their structural order.
  friend bool operator<(Fact a, Fact b);

  std::size_t hash() const { return zero_ ? 0x9e3779b9u : path_.hash(); }

 private:
  Fact() = default;

  AccessPath path_;
  bool zero_ = true;
};

} // namespace taintflow

template <>
struct std::hash<taintflow::AccessPath> {
  std::size_t operator()(taintflow::AccessPath ap) const noexcept {
    return ap.hash();
  }
};

template <>
struct std::hash<taintflow::Fact> {
  std::size_t operator()(taintflow::Fact fact) const noexcept {
    return fact.hash();
  }
};
