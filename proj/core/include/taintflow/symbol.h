#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace taintflow {

/// Interned string used for variable, field, label and method names.
///
/// Symbols are backed by a process-wide pool. Equality is a pointer
/// comparison; ordering is lexicographic on the underlying text so that
/// anything sorted by Symbol is deterministic across runs.
class Symbol {
 public:
  Symbol();
  explicit Symbol(std::string_view text);

  const std::string& str() const { return *text_; }
  bool empty() const { return text_->empty(); }

  friend bool operator==(Symbol a, Symbol b) { return a.text_ == b.text_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) {
    if (a.text_ == b.text_) {
      return std::strong_ordering::equal;
    }
    return *a.text_ <=> *b.text_;
  }

  std::size_t hash() const { return std::hash<const void*>{}(text_); }

 private:
  const std::string* text_;
};

} // namespace taintflow

template <>
struct std::hash<taintflow::Symbol> {
  std::size_t operator()(taintflow::Symbol s) const noexcept {
    return s.hash();
  }
};
