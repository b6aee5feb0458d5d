#include <taintflow/symbol.h>

#include <mutex>
#include <unordered_set>

namespace taintflow {

namespace {

// Node-based set: element addresses stay valid across rehashes, so a
// Symbol can read its text without taking the lock.
struct SymbolPool {
  std::mutex mutex;
  std::unordered_set<std::string> strings;

  const std::string* intern(std::string_view text) {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = strings.find(std::string(text));
    if (it == strings.end()) {
      it = strings.emplace(text).first;
    }
    return &*it;
  }
};

SymbolPool& pool() {
  static SymbolPool instance;
  return instance;
}

} // namespace

Symbol::Symbol() {
  static const std::string* const empty = pool().intern("");
  text_ = empty;
}

Symbol::Symbol(std::string_view text) : text_(pool().intern(text)) {}

} // namespace taintflow
