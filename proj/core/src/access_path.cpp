#include <taintflow/access_path.h>

#include <algorithm>
#include <stdexcept>

namespace taintflow {

namespace {

std::size_t hash_path(Symbol base, std::span<const Symbol> fields) {
  std::size_t seed = base.hash();
  for (Symbol field : fields) {
    seed ^= field.hash() + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  }
  return seed;
}

} // namespace

KConfig::KConfig(int limit) : k(limit) {
  if (limit < 1) {
    throw std::invalid_argument("k must be at least 1");
  }
}

std::string AccessPath::to_string() const {
  std::string out = node_->base.str();
  for (Symbol field : node_->fields) {
    out += '.';
    out += field.str();
  }
  return out;
}

bool operator<(AccessPath a, AccessPath b) {
  if (a == b) {
    return false;
  }
  if (a.base() != b.base()) {
    return a.base() < b.base();
  }
  auto fa = a.fields();
  auto fb = b.fields();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(),
                                      fb.end());
}

bool AccessPathFactory::KeyEqual::operator()(const Key& a,
                                             const Key& b) const {
  return a.base == b.base &&
      std::equal(a.fields.begin(), a.fields.end(), b.fields.begin(),
                 b.fields.end());
}

AccessPath AccessPathFactory::intern(Symbol base,
                                     std::span<const Symbol> fields) {
  std::size_t hash = hash_path(base, fields);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = index_.find(Key{base, fields, hash});
  if (it != index_.end()) {
    return AccessPath(it->second);
  }
  auto& node = nodes_.emplace_back();
  node.base = base;
  node.fields.assign(fields.begin(), fields.end());
  node.hash = hash;
  index_.emplace(Key{node.base, node.fields, hash}, &node);
  return AccessPath(&node);
}

std::optional<AccessPath> AccessPathFactory::make(
    Symbol base, std::span<const Symbol> fields, KConfig cfg) {
  if (fields.size() > static_cast<std::size_t>(cfg.k)) {
    std::lock_guard<std::mutex> lock(mutex_);
    ++too_long_;
    return std::nullopt;
  }
  return intern(base, fields);
}

AccessPath AccessPathFactory::make_variable(Symbol base) {
  return intern(base, {});
}

std::optional<AccessPath> AccessPathFactory::prepend_fields(
    AccessPath ap, Symbol base, std::span<const Symbol> prefix,
    KConfig cfg) {
  if (prefix.empty() && ap.base() == base) {
    return ap;
  }
  if (prefix.size() + ap.length() > static_cast<std::size_t>(cfg.k)) {
    std::lock_guard<std::mutex> lock(mutex_);
    ++too_long_;
    return std::nullopt;
  }
  std::vector<Symbol> fields(prefix.begin(), prefix.end());
  fields.insert(fields.end(), ap.fields().begin(), ap.fields().end());
  return intern(base, fields);
}

AccessPath AccessPathFactory::rebase(AccessPath ap, Symbol base) {
  if (ap.base() == base) {
    return ap;
  }
  return intern(base, ap.fields());
}

std::size_t AccessPathFactory::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return nodes_.size();
}

std::size_t AccessPathFactory::too_long_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return too_long_;
}

std::optional<std::vector<Symbol>> strip_prefix(
    AccessPath ap, std::span<const Symbol> prefix) {
  auto fields = ap.fields();
  if (prefix.size() > fields.size() ||
      !std::equal(prefix.begin(), prefix.end(), fields.begin())) {
    return std::nullopt;
  }
  return std::vector<Symbol>(fields.begin() + prefix.size(), fields.end());
}

std::string Fact::to_string() const {
  return zero_ ? "0" : path_.to_string();
}

bool operator<(Fact a, Fact b) {
  if (a.zero_ || b.zero_) {
    return a.zero_ && !b.zero_;
  }
  return a.path_ < b.path_;
}

} // namespace taintflow
