#include <taintflow/taint_spec.h>

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace taintflow {

namespace {

using nlohmann::json;

std::string bare(const std::string& name) {
  auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(dot + 1);
}

void reject_unknown_keys(const json& object,
                         std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* name : allowed) {
      known = known || key == name;
    }
    if (!known) {
      throw SpecError(where + ": unknown key '" + key + "'");
    }
  }
}

Symbol method_name(const json& entry, const std::string& where) {
  if (!entry.contains("method") || !entry["method"].is_string() ||
      entry["method"].get<std::string>().empty()) {
    throw SpecError(where + ".method: expected a non-empty string");
  }
  return Symbol(entry["method"].get<std::string>());
}

std::set<Symbol> label_set(const json& entry, const std::string& where) {
  if (!entry.contains("labels") || !entry["labels"].is_array() ||
      entry["labels"].empty()) {
    throw SpecError(where + ".labels: expected a non-empty array");
  }
  std::set<Symbol> labels;
  for (std::size_t i = 0; i < entry["labels"].size(); ++i) {
    const auto& label = entry["labels"][i];
    if (!label.is_string() || label.get<std::string>().empty()) {
      throw SpecError(where + ".labels[" + std::to_string(i) +
                      "]: expected a non-empty string");
    }
    labels.insert(Symbol(label.get<std::string>()));
  }
  return labels;
}

const json& section(const json& root, const char* key,
                    const std::string& origin) {
  static const json empty = json::array();
  if (!root.contains(key)) {
    return empty;
  }
  const auto& value = root[key];
  if (!value.is_array()) {
    throw SpecError(origin + ": " + key + ": expected an array");
  }
  return value;
}

} // namespace

std::set<Symbol> TaintSpec::labels() const {
  std::set<Symbol> all;
  for (const auto& s : sources) {
    all.insert(s.labels.begin(), s.labels.end());
  }
  for (const auto& s : sinks) {
    all.insert(s.labels.begin(), s.labels.end());
  }
  for (const auto& s : sanitizers) {
    all.insert(s.labels.begin(), s.labels.end());
  }
  return all;
}

TaintSpec parse_spec(std::string_view json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError(origin + ": malformed JSON at byte " +
                    std::to_string(e.byte) + ": " + e.what());
  }
  if (!root.is_object()) {
    throw SpecError(origin + ": expected a JSON object");
  }
  reject_unknown_keys(root, {"sources", "sinks", "sanitizers"}, origin);

  TaintSpec spec;
  const auto& sources = section(root, "sources", origin);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    std::string where = origin + ": sources[" + std::to_string(i) + "]";
    if (!sources[i].is_object()) {
      throw SpecError(where + ": expected an object");
    }
    reject_unknown_keys(sources[i], {"method", "labels"}, where);
    spec.sources.push_back(
        {method_name(sources[i], where), label_set(sources[i], where)});
  }
  const auto& sinks = section(root, "sinks", origin);
  for (std::size_t i = 0; i < sinks.size(); ++i) {
    std::string where = origin + ": sinks[" + std::to_string(i) + "]";
    if (!sinks[i].is_object()) {
      throw SpecError(where + ": expected an object");
    }
    reject_unknown_keys(sinks[i], {"method", "arg", "labels"}, where);
    const auto& arg = sinks[i].value("arg", json(0));
    if (!arg.is_number_integer() || arg.get<long long>() < 0) {
      throw SpecError(where + ".arg: expected a non-negative integer");
    }
    spec.sinks.push_back({method_name(sinks[i], where),
                          arg.get<std::size_t>(),
                          label_set(sinks[i], where)});
  }
  const auto& sanitizers = section(root, "sanitizers", origin);
  for (std::size_t i = 0; i < sanitizers.size(); ++i) {
    std::string where = origin + ": sanitizers[" + std::to_string(i) + "]";
    if (!sanitizers[i].is_object()) {
      throw SpecError(where + ": expected an object");
    }
    reject_unknown_keys(sanitizers[i], {"method", "labels"}, where);
    spec.sanitizers.push_back(
        {method_name(sanitizers[i], where), label_set(sanitizers[i], where)});
  }
  return spec;
}

TaintSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SpecError(path.string() + ": cannot open taint spec");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str(), path.string());
}

const char* to_string(CallRole role) {
  switch (role) {
    case CallRole::Source:
      return "source";
    case CallRole::Sanitizer:
      return "sanitizer";
    case CallRole::Resolved:
      return "resolved";
    case CallRole::External:
      return "external";
  }
  return "?";
}

TaintRoles::TaintRoles(const Program& program,
                       const CallGraph& callgraph,
                       const TaintSpec& spec)
    : program_(program),
      callgraph_(callgraph),
      spec_(spec),
      labels_(spec.labels()) {
  for (const auto& method : program.methods) {
    for (const auto& block : method.blocks) {
      for (const auto& stmt : block.stmts) {
        if (!stmt.is_call()) {
          continue;
        }
        std::set<std::pair<std::size_t, Symbol>> wanted;
        for (const auto& sink : spec.sinks) {
          if (sink.arg >= stmt.args.size() || !matches(sink.method, stmt)) {
            continue;
          }
          for (Symbol label : sink.labels) {
            wanted.emplace(sink.arg, label);
          }
        }
        for (const auto& [arg, label] : wanted) {
          queries_.push_back(SinkQuery{stmt.id, arg, label});
        }
      }
    }
  }
}

bool TaintRoles::matches(Symbol spec_method, const Statement& call) const {
  if (spec_method == call.callee) {
    return true;
  }
  if (const auto* targets = callgraph_.callees(call.id)) {
    for (MethodId target : *targets) {
      if (program_.method(target).name == spec_method) {
        return true;
      }
    }
    return false;
  }
  return bare(spec_method.str()) == bare(call.callee.str());
}

CallRole TaintRoles::role(const Statement& call, Symbol label) const {
  for (const auto& source : spec_.sources) {
    if (source.labels.count(label) && matches(source.method, call)) {
      return CallRole::Source;
    }
  }
  for (const auto& sanitizer : spec_.sanitizers) {
    if (sanitizer.labels.count(label) && matches(sanitizer.method, call)) {
      return CallRole::Sanitizer;
    }
  }
  if (callgraph_.callees(call.id) != nullptr) {
    return CallRole::Resolved;
  }
  return CallRole::External;
}

} // namespace taintflow
