#include <taintflow/generator.h>

#include <algorithm>
#include <sstream>
#include <vector>

namespace taintflow {

namespace {

/// splitmix64; the standard distributions are not portable across
/// library implementations, so draws are reduced by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  int below(int n) { return n <= 1 ? 0 : static_cast<int>(next() % n); }
  bool chance(int percent) { return below(100) < percent; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(static_cast<int>(items.size()))];
  }

 private:
  std::uint64_t state_;
};

struct MethodPlan {
  std::string name;   // qualified
  std::string simple; // vcall name for instance methods
  bool instance = false;
  int params = 0;     // explicit, receiver excluded
  bool returns = false;
};

class Generator {
 public:
  Generator(std::uint64_t seed, const GenLimits& limits)
      : rng_(seed), limits_(limits) {
    limits_.methods = std::clamp(limits_.methods, 1, 6);
    limits_.blocks = std::clamp(limits_.blocks, 1, 4);
    limits_.fields = std::clamp(limits_.fields, 1, 3);
    limits_.stmts_per_block = std::max(limits_.stmts_per_block, 1);
    limits_.call_depth = std::max(limits_.call_depth, 0);
  }

  std::string run() {
    plan();
    std::ostringstream out;
    out << "// generated program\n";
    out << "type A {";
    for (const auto& f : fields_a_) {
      out << " field " << f << (f == "arr" ? "[]" : "") << ";";
    }
    out << " }\n";
    out << "type B extends A { field h; }\n\n";
    for (std::size_t i = 0; i < methods_.size(); ++i) {
      emit_method(out, static_cast<int>(i));
    }
    return out.str();
  }

 private:
  void plan() {
    static const std::vector<std::string> pool{"f", "g", "arr"};
    int count = 1 + rng_.below(limits_.fields);
    fields_a_.assign(pool.begin(), pool.begin() + count);
    fields_ = fields_a_;
    fields_.push_back("h");

    methods_.push_back(MethodPlan{"main", "", false, 0, false});
    for (int i = 1; i < limits_.methods; ++i) {
      MethodPlan m;
      m.params = rng_.below(3);
      m.returns = rng_.chance(70);
      if (rng_.chance(40)) {
        m.instance = true;
        m.simple = "run" + std::to_string(i);
        m.name = "A." + m.simple;
        methods_.push_back(m);
        if (static_cast<int>(methods_.size()) < limits_.methods &&
            rng_.chance(50)) {
          m.name = "B." + m.simple;
          methods_.push_back(m);
          ++i;
        }
      } else {
        m.name = "m" + std::to_string(i);
        methods_.push_back(m);
      }
    }
    depth_.assign(methods_.size(), 0);
  }

  std::vector<std::string> readable(const MethodPlan& m) const {
    std::vector<std::string> vars{"v0", "v1", "v2", "v3"};
    if (m.instance) {
      vars.push_back("this");
    }
    for (int p = 0; p < m.params; ++p) {
      vars.push_back("p" + std::to_string(p));
    }
    return vars;
  }

  std::string local() { return "v" + std::to_string(rng_.below(4)); }

  std::string args(const std::vector<std::string>& vars, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
      out += (i ? ", " : "") + rng_.pick(vars);
    }
    return out;
  }

  /// A callee for method `from`, or -1. Calls go to later methods except
  /// for the occasional recursive edge.
  int callee(int from) {
    std::vector<int> later;
    for (int j = from + 1; j < static_cast<int>(methods_.size()); ++j) {
      if (depth_[from] + 1 <= limits_.call_depth) {
        later.push_back(j);
      }
    }
    if (limits_.recursion && from > 0 && rng_.chance(10)) {
      return 1 + rng_.below(from);
    }
    if (later.empty()) {
      return -1;
    }
    int j = rng_.pick(later);
    depth_[j] = std::max(depth_[j], depth_[from] + 1);
    return j;
  }

  std::string call_stmt(int from, const std::vector<std::string>& vars) {
    int j = callee(from);
    if (j < 0) {
      return "";
    }
    const MethodPlan& target = methods_[j];
    std::string lhs = target.returns || rng_.chance(30) ? local() + " = " : "";
    if (target.instance) {
      std::string recv = rng_.pick(vars);
      return lhs + "vcall " + recv + "." + target.simple + "(" +
          args(vars, target.params) + ");";
    }
    return lhs + "call " + target.name + "(" + args(vars, target.params) +
        ");";
  }

  std::string statement(int from, const std::vector<std::string>& vars) {
    while (true) {
      switch (rng_.below(14)) {
        case 0:
          return local() + " = " + rng_.pick(vars) + ";";
        case 1:
          return local() + " = \"c\";";
        case 2:
          return local() + " = new " + (rng_.chance(50) ? "A" : "B") + ";";
        case 3:
        case 4:
          return local() + " = " + rng_.pick(vars) + "." + rng_.pick(fields_) +
              ";";
        case 5:
        case 6:
          return rng_.pick(vars) + "." + rng_.pick(fields_) + " = " +
              rng_.pick(vars) + ";";
        case 7:
          return local() + " = binop(" + args(vars, 2) + ");";
        case 8:
          return local() + " = call " +
              (rng_.chance(70) ? "source1" : "source2") + "();";
        case 9:
          if (rng_.chance(50)) {
            return "call sink1(" + rng_.pick(vars) + ");";
          }
          return "call sink2(" + args(vars, 2) + ");";
        case 10:
          return local() + " = call sanitizeXss(" + rng_.pick(vars) + ");";
        case 11:
          return local() + " = call ext(" + args(vars, 2) + ");";
        default:
          if (auto call = call_stmt(from, vars); !call.empty()) {
            return call;
          }
      }
    }
  }

  void emit_method(std::ostringstream& out, int index) {
    const MethodPlan& m = methods_[index];
    const auto vars = readable(m);
    const int blocks =
        limits_.methods == 1 ? 1 : 1 + rng_.below(limits_.blocks);

    out << "method " << m.name << "(";
    std::vector<std::string> params;
    if (m.instance) {
      params.push_back("this");
    }
    for (int p = 0; p < m.params; ++p) {
      params.push_back("p" + std::to_string(p));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      out << (i ? ", " : "") << params[i];
    }
    out << ") {\n";

    for (int b = 0; b < blocks; ++b) {
      out << "  L" << b << ":\n";
      if (b == 0) {
        for (int v = 0; v < 4; ++v) {
          out << "    v" << v << " = ";
          if (index == 0 && v == 0) {
            out << "call source1();\n";
            continue;
          }
          switch (rng_.below(3)) {
            case 0:
              out << "new " << (rng_.chance(50) ? "A" : "B") << ";\n";
              break;
            case 1:
              out << "\"c\";\n";
              break;
            default:
              if (params.empty()) {
                out << "\"c\";\n";
              } else {
                out << rng_.pick(params) << ";\n";
              }
          }
        }
      }
      int count = rng_.below(limits_.stmts_per_block + 1);
      for (int s = 0; s < count; ++s) {
        out << "    " << statement(index, vars) << "\n";
      }
      if (index == 0 && b == blocks - 1) {
        out << "    call sink1(" << rng_.pick(vars) << ");\n";
      }
      out << "    " << terminator(m, vars, b, blocks) << "\n";
    }
    out << "}\n\n";
  }

  std::string terminator(const MethodPlan& m,
                         const std::vector<std::string>& vars, int b,
                         int blocks) {
    if (b == blocks - 1) {
      return m.returns ? "return " + rng_.pick(vars) + ";" : "return;";
    }
    auto label = [](int i) { return "L" + std::to_string(i); };
    const int next = b + 1;
    // The entry block must stay free of predecessors.
    if (limits_.loops && b > 0 && rng_.chance(20)) {
      return "if " + rng_.pick(vars) + " goto " + label(1 + rng_.below(b)) +
          " else " + label(next) + ";";
    }
    if (rng_.chance(50)) {
      int other = next + rng_.below(blocks - next);
      return "if " + rng_.pick(vars) + " goto " + label(next) + " else " +
          label(other) + ";";
    }
    return "goto " + label(next) + ";";
  }

  Rng rng_;
  GenLimits limits_;
  std::vector<std::string> fields_a_;
  std::vector<std::string> fields_;
  std::vector<MethodPlan> methods_;
  std::vector<int> depth_;
};

} // namespace

std::string generate_program(std::uint64_t seed, const GenLimits& limits) {
  return Generator(seed, limits).run();
}

std::string corpus_spec_json() {
  return R"({
  "sources": [
    {"method": "source1", "labels": ["XSS", "SQLI"]},
    {"method": "source2", "labels": ["SQLI"]}
  ],
  "sinks": [
    {"method": "sink1", "arg": 0, "labels": ["XSS"]},
    {"method": "sink2", "arg": 1, "labels": ["SQLI"]}
  ],
  "sanitizers": [
    {"method": "sanitizeXss", "labels": ["XSS"]}
  ]
}
)";
}

} // namespace taintflow
