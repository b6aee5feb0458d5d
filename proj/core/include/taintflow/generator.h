#pragma once

#include <cstdint>
#include <string>

namespace taintflow {

struct GenLimits {
  int methods = 6;          // 1..6
  int blocks = 4;           // per method, 1..4
  int fields = 3;           // per class, 1..3
  int stmts_per_block = 5;
  int call_depth = 3;       // longest chain of non-recursive calls
  bool loops = true;
  bool recursion = true;
};

/// Deterministic pseudo-random non-SSA program. Every program calls at
/// least one source and one sink from its first method and defines every
/// local in the entry block so SSA construction always succeeds. With
/// `methods == 1` the program is a single straight-line method.
std::string generate_program(std::uint64_t seed, const GenLimits& limits = {});

/// Taint spec matching the names used by generated programs: sources
/// `source1` (XSS, SQLI) and `source2` (SQLI), sinks `sink1` arg 0 (XSS)
/// and `sink2` arg 1 (SQLI), sanitizer `sanitizeXss` (XSS). `ext` is left
/// unspecified and stays external.
std::string corpus_spec_json();

} // namespace taintflow
