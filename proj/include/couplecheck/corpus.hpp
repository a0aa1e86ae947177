#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "couplecheck/properties.hpp"

namespace couplecheck {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorpusOptions {
  std::string filter = "*";        // glob over entry ids
  std::optional<std::uint32_t> fuel;  // overrides the entries' fuel
  std::set<Route> routes = {Route::Proof, Route::Semantic, Route::Oracle};
  unsigned jobs = 1;
  bool seed_enum = false;
  Rational tol = Rational(1, 1 << 30);
};

struct CheckOutcome {
  std::string entry;
  std::string bindings;  // "nA=2, nB=1"
  std::string check;
  std::string route;
  bool pass = false;
  std::string detail;
  Rational slack = 0;
};

struct CorpusSummary {
  std::vector<std::string> entries;
  std::vector<CheckOutcome> outcomes;
  Rational max_slack = 0;
  bool all_pass() const;
};

// Runs every entry of corpus.json whose id matches; throws UsageError when
// the file is missing or nothing matches.
CorpusSummary run_corpus(const std::string& corpus_json, const CorpusOptions& opt);

std::string format_summary(const CorpusSummary& s, bool json);
nlohmann::ordered_json summary_to_json(const CorpusSummary& s);

}  // namespace couplecheck
