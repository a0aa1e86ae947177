#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "couplecheck/coupling.hpp"
#include "couplecheck/prhl.hpp"
#include "couplecheck/rational.hpp"
#include "couplecheck/typecheck.hpp"

namespace couplecheck {

enum class PropertyKind { Uniform, Indep, IndepViaUniform, CondIndep };
enum class Route { Proof, Semantic, Oracle };

std::string route_name(Route r);
Route parse_route(const std::string& s);

// Pr[E] = 0 for a conditional-independence query, an unusable variable
// list, or a script that cannot be loaded.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PropertyQuery {
  std::shared_ptr<const TypedProgram> program;
  // variable names or program expressions over the final state
  std::vector<std::string> vars;
  PropertyKind kind = PropertyKind::Uniform;
  // CondIndep: the conditioning event. Uniform: restricts the carrier to
  // the tuples satisfying it, read with the tracked expressions as names.
  std::string event;
  Route route = Route::Oracle;
  std::string proof_path;
  CheckOptions opt;
  std::optional<std::size_t> sample;  // spot-check this many instances
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

enum class Status { Certified, Failed, NotApplicable };
std::string status_name(Status s);

struct InstanceReport {
  std::string instance;  // "a=true, a'=false"
  bool ok = true;
  std::string detail;
};

struct Report {
  std::string property;  // UNIFORM, INDEP, COND-INDEP
  std::string subject;   // the tracked expressions, comma separated
  std::string event;
  Route route = Route::Oracle;
  Status status = Status::Certified;
  Rational slack = 0;          // truncation residual allowed as error
  Rational max_deviation = 0;  // oracle route
  std::size_t checked = 0;
  std::size_t total = 0;
  bool exhaustive = true;
  std::vector<InstanceReport> instances;
  std::vector<std::string> notes;
  std::string message;

  bool ok() const { return status == Status::Certified; }
  std::string line() const;  // UNIFORM x: CERTIFIED (slack 0)
};

Report check_uniform(const PropertyQuery& q);
Report check_indep_via_uniformity(const PropertyQuery& q);
Report check_indep_selfcomp(const PropertyQuery& q);
Report check_cond_indep(const PropertyQuery& q);
// dispatches on q.kind
Report check_property(const PropertyQuery& q);

// The judgment families behind the coupling routes, with metas a, a' for a
// single expression and a1..an, a1'..an' otherwise.
Judgment uniform_judgment(const PropertyQuery& q);
Judgment selfcomp_judgment(const PropertyQuery& q);
Judgment cond_indep_judgment(const PropertyQuery& q);

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// From an accepted (or semantically valid) instance whose post is
// E1{1} => E2{2} or E1{1} <=> E2{2}: Pr[E1] <= / = Pr[E2] on the outputs
// of the canonical initial states, with the truncation residual as slack.
// Without `accepted`, validate_semantic supplies the judgment.
Conclusion conclude_probability(const Judgment& j, const MetaEnv& env, const ProofResult* accepted,
                                const CheckOptions& opt = {});

// Exact probability of a final-state event, optionally conditioned.
struct ProbabilityResult {
  Rational value = 0;
  Rational residual = 0;
  Rational given = 1;  // Pr[given] when conditioned
};
ProbabilityResult probability(const TypedProgram& tp, const std::string& event, const std::string& given,
                              std::uint32_t fuel);

}  // namespace couplecheck
