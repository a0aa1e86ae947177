#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "couplecheck/assertion.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/sexpr.hpp"
#include "couplecheck/typecheck.hpp"

namespace couplecheck {

struct MetaDecl {
  std::string name;
  std::string type;  // type text, resolved against the left program
};

// |= left ~ right : pre => post, for every instance of the metas that
// satisfies `where`. Formulas are kept as text and typechecked per
// instance, with the metas inlined as constants.
struct Judgment {
  std::shared_ptr<const TypedProgram> left, right;
  std::vector<MetaDecl> metas;
  std::string where;
  std::string pre = "true";
  std::string post;
  std::string funs;  // extra `fun` declarations usable in formulas
};

using MetaEnv = std::vector<std::pair<std::string, Value>>;
std::string format_env(const MetaEnv& env);

// The typed view of one instance of a judgment.
struct Instance {
  Scope rel;              // x{1}, x{2}
  Scope left, right;      // program text of either side
  ExprPtr pre, post;
};
Instance make_instance(const Judgment& j, const MetaEnv& env);

// Every assignment of the metas over their carriers satisfying `where`,
// first meta slowest.
std::vector<MetaEnv> instantiate_family(const Judgment& j);

struct ProofScript {
  std::optional<SExpr> header;
  std::map<std::string, SExpr> defines;
  std::optional<SExpr> proof;
  std::string funs;  // (funs "...") forms, added to the judgment's
  std::string dir;  // for relative program paths in the header
};

ProofScript parse_proof_script(std::string_view text, const std::string& dir = ".");
ProofScript load_proof_file(const std::string& path);

// Builds the judgment of a script header. `main` is the program given on
// the command line; :left / :right default to it.
Judgment judgment_from_header(const SExpr& header, const std::shared_ptr<const TypedProgram>& main,
                              const std::string& dir, const Bindings& bindings = {});

struct CheckOptions {
  std::uint32_t fuel = 64;
  Rational tol = Rational(1, 1 << 30);
  std::uint64_t budget = 10'000'000;
  bool seed_enum = false;
};

struct Obligation {
  std::string path;
  std::string rule;
  std::string what;
  bool ok = true;
  std::string detail;
};

struct ProofResult {
  bool accepted = false;
  std::string rule;    // rejecting rule
  std::string path;    // position in the proof tree
  std::string reason;
  std::optional<CounterExample> cex;
  std::vector<Obligation> log;

  std::string to_string() const;
};

ProofResult check_proof(const Judgment& j, const MetaEnv& env, const ProofScript& script,
                        const CheckOptions& opt = {});

struct FamilyResult {
  bool accepted = true;
  std::vector<std::pair<MetaEnv, ProofResult>> instances;
};

FamilyResult check_proof_family(const Judgment& j, const ProofScript& script, const CheckOptions& opt = {});

// Decides the judgment on the seeds by exact execution and a max-flow
// coupling search, with the truncation residuals as slack.
struct SemanticResult {
  bool holds = true;
  std::size_t pairs = 0;  // seed pairs satisfying pre
  Rational max_slack = 0;
  std::optional<std::pair<State, State>> failing;
  std::string detail;
};

SemanticResult validate_semantic(const Judgment& j, const MetaEnv& env, const CheckOptions& opt = {});

// Set of states reachable at the end of b from `from` (loops run to a
// fixpoint, so the result does not depend on fuel).
std::set<State> reachable(const Block& b, const std::set<State>& from);

}  // namespace couplecheck
