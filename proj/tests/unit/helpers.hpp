#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "couplecheck/rational.hpp"
#include "couplecheck/subdist.hpp"
#include "couplecheck/typecheck.hpp"

namespace testing {

inline std::string corpus(const std::string& file) { return std::string(CORPUS_DIR) + "/" + file; }

inline std::shared_ptr<const couplecheck::TypedProgram> load(const std::string& text,
                                                            const couplecheck::Bindings& b = {}) {
  return std::make_shared<const couplecheck::TypedProgram>(couplecheck::load_program(text, b));
}

inline std::shared_ptr<const couplecheck::TypedProgram> load_corpus(const std::string& file,
                                                                   const couplecheck::Bindings& b = {}) {
  return std::make_shared<const couplecheck::TypedProgram>(couplecheck::load_program_file(corpus(file), b));
}

// Small random programs over x, y : bool and u, v : range(3); i and j are
// the counters of the outer and inner for loops.
class ProgramGen {
 public:
  explicit ProgramGen(std::uint64_t seed, bool loops = false) : rng_(seed), loops_(loops) {}

  std::string program() {
    std::string body;
    int n = pick(2, 5);
    for (int i = 0; i < n; ++i) body += stmt(2);
    return "program rnd\n"
           "var x : bool = false;\nvar y : bool = false;\n"
           "var u : range(3) = 0;\nvar v : range(3) = 0;\nvar i : range(3) = 0;\nvar j : range(3) = 0;\n"
           "begin\n" + body + "end\n";
  }

  std::string bool_expr() {
    switch (pick(0, 5)) {
      case 0: return "x";
      case 1: return "!y";
      case 2: return "x xor y";
      case 3: return "u = v";
      case 4: return "u < 2 && y";
      default: return "x || v = 1";
    }
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string bias() {
    static const char* ps[] = {"1/2", "1/3", "2/3", "1/4"};
    return ps[pick(0, 3)];
  }

  std::string stmt(int depth) {
    int k = pick(0, depth > 0 ? (loops_ ? 9 : 8) : 5);
    switch (k) {
      case 0: return "x <$ flip(" + bias() + ");\n";
      case 1: return "y <$ flip(" + bias() + ");\n";
      case 2: return "u <$ uniform(range(3));\n";
      case 3: return "v <$ uniform{0, 2};\n";
      case 4: return (pick(0, 1) ? "x := " : "y := ") + bool_expr() + ";\n";
      case 5: return pick(0, 1) ? "u := (u + v) % 3;\n" : "v := if x then 1 else 2;\n";
      case 6:
      case 7: return "if " + bool_expr() + " {\n" + stmt(depth - 1) + "} else {\n" + stmt(depth - 1) + "}\n";
      case 8: return std::string("for ") + (depth == 2 ? "i" : "j") + " = 0 to 1 {\n" + stmt(depth - 1) + "}\n";
      default: return "while x {\n" + stmt(depth - 1) + "x <$ flip(1/2);\n}\n";
    }
  }

  std::mt19937_64 rng_;
  bool loops_;
};

// Random sub-distribution over 0..n-1 with small denominators.
inline couplecheck::SubDist<int> random_dist(std::mt19937_64& rng, int n, bool proper = true) {
  std::uniform_int_distribution<int> w(0, 4);
  std::vector<int> ws;
  int total = 0;
  for (int i = 0; i < n; ++i) {
    ws.push_back(w(rng));
    total += ws.back();
  }
  if (total == 0) {
    ws[0] = 1;
    total = 1;
  }
  int denom = proper ? total : total + std::uniform_int_distribution<int>(0, 3)(rng);
  couplecheck::SubDist<int> d;
  for (int i = 0; i < n; ++i) {
    couplecheck::Rational q(ws[i], denom);
    q.canonicalize();
    d.add(i, q);
  }
  return d;
}

}  // namespace testing
