#include "couplecheck/semantics.hpp"

#include <stdexcept>

#include "couplecheck/eval.hpp"

namespace couplecheck {

namespace {

struct Interp {
  std::uint32_t fuel;

  static std::uint32_t counter(const State& m, int g) {
    auto i = static_cast<std::size_t>(g);
    return i < m.fuel.size() ? m.fuel[i] : 0;
  }

  static void set_counter(State& m, int g, std::uint32_t v) {
    auto i = static_cast<std::size_t>(g);
    if (v != 0 && m.fuel.size() <= i) m.fuel.resize(i + 1, 0);
    if (i < m.fuel.size()) m.fuel[i] = v;
    while (!m.fuel.empty() && m.fuel.back() == 0) m.fuel.pop_back();
  }

  // m[x := v], or m[x[i] := v]; throws EvalError when v does not fit
  static State store(const Stmt& s, const State& m, const Value& v) {
    State out = m;
    auto slot = static_cast<std::size_t>(s.slot);
    if (s.index) {
      EvalEnv env;
      env.st[0] = &m;
      Value idx = eval(*s.index, env);
      const Value& cur = m.vals[slot];
      auto i = idx.as_int();
      if (i < 0 || static_cast<std::size_t>(i) >= cur.elems().size())
        throw EvalError("index " + std::to_string(i) + " out of range for " + s.var);
      auto elems = cur.elems();
      elems[static_cast<std::size_t>(i)] = v;
      out.vals[slot] = Value::list(std::move(elems));
      return out;
    }
    out.vals[slot] = v;
    return out;
  }

  StateDist run(const Block& b, StateDist mu) const {
    for (const auto& s : b) mu = step(*s, std::move(mu));
    return mu;
  }

  StateDist step(const Stmt& s, StateDist mu) const {
    switch (s.kind) {
      case StmtKind::Skip:
        return mu;
      case StmtKind::Abort: {
        StateDist out;
        out.residual = mu.residual;
        out.error = mu.error;
        out.first_error = mu.first_error;
        return out;
      }
      case StmtKind::Assign: {
        StateDist out;
        out.residual = mu.residual;
        out.error = mu.error;
        out.first_error = mu.first_error;
        for (const auto& [m, p] : mu.mass) {
          try {
            EvalEnv env;
            env.st[0] = &m;
            out.add(store(s, m, eval(*s.expr, env)), p);
          } catch (const EvalError& e) {
            out.add_error(p, e.what());
          }
        }
        return out;
      }
      case StmtKind::Sample: {
        const auto& d = *s.dist;
        auto vals = eval_dist(d);
        StateDist out;
        out.residual = mu.residual;
        out.error = mu.error;
        out.first_error = mu.first_error;
        for (const auto& [m, p] : mu.mass) {
          for (const auto& [v, q] : vals.mass) {
            try {
              out.add(store(s, m, v), p * q);
            } catch (const EvalError& e) {
              out.add_error(p * q, e.what());
            }
          }
        }
        return out;
      }
      case StmtKind::If: {
        StateDist t, f;
        StateDist out;
        out.residual = mu.residual;
        out.error = mu.error;
        out.first_error = mu.first_error;
        for (const auto& [m, p] : mu.mass) {
          try {
            EvalEnv env;
            env.st[0] = &m;
            (eval_bool(*s.expr, env) ? t : f).add(m, p);
          } catch (const EvalError& e) {
            out.add_error(p, e.what());
          }
        }
        merge(out, run(s.body, std::move(t)));
        merge(out, run(s.els, std::move(f)));
        return out;
      }
      case StmtKind::While:
        return loop(s, std::move(mu));
      case StmtKind::For:
        throw std::logic_error("exec: program must be desugared");
    }
    return mu;
  }

  static void merge(StateDist& into, const StateDist& from) {
    for (const auto& [m, p] : from.mass) into.add(m, p);
    into.residual += from.residual;
    into.add_error(from.error, from.first_error);
  }

  StateDist loop(const Stmt& s, StateDist mu) const {
    StateDist out;
    out.residual = mu.residual;
    out.error = mu.error;
    out.first_error = mu.first_error;
    StateDist work;
    for (const auto& [m, p] : mu.mass) {
      if (s.group_start) {
        State r = m;
        set_counter(r, s.group, 0);
        work.add(r, p);
      } else {
        work.add(m, p);
      }
    }
    while (!work.mass.empty()) {
      StateDist cont;
      for (const auto& [m, p] : work.mass) {
        bool g;
        try {
          EvalEnv env;
          env.st[0] = &m;
          g = eval_bool(*s.expr, env);
        } catch (const EvalError& e) {
          out.add_error(p, e.what());
          continue;
        }
        if (!g) {
          if (s.group_end) {
            State r = m;
            set_counter(r, s.group, 0);
            out.add(r, p);
          } else {
            out.add(m, p);
          }
        } else if (counter(m, s.group) < fuel) {
          State r = m;
          set_counter(r, s.group, counter(m, s.group) + 1);
          cont.add(r, p);
        } else {
          out.residual += p;
        }
      }
      work = run(s.body, std::move(cont));
      out.residual += work.residual;
      out.add_error(work.error, work.first_error);
      work.residual = 0;
      work.error = 0;
    }
    return out;
  }
};

}  // namespace

ValueDist eval_dist(const DistExpr& d) {
  ValueDist out;
  if (d.kind == DistKind::Bernoulli) {
    out.add(Value::boolean(true), d.p);
    out.add(Value::boolean(false), Rational(1) - d.p);
    return out;
  }
  Rational each(1, static_cast<unsigned long>(d.support.size()));
  for (const auto& v : d.support) out.add(v, each);
  return out;
}

StateDist exec_dist(const Block& b, const StateDist& mu, std::uint32_t fuel) { return Interp{fuel}.run(b, mu); }

StateDist exec(const Block& b, const State& m, std::uint32_t fuel) { return Interp{fuel}.run(b, dirac(m)); }

StateDist exec_stmt(const Stmt& s, const State& m, std::uint32_t fuel) { return Interp{fuel}.step(s, dirac(m)); }

StateDist run_program(const TypedProgram& tp, std::uint32_t fuel) { return exec(tp.body, tp.init, fuel); }

std::vector<State> initial_states(const TypedProgram& tp, bool enumerate_all) {
  if (!enumerate_all) return {tp.init};
  std::vector<State> out{State{}};
  for (const auto& v : tp.layout->vars) {
    auto vals = enumerate_type(*v.type);
    std::vector<State> next;
    if (out.size() * vals.size() > 10'000'000) throw std::length_error("initial-state enumeration too large");
    for (const auto& s : out)
      for (const auto& x : vals) {
        State t = s;
        t.vals.push_back(x);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
  return out;
}

std::string LosslessResult::to_string() const {
  switch (kind) {
    case LosslessKind::Exact: return "lossless (exact)";
    case LosslessKind::Within: return "lossless within residual " + couplecheck::to_string(residual);
    case LosslessKind::NotLossless:
      return "not lossless (deficit " + couplecheck::to_string(deficit) + ", residual " + couplecheck::to_string(residual) + ")";
  }
  return "";
}

LosslessResult check_lossless(const Block& b, const std::vector<State>& from, std::uint32_t fuel, const Rational& tol) {
  LosslessResult r;
  for (const auto& m : from) {
    auto mu = exec(b, m, fuel);
    Rational deficit = Rational(1) - mu.weight() - mu.residual;
    if (mu.residual > r.residual) r.residual = mu.residual;
    if (deficit > r.deficit) r.deficit = deficit;
  }
  if (r.deficit > 0 || r.residual > tol)
    r.kind = LosslessKind::NotLossless;
  else if (r.residual > 0)
    r.kind = LosslessKind::Within;
  else
    r.kind = LosslessKind::Exact;
  return r;
}

LosslessResult check_lossless(const TypedProgram& tp, std::uint32_t fuel, const Rational& tol, bool enumerate_all) {
  return check_lossless(tp.body, initial_states(tp, enumerate_all), fuel, tol);
}

}  // namespace couplecheck
