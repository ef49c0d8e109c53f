#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "swerve/errors.hpp"
#include "swerve/numfmt.hpp"

namespace swerve::symreg {

enum class Op : std::uint8_t { Constant, Variable, Sin, Cos, Add, Mul };

inline int arity(Op op) {
  switch (op) {
    case Op::Constant:
    case Op::Variable:
      return 0;
    case Op::Sin:
    case Op::Cos:
      return 1;
    case Op::Add:
    case Op::Mul:
      return 2;
  }
  return 0;
}

/// Value-semantic expression tree over {+, *, sin, cos, constants, x}.
/// Subtraction is expressed through negative constants.
struct Expr {
  Op op = Op::Constant;
  double value = 0.0;  // Op::Constant only
  std::vector<Expr> children;

  static Expr constant(double v) { return Expr{Op::Constant, v, {}}; }
  static Expr variable() { return Expr{Op::Variable, 0.0, {}}; }
  static Expr sin(Expr e) { return Expr{Op::Sin, 0.0, {std::move(e)}}; }
  static Expr cos(Expr e) { return Expr{Op::Cos, 0.0, {std::move(e)}}; }
  static Expr add(Expr l, Expr r) {
    return Expr{Op::Add, 0.0, {std::move(l), std::move(r)}};
  }
  static Expr mul(Expr l, Expr r) {
    return Expr{Op::Mul, 0.0, {std::move(l), std::move(r)}};
  }
};

/// Node count, the complexity measure used throughout the search.
inline int complexity(const Expr& e) {
  int count = 1;
  for (const Expr& c : e.children) count += complexity(c);
  return count;
}

inline double eval_expr(const Expr& e, double x) {
  switch (e.op) {
    case Op::Constant:
      return e.value;
    case Op::Variable:
      return x;
    case Op::Sin:
      return std::sin(eval_expr(e.children[0], x));
    case Op::Cos:
      return std::cos(eval_expr(e.children[0], x));
    case Op::Add:
      return eval_expr(e.children[0], x) + eval_expr(e.children[1], x);
    case Op::Mul:
      return eval_expr(e.children[0], x) * eval_expr(e.children[1], x);
  }
  return 0.0;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.children.size() != b.children.size()) return false;
  if (a.op == Op::Constant && a.value != b.value) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

namespace detail {

inline bool is_negative_leader(const Expr& e) {
  if (e.op == Op::Constant) return e.value < 0.0;
  if (e.op == Op::Mul) return is_negative_leader(e.children[0]);
  return false;
}

inline Expr negate_leader(Expr e) {
  if (e.op == Op::Constant) {
    e.value = -e.value;
    return e;
  }
  e.children[0] = negate_leader(std::move(e.children[0]));
  return e;
}

inline std::string print(const Expr& e, bool parenthesize_add) {
  switch (e.op) {
    case Op::Constant:
      return swerve::detail::format_g9(e.value);
    case Op::Variable:
      return "x";
    case Op::Sin:
      return "sin(" + print(e.children[0], false) + ")";
    case Op::Cos:
      return "cos(" + print(e.children[0], false) + ")";
    case Op::Add: {
      const Expr& rhs = e.children[1];
      std::string out = print(e.children[0], false);
      if (is_negative_leader(rhs))
        out += " - " + print(negate_leader(rhs), true);
      else
        out += " + " + print(rhs, true);
      if (parenthesize_add) out = "(" + out + ")";
      return out;
    }
    case Op::Mul:
      return print(e.children[0], true) + "*" + print(e.children[1], true);
  }
  return {};
}

}  // namespace detail

/// Canonical infix rendering with constants at 9 significant digits;
/// additions of negative-led terms print as subtraction, e.g.
/// "-0.335*sin(0.046*x - 4.137) - 0.968".
inline std::string to_string(const Expr& e) { return detail::print(e, false); }

/// Constant folding plus the identities x+0 -> x, x*1 -> x, x*0 -> 0,
/// applied bottom-up. The result evaluates identically wherever finite.
inline Expr simplify(Expr e) {
  for (Expr& c : e.children) c = simplify(std::move(c));

  const auto is_const = [](const Expr& n, double v) {
    return n.op == Op::Constant && n.value == v;
  };
  switch (e.op) {
    case Op::Constant:
    case Op::Variable:
      return e;
    case Op::Sin:
      if (e.children[0].op == Op::Constant)
        return Expr::constant(std::sin(e.children[0].value));
      return e;
    case Op::Cos:
      if (e.children[0].op == Op::Constant)
        return Expr::constant(std::cos(e.children[0].value));
      return e;
    case Op::Add:
      if (e.children[0].op == Op::Constant && e.children[1].op == Op::Constant)
        return Expr::constant(e.children[0].value + e.children[1].value);
      if (is_const(e.children[0], 0.0)) return std::move(e.children[1]);
      if (is_const(e.children[1], 0.0)) return std::move(e.children[0]);
      return e;
    case Op::Mul:
      if (e.children[0].op == Op::Constant && e.children[1].op == Op::Constant)
        return Expr::constant(e.children[0].value * e.children[1].value);
      if (is_const(e.children[0], 1.0)) return std::move(e.children[1]);
      if (is_const(e.children[1], 1.0)) return std::move(e.children[0]);
      if (is_const(e.children[0], 0.0) || is_const(e.children[1], 0.0))
        return Expr::constant(0.0);
      return e;
  }
  return e;
}

/// Preorder subtree access; index 0 is the root.
inline const Expr& subtree_at(const Expr& e, int index) {
  const Expr* found = nullptr;
  int seen = 0;
  const auto walk = [&](const auto& self, const Expr& node) -> void {
    if (found) return;
    if (seen++ == index) {
      found = &node;
      return;
    }
    for (const Expr& c : node.children) self(self, c);
  };
  walk(walk, e);
  if (!found) throw Error(ErrorKind::InvalidInput, "expression subtree index out of range");
  return *found;
}

inline void replace_subtree(Expr& e, int index, Expr replacement) {
  int seen = 0;
  const auto walk = [&](const auto& self, Expr& node) -> bool {
    if (seen++ == index) {
      node = std::move(replacement);
      return true;
    }
    for (Expr& c : node.children)
      if (self(self, c)) return true;
    return false;
  };
  if (!walk(walk, e))
    throw Error(ErrorKind::InvalidInput, "expression subtree index out of range");
}

namespace detail {

/// Log-uniform magnitude in [0.01, 10] with random sign: spans the scales
/// seen in swerve-trajectory constants without dwarfing the data.
inline double random_constant(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double magnitude = std::pow(10.0, -2.0 + 3.0 * unit(rng));
  return unit(rng) < 0.5 ? -magnitude : magnitude;
}

}  // namespace detail

/// Random tree via the grow method: leaves are x or a random constant,
/// interior nodes uniform over {sin, cos, +, *}.
inline Expr random_expr(std::mt19937_64& rng, int max_depth) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (max_depth <= 0 || unit(rng) < 0.25)
    return unit(rng) < 0.5 ? Expr::variable()
                           : Expr::constant(detail::random_constant(rng));
  std::uniform_int_distribution<int> pick_op(0, 3);
  switch (pick_op(rng)) {
    case 0:
      return Expr::sin(random_expr(rng, max_depth - 1));
    case 1:
      return Expr::cos(random_expr(rng, max_depth - 1));
    case 2:
      return Expr::add(random_expr(rng, max_depth - 1), random_expr(rng, max_depth - 1));
    default:
      return Expr::mul(random_expr(rng, max_depth - 1), random_expr(rng, max_depth - 1));
  }
}

namespace detail {

inline void collect_constant_indices(const Expr& e, int& index, std::vector<int>& out) {
  if (e.op == Op::Constant) out.push_back(index);
  ++index;
  for (const Expr& c : e.children) collect_constant_indices(c, index, out);
}

}  // namespace detail

/// One random structural edit: perturb a constant, swap an operator for one
/// of the same arity, graft a random subtree, or hoist a child over its
/// parent (subtree deletion). Results exceeding max_complexity are retried
/// a few times, then the parent is returned unchanged.
inline Expr mutate(const Expr& e, std::mt19937_64& rng, int max_complexity) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int attempt = 0; attempt < 8; ++attempt) {
    Expr out = e;
    const int nodes = complexity(out);
    std::uniform_int_distribution<int> pick_node(0, nodes - 1);
    const int kind = std::uniform_int_distribution<int>(0, 3)(rng);

    if (kind == 0) {  // perturb a constant
      std::vector<int> const_indices;
      int idx = 0;
      detail::collect_constant_indices(out, idx, const_indices);
      if (const_indices.empty()) continue;
      const int target =
          const_indices[std::uniform_int_distribution<std::size_t>(
              0, const_indices.size() - 1)(rng)];
      const double old = subtree_at(out, target).value;
      replace_subtree(out, target,
                      Expr::constant(old * (1.0 + 0.25 * gauss(rng)) +
                                     0.02 * gauss(rng)));
      return out;
    }
    if (kind == 1) {  // swap an operator of equal arity
      const int target = pick_node(rng);
      Expr node = subtree_at(out, target);
      switch (node.op) {
        case Op::Sin:
          node.op = Op::Cos;
          break;
        case Op::Cos:
          node.op = Op::Sin;
          break;
        case Op::Add:
          node.op = Op::Mul;
          break;
        case Op::Mul:
          node.op = Op::Add;
          break;
        case Op::Constant:
        case Op::Variable:
          node = unit(rng) < 0.5 ? Expr::variable()
                                 : Expr::constant(detail::random_constant(rng));
          break;
      }
      replace_subtree(out, target, std::move(node));
      return out;
    }
    if (kind == 2) {  // graft a random subtree
      const int target = pick_node(rng);
      replace_subtree(out, target, random_expr(rng, 3));
      if (complexity(out) <= max_complexity) return out;
      continue;
    }
    // hoist: replace a node by one of its children (or a fresh leaf at leaves)
    const int target = pick_node(rng);
    Expr node = subtree_at(out, target);
    if (node.children.empty()) {
      replace_subtree(out, target,
                      unit(rng) < 0.5 ? Expr::variable()
                                      : Expr::constant(detail::random_constant(rng)));
    } else {
      const std::size_t child = std::uniform_int_distribution<std::size_t>(
          0, node.children.size() - 1)(rng);
      replace_subtree(out, target, std::move(node.children[child]));
    }
    return out;
  }
  return e;
}

/// Replaces a uniformly chosen subtree of a with a uniformly chosen subtree
/// of b, retrying under the complexity cap and falling back to a copy of a.
inline Expr crossover(const Expr& a, const Expr& b, std::mt19937_64& rng,
                      int max_complexity) {
  const int nodes_a = complexity(a);
  const int nodes_b = complexity(b);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Expr out = a;
    const int site = std::uniform_int_distribution<int>(0, nodes_a - 1)(rng);
    const int donor = std::uniform_int_distribution<int>(0, nodes_b - 1)(rng);
    replace_subtree(out, site, subtree_at(b, donor));
    if (complexity(out) <= max_complexity) return out;
  }
  return a;
}

}  // namespace swerve::symreg
