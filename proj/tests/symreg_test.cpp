#include <catch2/catch_amalgamated.hpp>

#include <swerve/swerve.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using swerve::symreg::canonicalize;
using swerve::symreg::complexity;
using swerve::symreg::crossover;
using swerve::symreg::eval_expr;
using swerve::symreg::Expr;
using swerve::symreg::fit_sinusoid;
using swerve::symreg::mse;
using swerve::symreg::mutate;
using swerve::symreg::optimize_constants;
using swerve::symreg::prune_insignificant_terms;
using swerve::symreg::random_expr;
using swerve::symreg::run_search;
using swerve::symreg::simplify;
using swerve::symreg::SinusoidParams;
using swerve::symreg::SymRegConfig;
using swerve::symreg::to_string;

namespace {

Expr narrow_sine_tree() {
  // -0.335*sin(0.046*x - 4.137) - 0.968
  return Expr::add(
      Expr::mul(Expr::constant(-0.335),
                Expr::sin(Expr::add(Expr::mul(Expr::constant(0.046), Expr::variable()),
                                    Expr::constant(-4.137)))),
      Expr::constant(-0.968));
}

std::vector<double> linspace_grid(double lo, double hi, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * i / (n - 1);
  return xs;
}

std::vector<double> apply(const std::vector<double>& xs, double (*f)(double)) {
  std::vector<double> ys(xs.size());
  std::transform(xs.begin(), xs.end(), ys.begin(), f);
  return ys;
}

}  // namespace

TEST_CASE("expression evaluation and printing") {
  SECTION("hand-evaluated examples") {
    CHECK(eval_expr(Expr::sin(Expr::constant(0.0)), 5.0) == 0.0);
    CHECK(eval_expr(Expr::cos(Expr::constant(0.0)), 5.0) == 1.0);
    Expr sq_plus_one = Expr::add(Expr::mul(Expr::variable(), Expr::variable()),
                                 Expr::constant(1.0));
    CHECK(eval_expr(sq_plus_one, 3.0) == 10.0);
    CHECK_THAT(eval_expr(narrow_sine_tree(), 0.0),
               Catch::Matchers::WithinAbs(-1.249, 1e-3));
  }

  SECTION("complexity counts nodes") {
    CHECK(complexity(Expr::variable()) == 1);
    CHECK(complexity(Expr::sin(Expr::variable())) == 2);
    Expr sq_plus_one = Expr::add(Expr::mul(Expr::variable(), Expr::variable()),
                                 Expr::constant(1.0));
    CHECK(complexity(sq_plus_one) == 5);
  }

  SECTION("infix printing uses nine significant digits") {
    CHECK(to_string(Expr::constant(0.123456789012)) == "0.123456789");
    CHECK(to_string(Expr::add(Expr::variable(), Expr::constant(1.0))) == "x + 1");
    CHECK(to_string(narrow_sine_tree()) == "-0.335*sin(0.046*x - 4.137) - 0.968");
  }
}

TEST_CASE("algebraic simplification") {
  SECTION("structural examples") {
    Expr folded = Expr::mul(Expr::add(Expr::constant(2.0), Expr::constant(3.0)),
                            Expr::variable());
    CHECK(to_string(simplify(folded)) == "5*x");

    Expr identities = Expr::add(Expr::mul(Expr::variable(), Expr::constant(1.0)),
                                Expr::constant(0.0));
    CHECK(to_string(simplify(identities)) == "x");

    Expr zero_product = Expr::mul(Expr::sin(Expr::constant(0.0)),
                                  Expr::cos(Expr::variable()));
    CHECK(to_string(simplify(zero_product)) == "0");
  }

  SECTION("preserves values on random trees") {
    std::mt19937_64 rng(101);
    const std::vector<double> grid = linspace_grid(-5.0, 5.0, 100);
    for (int trial = 0; trial < 10000; ++trial) {
      Expr e = random_expr(rng, 5);
      Expr s = simplify(e);
      CHECK(complexity(s) <= complexity(e));
      for (double x : grid) {
        double a = eval_expr(e, x);
        double b = eval_expr(s, x);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        REQUIRE(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
      }
    }
  }
}

TEST_CASE("random generation, mutation, crossover") {
  SECTION("same seed yields the same trees") {
    std::mt19937_64 a(42), b(42);
    for (int i = 0; i < 100; ++i)
      REQUIRE(to_string(random_expr(a, 4)) == to_string(random_expr(b, 4)));

    std::mt19937_64 ma(42), mb(42);
    Expr ea = Expr::add(Expr::mul(Expr::variable(), Expr::variable()), Expr::constant(1.0));
    Expr eb = ea;
    for (int i = 0; i < 50; ++i) {
      ea = mutate(ea, ma, 25);
      eb = mutate(eb, mb, 25);
      REQUIRE(to_string(ea) == to_string(eb));
    }
  }

  SECTION("mutation and crossover respect the complexity cap") {
    std::mt19937_64 rng(7);
    std::vector<Expr> pool;
    while (pool.size() < 100) {
      Expr e = random_expr(rng, 4);
      if (complexity(e) <= 25) pool.push_back(std::move(e));
    }
    for (int i = 0; i < 10000; ++i) {
      Expr m = mutate(pool[i % pool.size()], rng, 25);
      REQUIRE(complexity(m) <= 25);
      Expr c = crossover(pool[i % pool.size()], pool[(i * 7 + 3) % pool.size()], rng, 25);
      REQUIRE(complexity(c) <= 25);
    }
  }

  SECTION("crossover of two leaves yields one of the leaves") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      Expr c = crossover(Expr::variable(), Expr::constant(2.5), rng, 25);
      std::string s = to_string(c);
      bool is_leaf = (s == "x" || s == "2.5");
      REQUIRE(is_leaf);
    }
  }
}

TEST_CASE("constant refinement") {
  std::vector<double> xs = linspace_grid(0.0, 4.9, 50);

  SECTION("a lone constant moves to the sample mean") {
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = 3.0 + ((i % 2) ? 0.5 : -0.5);
    Expr tuned = optimize_constants(Expr::constant(7.0), xs, ys);
    REQUIRE(tuned.op == swerve::symreg::Op::Constant);
    CHECK_THAT(tuned.value, Catch::Matchers::WithinAbs(3.0, 1e-9));
  }

  SECTION("a scaled variable recovers the slope") {
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = 2.0 * xs[i];
    Expr tuned = optimize_constants(Expr::mul(Expr::constant(0.5), Expr::variable()), xs, ys);
    CHECK_THAT(tuned.children[0].value, Catch::Matchers::WithinAbs(2.0, 1e-6));
    CHECK(mse(tuned, xs, ys) < 1e-12);
  }

  SECTION("a nearby sinusoid start converges to the generating constants") {
    std::vector<double> fx = linspace_grid(0.0, 200.0, 201);
    std::vector<double> fy(fx.size());
    for (std::size_t i = 0; i < fx.size(); ++i)
      fy[i] = -0.371 * std::sin(-0.078 * fx[i] - 9.72) + 1.456;
    Expr start = Expr::add(
        Expr::mul(Expr::constant(-0.4),
                  Expr::sin(Expr::add(Expr::mul(Expr::constant(-0.08), Expr::variable()),
                                      Expr::constant(-9.7)))),
        Expr::constant(1.5));
    Expr tuned = optimize_constants(start, fx, fy, 100);
    const Expr& phase_arg = tuned.children[0].children[1].children[0];
    CHECK_THAT(tuned.children[0].children[0].value, Catch::Matchers::WithinAbs(-0.371, 1e-3));
    CHECK_THAT(phase_arg.children[0].children[0].value,
               Catch::Matchers::WithinAbs(-0.078, 1e-3));
    CHECK_THAT(phase_arg.children[1].value, Catch::Matchers::WithinAbs(-9.72, 1e-3));
    CHECK_THAT(tuned.children[1].value, Catch::Matchers::WithinAbs(1.456, 1e-3));
    CHECK(mse(tuned, fx, fy) < 1e-12);
  }

  SECTION("refinement never increases the mean squared error") {
    std::mt19937_64 rng(55);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < ys.size(); ++i)
      ys[i] = std::sin(0.8 * xs[i]) + 0.3 * xs[i];
    int checked = 0;
    while (checked < 500) {
      Expr e = random_expr(rng, 4);
      double before = mse(e, xs, ys);
      if (!std::isfinite(before)) continue;
      Expr tuned = optimize_constants(e, xs, ys, 25);
      REQUIRE(mse(tuned, xs, ys) <= before + 1e-12 * (1.0 + before));
      ++checked;
    }
  }

  SECTION("rejects mismatched or tiny inputs") {
    CHECK_THROWS_AS(optimize_constants(Expr::variable(), {1.0, 2.0}, {1.0}),
                    swerve::Error);
    CHECK_THROWS_AS(optimize_constants(Expr::variable(), {1.0}, {1.0}), swerve::Error);
  }
}

TEST_CASE("pareto search") {
  std::vector<double> xs = linspace_grid(-3.0, 3.0, 61);
  std::vector<double> squares(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) squares[i] = xs[i] * xs[i];

  SECTION("constant data collapses to a single constant") {
    std::vector<double> ys(xs.size(), 3.7);
    SymRegConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 3;
    cfg.seed = 7;
    auto res = run_search(xs, ys, cfg);
    REQUIRE(!res.front.empty());
    CHECK(res.front.front().complexity == 1);
    CHECK(res.front.front().mse < 1e-9);
    CHECK(res.best.mse < 1e-9);
  }

  SECTION("recovers x*x from noiseless data") {
    SymRegConfig cfg;
    cfg.population_size = 200;
    cfg.generations = 50;
    cfg.seed = 1;
    auto res = run_search(xs, squares, cfg);
    bool found = false;
    for (const auto& ind : res.front)
      if (ind.complexity <= 3 && ind.mse < 1e-9) found = true;
    CHECK(found);
    CHECK(res.best.mse < 1e-9);
  }

  SECTION("identical configuration reproduces the front exactly") {
    SymRegConfig cfg;
    cfg.population_size = 64;
    cfg.generations = 10;
    cfg.seed = 9;
    auto r1 = run_search(xs, squares, cfg);
    auto r2 = run_search(xs, squares, cfg);
    REQUIRE(r1.front.size() == r2.front.size());
    for (std::size_t i = 0; i < r1.front.size(); ++i) {
      CHECK(to_string(r1.front[i].expr) == to_string(r2.front[i].expr));
      CHECK(std::memcmp(&r1.front[i].mse, &r2.front[i].mse, sizeof(double)) == 0);
      CHECK(r1.front[i].complexity == r2.front[i].complexity);
    }
    CHECK(to_string(r1.best.expr) == to_string(r2.best.expr));
  }

  SECTION("the front is a valid pareto set") {
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = std::sin(xs[i]) + 0.5 * xs[i];
    SymRegConfig cfg;
    cfg.population_size = 80;
    cfg.generations = 15;
    cfg.seed = 12;
    auto res = run_search(xs, ys, cfg);
    REQUIRE(!res.front.empty());
    double best_mse = res.front.front().mse;
    for (std::size_t i = 0; i < res.front.size(); ++i) {
      CHECK(res.front[i].complexity <= cfg.max_complexity);
      best_mse = std::min(best_mse, res.front[i].mse);
      if (i == 0) continue;
      CHECK(res.front[i].complexity > res.front[i - 1].complexity);
      CHECK(res.front[i].mse < res.front[i - 1].mse);
    }
    CHECK(res.best.mse == best_mse);
  }

  SECTION("rejects bad samples and bad configuration") {
    std::vector<double> short_xs(5, 1.0), short_ys(5, 1.0);
    CHECK_THROWS_AS(run_search(short_xs, short_ys), swerve::Error);
    CHECK_THROWS_AS(run_search(xs, short_ys), swerve::Error);

    auto bad = [&](auto&& tweak) {
      SymRegConfig cfg;
      tweak(cfg);
      CHECK_THROWS_AS(cfg.validate(), swerve::Error);
    };
    bad([](SymRegConfig& c) { c.population_size = 1; });
    bad([](SymRegConfig& c) { c.n_islands = 0; });
    bad([](SymRegConfig& c) { c.generations = 0; });
    bad([](SymRegConfig& c) { c.max_complexity = 0; });
    bad([](SymRegConfig& c) { c.parsimony_init = -1.0; });
    bad([](SymRegConfig& c) { c.crossover_rate = 1.5; });
    bad([](SymRegConfig& c) { c.mutation_rate = -0.1; });
    bad([](SymRegConfig& c) { c.tournament_size = 0; });
  }
}

TEST_CASE("term pruning") {
  SECTION("drops a numerically irrelevant term") {
    std::vector<double> xs = linspace_grid(-5.0, 5.0, 101);
    std::vector<double> ys = xs;
    Expr noisy = Expr::add(Expr::variable(),
                           Expr::mul(Expr::constant(1e-12), Expr::sin(Expr::variable())));
    int deletions = -1;
    Expr pruned = prune_insignificant_terms(noisy, xs, ys, 1e-3, &deletions);
    CHECK(to_string(pruned) == "x");
    CHECK(deletions == 1);

    CHECK(to_string(prune_insignificant_terms(Expr::variable(), xs, ys, 1e-3)) == "x");
  }

  SECTION("drops a small-amplitude nuisance oscillation") {
    std::vector<double> xs = linspace_grid(0.0, 7.0, 101);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = 2.0 * xs[i];
    Expr noisy = Expr::add(
        Expr::mul(Expr::constant(2.0), Expr::variable()),
        Expr::mul(Expr::constant(0.001), Expr::cos(Expr::mul(Expr::constant(50.0), Expr::variable()))));
    Expr pruned = prune_insignificant_terms(noisy, xs, ys, 1e-2);
    CHECK(to_string(pruned) == "2*x");
  }

  SECTION("final error stays within the accumulated budget") {
    std::mt19937_64 rng(202);
    std::vector<double> xs = linspace_grid(0.0, 7.8, 40);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      ys[i] = std::sin(0.3 * xs[i]) + 0.5 * xs[i];
    const double tol = 0.05;
    int checked = 0;
    while (checked < 300) {
      Expr e = random_expr(rng, 4);
      double before = mse(e, xs, ys);
      if (!std::isfinite(before)) continue;
      int deletions = -1;
      Expr pruned = prune_insignificant_terms(e, xs, ys, tol, &deletions);
      REQUIRE(deletions >= 0);
      CHECK(complexity(pruned) <= complexity(e));
      double after = mse(pruned, xs, ys);
      double budget = before * (1.0 + tol * deletions) + 1e-9 * (1.0 + before);
      REQUIRE(after <= budget);
      ++checked;
    }
  }

  SECTION("rejects a negative tolerance") {
    std::vector<double> xs = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(prune_insignificant_terms(Expr::variable(), xs, xs, -0.1),
                    swerve::Error);
  }
}

TEST_CASE("sinusoid fitting") {
  const std::vector<double> grid = linspace_grid(0.0, 200.0, 201);

  SECTION("recovers the narrow-case curve in canonical form") {
    std::vector<double> ys(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      ys[i] = -0.335 * std::sin(0.046 * grid[i] - 4.137) - 0.968;
    SinusoidParams p = fit_sinusoid(grid, ys);
    CHECK_THAT(p.k, Catch::Matchers::WithinAbs(0.335, 1e-6));
    CHECK_THAT(p.a, Catch::Matchers::WithinAbs(0.046, 1e-6));
    CHECK_THAT(p.b, Catch::Matchers::WithinAbs(-4.137 + std::numbers::pi, 1e-6));
    CHECK_THAT(p.c, Catch::Matchers::WithinAbs(-0.968, 1e-6));
  }

  SECTION("recovers the wide-case curve with negligible residual") {
    std::vector<double> ys(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      ys[i] = -0.371 * std::sin(-0.078 * grid[i] - 9.72) + 1.456;
    SinusoidParams p = fit_sinusoid(grid, ys);
    CHECK_THAT(p.k, Catch::Matchers::WithinAbs(0.371, 1e-6));
    CHECK_THAT(p.a, Catch::Matchers::WithinAbs(0.078, 1e-6));
    CHECK_THAT(p.b, Catch::Matchers::WithinAbs(9.72 - 4.0 * std::numbers::pi, 1e-6));
    CHECK_THAT(p.c, Catch::Matchers::WithinAbs(1.456, 1e-6));
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(p.eval(grid[i]) - ys[i]));
    CHECK(worst < 1e-9);
  }

  SECTION("constant data yields the degenerate form") {
    std::vector<double> ys(grid.size(), -0.4);
    SinusoidParams p = fit_sinusoid(grid, ys);
    CHECK(p.k == 0.0);
    CHECK(p.a == 1.0);
    CHECK(p.b == 0.0);
    CHECK_THAT(p.c, Catch::Matchers::WithinAbs(-0.4, 1e-12));
  }

  SECTION("canonicalization normalizes signs without changing the curve") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uk(-5.0, 5.0), ua(0.01, 3.0), ub(-20.0, 20.0),
        uc(-5.0, 5.0);
    std::bernoulli_distribution flip(0.5);
    for (int trial = 0; trial < 200; ++trial) {
      SinusoidParams raw{uk(rng), ua(rng) * (flip(rng) ? -1.0 : 1.0), ub(rng), uc(rng)};
      SinusoidParams canon = canonicalize(raw);
      CHECK(canon.k >= 0.0);
      CHECK(canon.a > 0.0);
      CHECK(canon.b >= -std::numbers::pi);
      CHECK(canon.b < std::numbers::pi);
      for (double x : {0.0, 1.3, 10.0, 47.2}) {
        REQUIRE_THAT(canon.eval(x), Catch::Matchers::WithinAbs(raw.eval(x), 1e-9));
      }
    }
  }

  SECTION("rejects short or mismatched samples") {
    CHECK_THROWS_AS(fit_sinusoid({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}), swerve::Error);
    CHECK_THROWS_AS(fit_sinusoid(grid, {0.0, 1.0}), swerve::Error);
  }
}
