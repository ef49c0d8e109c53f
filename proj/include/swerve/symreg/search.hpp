#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "swerve/errors.hpp"
#include "swerve/symreg/constopt.hpp"
#include "swerve/symreg/expr.hpp"

namespace swerve::symreg {

struct Individual {
  Expr expr = Expr::constant(0.0);
  double mse = std::numeric_limits<double>::infinity();
  int complexity = 1;
  double fitness = std::numeric_limits<double>::infinity();
};

struct SymRegConfig {
  int population_size = 200;  ///< total across all islands
  int n_islands = 4;
  int generations = 200;
  int max_complexity = 25;
  double parsimony_init = 1e-4;  ///< scaled by the data variance internally
  double crossover_rate = 0.6;
  double mutation_rate = 0.9;
  int constant_opt_iters = 25;
  double opt_fraction = 0.25;  ///< share of each island refined per generation
  int simplify_every = 5;
  int migrate_every = 10;
  int tournament_size = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (population_size < 2) throw Error(ErrorKind::InvalidConfig, "population_size must be >= 2");
    if (n_islands < 1) throw Error(ErrorKind::InvalidConfig, "n_islands must be >= 1");
    if (generations < 1) throw Error(ErrorKind::InvalidConfig, "generations must be >= 1");
    if (max_complexity < 1) throw Error(ErrorKind::InvalidConfig, "max_complexity must be >= 1");
    if (!(parsimony_init >= 0.0)) throw Error(ErrorKind::InvalidConfig, "parsimony_init must be >= 0");
    if (crossover_rate < 0.0 || crossover_rate > 1.0)
      throw Error(ErrorKind::InvalidConfig, "crossover_rate must lie in [0, 1]");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
      throw Error(ErrorKind::InvalidConfig, "mutation_rate must lie in [0, 1]");
    if (constant_opt_iters < 0) throw Error(ErrorKind::InvalidConfig, "constant_opt_iters must be >= 0");
    if (opt_fraction < 0.0 || opt_fraction > 1.0)
      throw Error(ErrorKind::InvalidConfig, "opt_fraction must lie in [0, 1]");
    if (simplify_every < 1) throw Error(ErrorKind::InvalidConfig, "simplify_every must be >= 1");
    if (migrate_every < 1) throw Error(ErrorKind::InvalidConfig, "migrate_every must be >= 1");
    if (tournament_size < 1) throw Error(ErrorKind::InvalidConfig, "tournament_size must be >= 1");
  }
};

namespace detail {

// Derives a decorrelated per-island stream from (seed, island index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Individual evaluate(Expr e, const std::vector<double>& xs,
                           const std::vector<double>& ys, double parsimony) {
  Individual ind;
  ind.complexity = complexity(e);
  ind.mse = mse(e, xs, ys);
  ind.expr = std::move(e);
  ind.fitness = std::isfinite(ind.mse)
                    ? ind.mse + parsimony * ind.complexity
                    : std::numeric_limits<double>::infinity();
  return ind;
}

inline const Individual& tournament_pick(const std::vector<Individual>& pop,
                                         std::mt19937_64& rng, int size) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const Individual* best = &pop[pick(rng)];
  for (int i = 1; i < size; ++i) {
    const Individual& cand = pop[pick(rng)];
    if (cand.fitness < best->fitness) best = &cand;
  }
  return *best;
}

// Best-seen individual per complexity level, kept across generations.
class HallOfFame {
 public:
  void consider(const Individual& ind) {
    if (!std::isfinite(ind.mse)) return;
    auto it = best_.find(ind.complexity);
    if (it == best_.end() || ind.mse < it->second.mse)
      best_.insert_or_assign(ind.complexity, ind);
  }

  /// Ascending complexity with strictly decreasing MSE.
  std::vector<Individual> pareto_front() const {
    std::vector<Individual> front;
    double best_mse = std::numeric_limits<double>::infinity();
    for (const auto& [cx, ind] : best_) {
      if (ind.mse < best_mse) {
        front.push_back(ind);
        best_mse = ind.mse;
      }
    }
    return front;
  }

  template <typename Fn>
  void for_each(Fn&& fn) {
    for (auto& [cx, ind] : best_) fn(ind);
  }

 private:
  std::map<int, Individual> best_;
};

}  // namespace detail

struct SymRegResult {
  std::vector<Individual> front;  ///< Pareto front, ascending complexity
  Individual best;                ///< lowest-MSE member of the front
};

inline SymRegResult run_search(const std::vector<double>& xs, const std::vector<double>& ys,
                               const SymRegConfig& cfg = {}) {
  cfg.validate();
  if (xs.size() != ys.size())
    throw Error(ErrorKind::InvalidInput, "x/y sample size mismatch");
  if (xs.size() < 10)
    throw Error(ErrorKind::InvalidInput, "symbolic regression needs at least 10 samples");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw Error(ErrorKind::InvalidInput, "symbolic regression samples must be finite");

  double y_mean = 0.0;
  for (double y : ys) y_mean += y;
  y_mean /= static_cast<double>(ys.size());
  double y_var = 0.0;
  for (double y : ys) y_var += (y - y_mean) * (y - y_mean);
  y_var /= static_cast<double>(ys.size());
  const double var_scale = std::max(y_var, 1e-12);
  const double parsimony_min = 1e-8 * var_scale;
  const double parsimony_max = 1e2 * var_scale;

  const int n_islands = cfg.n_islands;
  const int per_island = std::max(2, cfg.population_size / n_islands);
  std::vector<std::vector<Individual>> islands(n_islands);
  std::vector<std::mt19937_64> rngs;
  std::vector<double> parsimony(n_islands, std::clamp(cfg.parsimony_init * var_scale,
                                                      parsimony_min, parsimony_max));
  // Adaptive-parsimony bookkeeping, per island.
  std::vector<double> last_best_mse(n_islands, std::numeric_limits<double>::infinity());
  std::vector<int> last_best_cx(n_islands, 0);

  detail::HallOfFame hof;

  for (int isl = 0; isl < n_islands; ++isl) {
    rngs.emplace_back(detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(isl)));
    std::vector<Individual>& pop = islands[isl];
    pop.reserve(per_island);
    // Seed with the baseline leaves, then random trees.
    pop.push_back(detail::evaluate(Expr::variable(), xs, ys, parsimony[isl]));
    pop.push_back(detail::evaluate(Expr::constant(y_mean), xs, ys, parsimony[isl]));
    while (static_cast<int>(pop.size()) < per_island) {
      Expr e = random_expr(rngs[isl], 3);
      if (complexity(e) > cfg.max_complexity) continue;
      pop.push_back(detail::evaluate(std::move(e), xs, ys, parsimony[isl]));
    }
    for (const Individual& ind : pop) hof.consider(ind);
  }

  const auto best_of = [](const std::vector<Individual>& pop) -> const Individual& {
    const Individual* best = &pop[0];
    for (const Individual& ind : pop)
      if (ind.fitness < best->fitness) best = &ind;
    return *best;
  };

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    for (int isl = 0; isl < n_islands; ++isl) {
      std::vector<Individual>& pop = islands[isl];
      std::mt19937_64& rng = rngs[isl];
      std::uniform_real_distribution<double> coin(0.0, 1.0);

      std::vector<Individual> next;
      next.reserve(pop.size());
      next.push_back(best_of(pop));  // elitism

      while (next.size() < pop.size()) {
        Expr child = detail::tournament_pick(pop, rng, cfg.tournament_size).expr;
        if (coin(rng) < cfg.crossover_rate) {
          const Expr& donor = detail::tournament_pick(pop, rng, cfg.tournament_size).expr;
          child = crossover(child, donor, rng, cfg.max_complexity);
        }
        if (coin(rng) < cfg.mutation_rate)
          child = mutate(child, rng, cfg.max_complexity);
        next.push_back(detail::evaluate(std::move(child), xs, ys, parsimony[isl]));
        hof.consider(next.back());
      }
      pop = std::move(next);

      if (gen % cfg.simplify_every == 0) {
        for (Individual& ind : pop) {
          Expr s = simplify(ind.expr);
          if (!structurally_equal(s, ind.expr)) {
            ind = detail::evaluate(std::move(s), xs, ys, parsimony[isl]);
            hof.consider(ind);
          }
        }
      }

      if (cfg.constant_opt_iters > 0 && cfg.opt_fraction > 0.0) {
        std::vector<std::size_t> order(pop.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return pop[a].fitness < pop[b].fitness;
        });
        const std::size_t n_opt = std::max<std::size_t>(
            1, static_cast<std::size_t>(cfg.opt_fraction * static_cast<double>(pop.size())));
        for (std::size_t r = 0; r < n_opt && r < order.size(); ++r) {
          Individual& ind = pop[order[r]];
          if (!std::isfinite(ind.mse)) continue;
          Expr tuned = optimize_constants(ind.expr, xs, ys, cfg.constant_opt_iters);
          if (!structurally_equal(tuned, ind.expr)) {
            ind = detail::evaluate(std::move(tuned), xs, ys, parsimony[isl]);
            hof.consider(ind);
          }
        }
      }

      // Adaptive parsimony: favors simpler models when accuracy stalls while
      // complexity creeps up; relaxes when the island stagnates on tiny trees.
      if (gen % 5 == 0) {
        const Individual& best = best_of(pop);
        const double improvement =
            std::isfinite(last_best_mse[isl]) && last_best_mse[isl] > 0.0
                ? (last_best_mse[isl] - best.mse) / last_best_mse[isl]
                : 1.0;
        if (improvement < 0.01 && best.complexity > last_best_cx[isl])
          parsimony[isl] *= 1.2;
        else if (improvement < 0.01 && best.complexity < 5)
          parsimony[isl] /= 1.2;
        parsimony[isl] = std::clamp(parsimony[isl], parsimony_min, parsimony_max);
        last_best_mse[isl] = best.mse;
        last_best_cx[isl] = best.complexity;
      }
    }

    // Ring migration: each island's best replaces its neighbor's worst.
    if (n_islands > 1 && gen % cfg.migrate_every == 0) {
      std::vector<Individual> emigrants;
      emigrants.reserve(n_islands);
      for (int isl = 0; isl < n_islands; ++isl) emigrants.push_back(best_of(islands[isl]));
      for (int isl = 0; isl < n_islands; ++isl) {
        std::vector<Individual>& pop = islands[(isl + 1) % n_islands];
        std::size_t worst = 0;
        for (std::size_t i = 1; i < pop.size(); ++i)
          if (pop[i].fitness > pop[worst].fitness) worst = i;
        pop[worst] = emigrants[isl];
      }
    }
  }

  // Final polish: give every hall-of-fame entry a full constant refit.
  std::vector<Individual> polished;
  hof.for_each([&](const Individual& ind) {
    Expr tuned = optimize_constants(ind.expr, xs, ys, 100);
    polished.push_back(detail::evaluate(std::move(tuned), xs, ys, 0.0));
  });
  for (Individual& ind : polished) hof.consider(ind);

  SymRegResult result;
  result.front = hof.pareto_front();
  if (result.front.empty())
    throw Error(ErrorKind::FitFailure, "symbolic regression produced no finite candidate");
  result.best = result.front.back();  // strictly decreasing MSE => last is lowest
  return result;
}

/// Deletes low-impact terms: tries replacing each +/* node by one of its
/// children (re-tuning constants after each deletion) and keeps the deletion
/// while the fit stays within the accumulated tolerance budget of the
/// original MSE.
inline Expr prune_insignificant_terms(const Expr& expr, const std::vector<double>& xs,
                                      const std::vector<double>& ys,
                                      double mse_tolerance = 0.05,
                                      int* deletions_out = nullptr) {
  if (!(mse_tolerance >= 0.0))
    throw Error(ErrorKind::InvalidConfig, "mse_tolerance must be >= 0");
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error(ErrorKind::InvalidInput, "pruning needs at least 2 samples");

  if (deletions_out) *deletions_out = 0;
  const double mse_orig = mse(expr, xs, ys);
  if (!std::isfinite(mse_orig)) return expr;

  Expr current = expr;
  double current_mse = mse_orig;
  int deletions = 0;

  while (true) {
    struct Candidate {
      Expr pruned;
      int reduction;
      int node_index;
      int child_index;
    };
    std::vector<Candidate> candidates;
    const int n_nodes = complexity(current);
    for (int i = 0; i < n_nodes; ++i) {
      const Expr& node = subtree_at(current, i);
      if (node.op != Op::Add && node.op != Op::Mul) continue;
      for (int c = 0; c < 2; ++c) {
        Expr pruned = current;
        replace_subtree(pruned, i, node.children[c]);
        candidates.push_back({std::move(pruned),
                              complexity(node) - complexity(node.children[c]), i, c});
      }
    }
    if (candidates.empty()) break;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.reduction != b.reduction) return a.reduction > b.reduction;
                       if (a.node_index != b.node_index) return a.node_index < b.node_index;
                       return a.child_index < b.child_index;
                     });

    bool accepted = false;
    const double budget = mse_orig * (1.0 + mse_tolerance * (deletions + 1));
    for (Candidate& cand : candidates) {
      Expr tuned = optimize_constants(cand.pruned, xs, ys, 50);
      const double mse_new = mse(tuned, xs, ys);
      if (mse_new <= budget) {
        current = std::move(tuned);
        current_mse = mse_new;
        ++deletions;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  (void)current_mse;
  if (deletions_out) *deletions_out = deletions;
  return simplify(current);
}

}  // namespace swerve::symreg
