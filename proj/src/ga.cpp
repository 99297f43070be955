#include "almpc/ga.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace almpc {

bool GaConfig::valid() const {
  return generations >= 1 && pop_size >= 4 && pop_size % 2 == 0 &&
         offspring_fraction > 0.0 && offspring_fraction <= 1.0 &&
         mutation_rate >= 0.0 && mutation_rate <= 1.0 && mutation_sigma >= 0.0 &&
         tournament_size >= 2 && tournament_size <= pop_size && elite_count >= 0 &&
         elite_count < pop_size;
}

namespace {

const Chromosome& roulette_pick(const std::vector<Chromosome>& pop, Rng& rng, double beta) {
  double mean = 0.0;
  for (const auto& c : pop) mean += c.fitness;
  mean /= static_cast<double>(pop.size());
  const double scale = std::max(std::abs(mean), 1e-12);

  std::vector<double> weights(pop.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double e = std::clamp(-beta * pop[i].fitness / scale, -700.0, 700.0);
    weights[i] = std::exp(e);
    total += weights[i];
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double ticket = unit(rng) * total;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    ticket -= weights[i];
    if (ticket <= 0.0) return pop[i];
  }
  return pop.back();
}

const Chromosome& tournament_pick(const std::vector<Chromosome>& pop, Rng& rng, int size) {
  std::uniform_int_distribution<std::size_t> idx(0, pop.size() - 1);
  const Chromosome* best = nullptr;
  std::vector<std::size_t> drawn;
  drawn.reserve(static_cast<std::size_t>(size));
  while (static_cast<int>(drawn.size()) < size) {
    const std::size_t i = idx(rng);
    if (std::find(drawn.begin(), drawn.end(), i) != drawn.end()) continue;
    drawn.push_back(i);
    if (best == nullptr || pop[i].fitness < best->fitness) best = &pop[i];
  }
  return *best;
}

void parallel_evaluate(std::vector<Chromosome>& pop, std::size_t first, const FitnessFn& fitness,
                       bool parallel) {
  const std::size_t count = pop.size() - first;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = parallel ? std::min<std::size_t>(hw, count) : 1;
  if (workers <= 1) {
    for (std::size_t i = first; i < pop.size(); ++i) pop[i].fitness = fitness(pop[i].genes);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = first + w; i < pop.size(); i += workers) {
        pop[i].fitness = fitness(pop[i].genes);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

const Chromosome& select_parent(const std::vector<Chromosome>& pop, Rng& rng,
                                const GaConfig& cfg) {
  if (pop.empty()) throw std::invalid_argument("select_parent: empty population");
  switch (cfg.selection) {
    case SelectionMode::RwsOnly:
      return roulette_pick(pop, rng, cfg.beta);
    case SelectionMode::TsOnly:
      return tournament_pick(pop, rng, cfg.tournament_size);
    case SelectionMode::Hybrid:
      break;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pct_rws = unit(rng);
  const double pct_ts = unit(rng);
  if (pct_rws >= pct_ts) return roulette_pick(pop, rng, cfg.beta);
  return tournament_pick(pop, rng, cfg.tournament_size);
}

std::pair<Chromosome, Chromosome> uniform_crossover(const Chromosome& p1, const Chromosome& p2,
                                                    Rng& rng) {
  if (p1.genes.size() != p2.genes.size()) {
    throw std::invalid_argument("uniform_crossover: gene counts differ");
  }
  Chromosome c1 = p1;
  Chromosome c2 = p2;
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t j = 0; j < p1.genes.size(); ++j) {
    if (coin(rng) == 1) {
      c1.genes[j] = p2.genes[j];
      c2.genes[j] = p1.genes[j];
    }
  }
  return {std::move(c1), std::move(c2)};
}

Chromosome gaussian_mutation(const Chromosome& c, const std::vector<GeneBounds>& bounds,
                             Rng& rng, const GaConfig& cfg) {
  if (bounds.size() != c.genes.size()) {
    throw std::invalid_argument("gaussian_mutation: bounds size mismatch");
  }
  Chromosome out = c;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t j = 0; j < out.genes.size(); ++j) {
    if (unit(rng) < cfg.mutation_rate) {
      const double range = bounds[j].hi - bounds[j].lo;
      out.genes[j] += cfg.mutation_sigma * range * gauss(rng);
      out.genes[j] = std::clamp(out.genes[j], bounds[j].lo, bounds[j].hi);
    }
  }
  return out;
}

GaResult run_ga(const FitnessFn& fitness, const std::vector<GeneBounds>& bounds,
                const GaConfig& cfg, bool parallel) {
  if (!cfg.valid()) throw std::invalid_argument("run_ga: invalid GaConfig");
  if (bounds.empty()) throw std::invalid_argument("run_ga: no gene bounds");

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto n = static_cast<std::size_t>(cfg.pop_size);
  std::vector<Chromosome> pop(n);
  for (auto& c : pop) {
    c.genes.resize(bounds.size());
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      c.genes[j] = bounds[j].lo + unit(rng) * (bounds[j].hi - bounds[j].lo);
    }
  }
  parallel_evaluate(pop, 0, fitness, parallel);

  GaResult result;
  result.evaluations = cfg.pop_size;
  const auto by_fitness = [](const Chromosome& a, const Chromosome& b) {
    return a.fitness < b.fitness;
  };
  const auto record = [&](const std::vector<Chromosome>& p) {
    double best = p.front().fitness;
    double mean = 0.0;
    for (const auto& c : p) {
      best = std::min(best, c.fitness);
      mean += c.fitness;
    }
    result.history.push_back(best);
    result.mean_history.push_back(mean / static_cast<double>(p.size()));
  };

  result.best = *std::min_element(pop.begin(), pop.end(), by_fitness);
  record(pop);

  int n_children = static_cast<int>(std::lround(cfg.offspring_fraction * cfg.pop_size));
  n_children = std::clamp(n_children, 1, cfg.pop_size - std::max(cfg.elite_count, 0));
  const int n_copy = cfg.pop_size - n_children;

  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<Chromosome> children;
    children.reserve(static_cast<std::size_t>(n_children) + 1);
    while (static_cast<int>(children.size()) < n_children) {
      const Chromosome& p1 = select_parent(pop, rng, cfg);
      const Chromosome& p2 = select_parent(pop, rng, cfg);
      auto [c1, c2] = uniform_crossover(p1, p2, rng);
      children.push_back(gaussian_mutation(c1, bounds, rng, cfg));
      children.push_back(gaussian_mutation(c2, bounds, rng, cfg));
    }
    children.resize(static_cast<std::size_t>(n_children));
    parallel_evaluate(children, 0, fitness, parallel);
    result.evaluations += n_children;

    std::vector<Chromosome> next;
    next.reserve(n);
    std::partial_sort(pop.begin(), pop.begin() + n_copy, pop.end(), by_fitness);
    next.insert(next.end(), pop.begin(), pop.begin() + n_copy);
    next.insert(next.end(), std::make_move_iterator(children.begin()),
                std::make_move_iterator(children.end()));
    pop = std::move(next);

    const auto& gen_best = *std::min_element(pop.begin(), pop.end(), by_fitness);
    if (gen_best.fitness < result.best.fitness) result.best = gen_best;
    record(pop);
  }
  return result;
}

double sphere_fitness(const std::vector<double>& x) {
  double total = 0.0;
  for (const double v : x) total += v * v;
  return total;
}

}  // namespace almpc
