#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace almpc {

enum class SelectionMode { Hybrid, RwsOnly, TsOnly };

struct GaConfig {
  int generations = 15;
  int pop_size = 20;             // >= 4 and even
  double offspring_fraction = 0.8;
  double beta = 0.75;            // RWS selection pressure
  double mutation_rate = 0.3;    // per-gene probability
  double mutation_sigma = 0.15;  // fraction of gene range
  int tournament_size = 3;
  int elite_count = 1;
  std::uint64_t seed = 0;
  SelectionMode selection = SelectionMode::Hybrid;

  bool valid() const;
};

struct GeneBounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct Chromosome {
  std::vector<double> genes;
  double fitness = 0.0;  // lower is better
};

using FitnessFn = std::function<double(const std::vector<double>&)>;

using Rng = std::mt19937_64;

/// Hybrid parent selection: fresh RWS/TS percentages per draw; Boltzmann
/// roulette weights exp(-beta*f/f_mean) in the RWS branch, best-of-k in the
/// tournament branch.
const Chromosome& select_parent(const std::vector<Chromosome>& pop, Rng& rng,
                                const GaConfig& cfg);

std::pair<Chromosome, Chromosome> uniform_crossover(const Chromosome& p1, const Chromosome& p2,
                                                    Rng& rng);

Chromosome gaussian_mutation(const Chromosome& c, const std::vector<GeneBounds>& bounds,
                             Rng& rng, const GaConfig& cfg);

struct GaResult {
  Chromosome best;                  // lowest fitness ever evaluated
  std::vector<double> history;      // per-generation best fitness (non-increasing)
  std::vector<double> mean_history; // per-generation population mean fitness
  long evaluations = 0;
};

/// Generational loop: children from select/crossover/mutate fill
/// offspring_fraction of the next population, the rest copied from the
/// previous generation's best (covering elitism). Fitness evaluations within
/// a generation are independent; `parallel` fans them out over a thread pool
/// with results independent of scheduling.
GaResult run_ga(const FitnessFn& fitness, const std::vector<GeneBounds>& bounds,
                const GaConfig& cfg, bool parallel = false);

double sphere_fitness(const std::vector<double>& x);

}  // namespace almpc
