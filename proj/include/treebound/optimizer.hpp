#pragma once

#include <cstdint>
#include <vector>

#include "treebound/embedding.hpp"

namespace treebound {

/// Knobs for the smoothed max-min descent. Defaults converge at desk scale;
/// the schedule is eta_t = step_size / sqrt(t+1) and the softmax temperature
/// doubles every steps/10 iterations starting from beta0.
struct OptimizerConfig {
  int restarts = 8;
  int steps = 5000;
  double step_size = 0.1;
  double beta0 = 4.0;
  std::uint64_t seed = 42;
  /// Exact-objective refinement budget after the scheduled descent.
  int polish_evals = 300;
  bool record_history = false;
  /// 0 picks the hardware default; restarts are independent streams, so the
  /// result does not depend on the thread count.
  int threads = 0;
};

struct RestartSummary {
  int restart = 0;
  double initial_distortion = 0.0;
  double best_objective = 0.0;
  double best_distortion = 0.0;
};

struct StepRecord {
  int restart = 0;
  int step = 0;
  double objective = 0.0;
  double exact_distortion = 0.0;
};

struct OptimizationResult {
  Embedding embedding;
  DistortionReport report;
  std::vector<RestartSummary> history;
  OptimizerConfig config;
  std::vector<StepRecord> step_history;
};

/// ConvergenceError that still carries the best embedding found so far.
class OptimizationFailure : public ConvergenceError {
 public:
  OptimizationFailure(const std::string& what, OptimizationResult best)
      : ConvergenceError(what), best_(std::move(best)) {}

  const OptimizationResult& best_so_far() const { return best_; }

 private:
  OptimizationResult best_;
};

/// Seeded Gaussian start, scaled by the tree depth; regenerates from a
/// derived seed in the (measure-zero) degenerate case.
Embedding random_embedding(int depth, const SpaceSpec& space,
                           std::uint64_t seed);

/// One descent run from random_embedding(depth, space, config.seed):
/// minimizes softmax_beta(log ratios) - softmin_beta(log ratios) and keeps
/// the iterate of best exact distortion, never worse than the start.
OptimizationResult optimize_embedding(int depth, const SpaceSpec& space,
                                      const OptimizerConfig& config);

/// Runs config.restarts descents with seeds derived as (seed, i) and keeps
/// the best exact distortion (ties resolve to the lower restart index).
/// Restarts may run on threads; the result is identical either way.
OptimizationResult multi_start(int depth, const SpaceSpec& space,
                               const OptimizerConfig& config);

}  // namespace treebound
