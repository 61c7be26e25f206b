#include "treebound/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "treebound/rng.hpp"

namespace treebound {

namespace {

// Per-pair constants of one problem instance, shared across restarts.
struct PairTable {
  std::size_t count = 0;
  std::vector<double> tree_dist;      // d(u,v) as double
  std::vector<double> log_tree_dist;  // log d(u,v)
};

PairTable build_pair_table(const BinaryTree& tree) {
  const VertexId n = tree.vertex_count();
  PairTable table;
  table.count = static_cast<std::size_t>(n) * (n - 1) / 2;
  table.tree_dist.reserve(table.count);
  table.log_tree_dist.reserve(table.count);
  std::vector<int> depths(n + 1);
  for (VertexId v = 1; v <= n; ++v) depths[v] = vertex_depth(v);
  for (VertexId u = 1; u <= n; ++u) {
    for (VertexId v = u + 1; v <= n; ++v) {
      VertexId a = u;
      VertexId b = v;
      while (depths[a] > depths[b]) a /= 2;
      while (depths[b] > depths[a]) b /= 2;
      while (a != b) {
        a /= 2;
        b /= 2;
      }
      const double d = depths[u] + depths[v] - 2 * depths[a];
      table.tree_dist.push_back(d);
      table.log_tree_dist.push_back(std::log(d));
    }
  }
  return table;
}

// Scratch buffers for one descent run.
struct Workspace {
  std::vector<double> log_ratio;
  std::vector<double> weight_hi;
  std::vector<double> weight_lo;
  std::vector<double> gradient;
};

struct ScanResult {
  bool finite = false;
  double log_max = 0.0;
  double log_min = 0.0;
  double exact_distortion = 0.0;
};

// Pass 1: pair ratios, their logs, and the exact max/min.
ScanResult scan_ratios(const std::vector<double>& coords, int dim, double p,
                       const PairTable& table, std::vector<double>& log_ratio) {
  ScanResult out;
  const std::size_t vcount = coords.size() / dim;
  double rmax = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  for (std::size_t u = 0; u < vcount; ++u) {
    const double* pu = coords.data() + u * dim;
    for (std::size_t v = u + 1; v < vcount; ++v, ++k) {
      const double* pv = coords.data() + v * dim;
      double dist;
      if (p == 2.0) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double z = pu[i] - pv[i];
          s += z * z;
        }
        dist = std::sqrt(s);
      } else {
        dist = lp_dist({pu, static_cast<std::size_t>(dim)},
                       {pv, static_cast<std::size_t>(dim)}, p);
      }
      if (!(dist > 0.0) || !std::isfinite(dist)) return out;
      const double r = dist / table.tree_dist[k];
      log_ratio[k] = std::log(dist) - table.log_tree_dist[k];
      if (r > rmax) rmax = r;
      if (r < rmin) rmin = r;
    }
  }
  out.finite = true;
  out.log_max = std::log(rmax);
  out.log_min = std::log(rmin);
  out.exact_distortion = rmax / rmin;
  return out;
}

// Smoothed objective softmax_beta - softmin_beta of the log ratios, plus
// the normalized exponential weights needed for its subgradient.
double smoothed_objective(const ScanResult& scan, double beta,
                          const std::vector<double>& log_ratio,
                          std::vector<double>& weight_hi,
                          std::vector<double>& weight_lo) {
  double sum_hi = 0.0;
  double sum_lo = 0.0;
  const std::size_t count = log_ratio.size();
  for (std::size_t k = 0; k < count; ++k) {
    const double ehi = std::exp(beta * (log_ratio[k] - scan.log_max));
    const double elo = std::exp(beta * (scan.log_min - log_ratio[k]));
    weight_hi[k] = ehi;
    weight_lo[k] = elo;
    sum_hi += ehi;
    sum_lo += elo;
  }
  const double inv_hi = 1.0 / sum_hi;
  const double inv_lo = 1.0 / sum_lo;
  for (std::size_t k = 0; k < count; ++k) {
    weight_hi[k] *= inv_hi;
    weight_lo[k] *= inv_lo;
  }
  const double smooth_max = scan.log_max + std::log(sum_hi) / beta;
  const double smooth_min = scan.log_min - std::log(sum_lo) / beta;
  return smooth_max - smooth_min;
}

// Subgradient of the smoothed objective with respect to the coordinates.
void objective_gradient(const std::vector<double>& coords, int dim, double p,
                        const std::vector<double>& weight_hi,
                        const std::vector<double>& weight_lo,
                        std::vector<double>& gradient) {
  std::fill(gradient.begin(), gradient.end(), 0.0);
  const std::size_t vcount = coords.size() / dim;
  std::size_t k = 0;
  for (std::size_t u = 0; u < vcount; ++u) {
    const double* pu = coords.data() + u * dim;
    double* gu = gradient.data() + u * dim;
    for (std::size_t v = u + 1; v < vcount; ++v, ++k) {
      const double* pv = coords.data() + v * dim;
      double* gv = gradient.data() + v * dim;
      const double coef = weight_hi[k] - weight_lo[k];
      if (coef == 0.0) continue;
      if (p == 2.0) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double z = pu[i] - pv[i];
          s += z * z;
        }
        const double factor = coef / s;  // coef * z / dist^2
        for (int i = 0; i < dim; ++i) {
          const double g = factor * (pu[i] - pv[i]);
          gu[i] += g;
          gv[i] -= g;
        }
      } else {
        const double dist = lp_dist({pu, static_cast<std::size_t>(dim)},
                                    {pv, static_cast<std::size_t>(dim)}, p);
        for (int i = 0; i < dim; ++i) {
          const double z = pu[i] - pv[i];
          if (z == 0.0) continue;
          const double mag = pow_real(std::abs(z) / dist, p - 1.0) / dist;
          const double g = coef * (z < 0.0 ? -mag : mag);
          gu[i] += g;
          gv[i] -= g;
        }
      }
    }
  }
}

struct RestartOutcome {
  std::vector<double> best_coords;
  double best_distortion = std::numeric_limits<double>::infinity();
  double best_objective = std::numeric_limits<double>::infinity();
  double initial_distortion = 0.0;
  std::vector<StepRecord> records;
  bool failed = false;
  std::string failure;
};

RestartOutcome run_descent(int depth, const SpaceSpec& space,
                           const OptimizerConfig& config, int restart_index,
                           std::uint64_t stream_seed, const PairTable& table) {
  RestartOutcome outcome;
  Embedding start = random_embedding(depth, space, stream_seed);
  std::vector<double> coords = std::move(start.coords);
  const int dim = space.dim;
  const double p = space.p;

  Workspace ws;
  ws.log_ratio.resize(table.count);
  ws.weight_hi.resize(table.count);
  ws.weight_lo.resize(table.count);
  ws.gradient.resize(coords.size());

  const int anneal_every = std::max(1, config.steps / 10);
  double step_scale = 1.0;
  int consecutive_rejections = 0;

  ScanResult scan = scan_ratios(coords, dim, p, table, ws.log_ratio);
  // random_embedding already rejected degenerate starts.
  outcome.initial_distortion = scan.exact_distortion;
  outcome.best_distortion = scan.exact_distortion;
  outcome.best_coords = coords;

  double beta = config.beta0;
  double objective = smoothed_objective(scan, beta, ws.log_ratio,
                                        ws.weight_hi, ws.weight_lo);
  outcome.best_objective = objective;
  if (config.record_history) {
    outcome.records.push_back(
        {restart_index, 0, objective, scan.exact_distortion});
  }

  std::vector<double> previous(coords.size());
  for (int t = 0; t < config.steps; ++t) {
    const int anneal_stage = std::min(t / anneal_every, 40);
    beta = config.beta0 * std::exp2(static_cast<double>(anneal_stage));
    objective = smoothed_objective(scan, beta, ws.log_ratio, ws.weight_hi,
                                   ws.weight_lo);
    objective_gradient(coords, dim, p, ws.weight_hi, ws.weight_lo,
                       ws.gradient);

    // Normalized subgradient direction with a step relative to the current
    // configuration scale: the objective is scale-invariant, so step_size
    // reads as a fraction of the coordinate norm.
    double gnorm = 0.0;
    for (double g : ws.gradient) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm == 0.0) break;
    double cnorm = 0.0;
    for (double c : coords) cnorm += c * c;
    cnorm = std::sqrt(cnorm);
    const double eta = step_scale * config.step_size * cnorm /
                       std::sqrt(static_cast<double>(t + 1)) / gnorm;
    previous = coords;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      coords[i] -= eta * ws.gradient[i];
    }
    ScanResult next = scan_ratios(coords, dim, p, table, ws.log_ratio);
    if (!next.finite) {
      coords = previous;
      scan = scan_ratios(coords, dim, p, table, ws.log_ratio);
      step_scale *= 0.5;
      if (++consecutive_rejections > 80) {
        outcome.failed = true;
        outcome.failure = "descent rejected 80 consecutive steps (restart " +
                          std::to_string(restart_index) + ")";
        return outcome;
      }
      continue;
    }
    consecutive_rejections = 0;
    scan = next;
    if (scan.exact_distortion < outcome.best_distortion) {
      outcome.best_distortion = scan.exact_distortion;
      outcome.best_coords = coords;
    }
    outcome.best_objective = std::min(outcome.best_objective, objective);
    if (config.record_history) {
      outcome.records.push_back(
          {restart_index, t + 1, objective, scan.exact_distortion});
    }
  }

  // Exact-objective refinement: sharpen beta, accept only strict
  // improvements of the true distortion, adapt the step multiplicatively.
  if (config.polish_evals > 0) {
    coords = outcome.best_coords;
    scan = scan_ratios(coords, dim, p, table, ws.log_ratio);
    beta = config.beta0 * std::exp2(12.0);
    double cnorm = 0.0;
    for (double c : coords) cnorm += c * c;
    double eta = step_scale * config.step_size * std::sqrt(cnorm) /
                 std::sqrt(static_cast<double>(config.steps + 1));
    std::vector<double> candidate(coords.size());
    for (int eval = 0; eval < config.polish_evals && eta > 1e-14; ++eval) {
      smoothed_objective(scan, beta, ws.log_ratio, ws.weight_hi, ws.weight_lo);
      objective_gradient(coords, dim, p, ws.weight_hi, ws.weight_lo,
                         ws.gradient);
      double gnorm = 0.0;
      for (double g : ws.gradient) gnorm += g * g;
      gnorm = std::sqrt(gnorm);
      if (gnorm == 0.0) break;
      candidate = coords;
      for (std::size_t i = 0; i < candidate.size(); ++i) {
        candidate[i] -= (eta / gnorm) * ws.gradient[i];
      }
      std::vector<double> cand_log = ws.log_ratio;
      const ScanResult next = scan_ratios(candidate, dim, p, table, cand_log);
      if (next.finite && next.exact_distortion < outcome.best_distortion) {
        coords = candidate;
        ws.log_ratio = cand_log;
        scan = next;
        outcome.best_distortion = next.exact_distortion;
        outcome.best_coords = coords;
        eta *= 1.5;
      } else {
        eta *= 0.5;
      }
    }
  }
  return outcome;
}

}  // namespace

Embedding random_embedding(int depth, const SpaceSpec& space,
                           std::uint64_t seed) {
  if (depth < 1) {
    throw DomainError("random embedding needs depth >= 1, got " +
                      std::to_string(depth));
  }
  space.validate();
  const BinaryTree tree = build_tree(depth);
  const double scale = static_cast<double>(depth);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    std::vector<double> coords(tree.vertex_count() *
                               static_cast<std::int64_t>(space.dim));
    for (double& c : coords) c = scale * rng.next_gaussian();
    Embedding e{tree, space, std::move(coords)};
    try {
      evaluate_distortion(e);
      return e;
    } catch (const DegenerateEmbedding&) {
      continue;  // regenerate from the next derived seed
    }
  }
  throw ConvergenceError("could not draw a nondegenerate embedding");
}

namespace {

void check_config(int depth, const SpaceSpec& space,
                  const OptimizerConfig& config) {
  if (depth < 1) {
    throw DomainError("optimizer needs depth >= 1, got " +
                      std::to_string(depth));
  }
  space.validate();
  if (config.steps < 1 || config.step_size <= 0.0 || !(config.beta0 > 0.0) ||
      !std::isfinite(config.beta0)) {
    throw DomainError("optimizer config fields must be positive and finite");
  }
}

}  // namespace

OptimizationResult optimize_embedding(int depth, const SpaceSpec& space,
                                      const OptimizerConfig& config) {
  check_config(depth, space, config);
  const PairTable table = build_pair_table(build_tree(depth));
  RestartOutcome outcome =
      run_descent(depth, space, config, 0, config.seed, table);
  OptimizationResult result;
  result.config = config;
  result.embedding =
      Embedding{build_tree(depth), space, std::move(outcome.best_coords)};
  result.history.push_back({0, outcome.initial_distortion,
                            outcome.best_objective,
                            outcome.best_distortion});
  result.step_history = std::move(outcome.records);
  if (outcome.failed) {
    result.report = evaluate_distortion(result.embedding);
    throw OptimizationFailure(outcome.failure, std::move(result));
  }
  result.report = evaluate_distortion(result.embedding);
  return result;
}

OptimizationResult multi_start(int depth, const SpaceSpec& space,
                               const OptimizerConfig& config) {
  if (config.restarts < 1) {
    throw DomainError("multi-start needs at least one restart");
  }
  check_config(depth, space, config);
  const PairTable table = build_pair_table(build_tree(depth));

  std::vector<RestartOutcome> outcomes(config.restarts);
  int threads = config.threads;
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min(threads, config.restarts);

  auto worker = [&](int first) {
    for (int i = first; i < config.restarts; i += threads) {
      try {
        outcomes[i] = run_descent(depth, space, config, i,
                                  derive_seed(config.seed, i), table);
      } catch (const std::exception& err) {
        outcomes[i].failed = true;
        outcomes[i].failure = err.what();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  int best_index = -1;
  for (int i = 0; i < config.restarts; ++i) {
    if (outcomes[i].failed) continue;
    if (best_index < 0 ||
        outcomes[i].best_distortion < outcomes[best_index].best_distortion) {
      best_index = i;
    }
  }

  OptimizationResult result;
  result.config = config;
  for (int i = 0; i < config.restarts; ++i) {
    result.history.push_back({i, outcomes[i].initial_distortion,
                              outcomes[i].best_objective,
                              outcomes[i].best_distortion});
    if (config.record_history) {
      result.step_history.insert(result.step_history.end(),
                                 outcomes[i].records.begin(),
                                 outcomes[i].records.end());
    }
  }
  if (best_index < 0) {
    throw OptimizationFailure("every restart failed", std::move(result));
  }
  result.embedding = Embedding{build_tree(depth), space,
                               std::move(outcomes[best_index].best_coords)};
  result.report = evaluate_distortion(result.embedding);
  if (std::ranges::any_of(outcomes,
                          [](const RestartOutcome& o) { return o.failed; })) {
    throw OptimizationFailure("some restarts failed; best kept",
                              std::move(result));
  }
  return result;
}

}  // namespace treebound
