// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/clustering.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "emopro/error.hpp"
#include "emopro/hashing.hpp"

namespace emopro {

namespace {

double sq_dist(const FeaturePoint& p, const Centroid& c) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return dx * dx + dy * dy;
}

// Nearest centroid per point, lowest index on ties. Returns the inertia.
double assign(const std::vector<FeaturePoint>& points,
              const std::vector<Centroid>& centroids, std::vector<std::size_t>& out) {
  out.resize(points.size());
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = sq_dist(points[i], centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = sq_dist(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out[i] = best;
    inertia += best_d;
  }
  return inertia;
}

std::vector<Centroid> seed_plus_plus(const std::vector<FeaturePoint>& points,
                                     std::size_t k, SplitMix64& rng) {
  std::vector<Centroid> centroids;
  centroids.reserve(k);
  const auto& first = points[rng.below(points.size())];
  centroids.push_back({first.x, first.y});

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = sq_dist(points[i], centroids[0]);

  while (centroids.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = points.size() - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(points.size());
    }
    centroids.push_back({points[pick].x, points[pick].y});
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
    }
  }
  return centroids;
}

// Centroids become cluster means. Each empty cluster is re-seeded with the
// point farthest from its own centroid, and that point moves to it.
std::vector<Centroid> update_centroids(const std::vector<FeaturePoint>& points,
                                       std::vector<std::size_t>& assignments,
                                       std::size_t k) {
  std::vector<Centroid> sums(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sums[assignments[i]].x += points[i].x;
    sums[assignments[i]].y += points[i].y;
    ++counts[assignments[i]];
  }
  std::vector<Centroid> centroids(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      centroids[c] = {sums[c].x / static_cast<double>(counts[c]),
                      sums[c].y / static_cast<double>(counts[c])};
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[assignments[i]] < 2) continue;
      const double d = sq_dist(points[i], centroids[assignments[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.size()) break;  // unreachable while points.size() >= k
    --counts[assignments[far]];
    assignments[far] = c;
    counts[c] = 1;
    centroids[c] = {points[far].x, points[far].y};
  }
  return centroids;
}

struct RestartResult {
  std::vector<Centroid> centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  std::vector<double> trace;
};

RestartResult run_lloyd(const std::vector<FeaturePoint>& points, std::size_t k,
                        SplitMix64& rng, std::size_t max_iterations) {
  RestartResult r;
  r.centroids = seed_plus_plus(points, k, rng);
  r.trace.push_back(assign(points, r.centroids, r.assignments));

  std::vector<std::size_t> next;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    auto centroids = update_centroids(points, r.assignments, k);
    const double inertia = assign(points, centroids, next);
    r.trace.push_back(inertia);
    r.centroids = std::move(centroids);
    const bool converged = next == r.assignments;
    r.assignments.swap(next);
    if (converged) break;
  }
  // Coincident centroids can leave a cluster empty after the last
  // assignment; repair once more and take exact means.
  std::vector<std::size_t> counts(k, 0);
  for (auto a : r.assignments) ++counts[a];
  if (std::find(counts.begin(), counts.end(), 0u) != counts.end()) {
    update_centroids(points, r.assignments, k);
    r.centroids = update_centroids(points, r.assignments, k);
  }
  r.inertia = compute_inertia(points, r.centroids, r.assignments);
  return r;
}

}  // namespace

std::size_t ClusterModel::cluster_of(const std::string& candidate_id) const {
  for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
    if (candidate_ids[i] == candidate_id) return assignments[i];
  }
  throw Error(Errc::invalid_argument, "candidate '" + candidate_id + "' not in model");
}

double compute_inertia(const std::vector<FeaturePoint>& points,
                       const std::vector<Centroid>& centroids,
                       const std::vector<std::size_t>& assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += sq_dist(points[i], centroids[assignments[i]]);
  }
  return total;
}

ClusterModel fit_kmeans(const std::vector<FeaturePoint>& points, std::size_t k,
                        std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw Error(Errc::invalid_argument, "k must be at least 1");
  if (points.size() < k) {
    throw Error(Errc::too_few_points, std::to_string(points.size()) +
                                          " points cannot form " + std::to_string(k) +
                                          " clusters");
  }

  SplitMix64 master(seed);
  std::optional<RestartResult> best;
  std::size_t best_restart = 0;
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    SplitMix64 stream(master.next());
    auto result = run_lloyd(points, k, stream, options.max_iterations);
    if (!best || result.inertia < best->inertia) {
      best = std::move(result);
      best_restart = r;
    }
  }

  ClusterModel model;
  model.k = k;
  model.centroids = std::move(best->centroids);
  model.assignments = std::move(best->assignments);
  model.inertia = best->inertia;
  model.inertia_trace = std::move(best->trace);
  model.best_restart = best_restart;
  model.seed = seed;
  model.candidate_ids.reserve(points.size());
  for (const auto& p : points) model.candidate_ids.push_back(p.candidate_id);
  return model;
}

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::high ? "high" : "low";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "high") return Polarity::high;
  if (text == "low") return Polarity::low;
  throw Error(Errc::parse, "polarity must be 'high' or 'low', got '" +
                               std::string(text) + "'");
}

std::vector<std::size_t> rank_clusters(const ClusterModel& model, Polarity polarity) {
  std::vector<std::size_t> order(model.centroids.size());
  std::iota(order.begin(), order.end(), 0);
  auto score = [&](std::size_t c) { return model.centroids[c].x + model.centroids[c].y; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return polarity == Polarity::high ? score(a) > score(b) : score(a) < score(b);
  });
  return order;
}

std::vector<FeaturePoint> normalize_features(
    const std::vector<std::pair<std::string, PitchStats>>& stats, NormParams& norm) {
  const double n = static_cast<double>(stats.size());
  double mean_sum = 0.0, var_sum = 0.0;
  for (const auto& [id, s] : stats) {
    mean_sum += s.mean_hz;
    var_sum += s.variance_hz2;
  }
  norm.mean_center = mean_sum / n;
  norm.var_center = var_sum / n;
  double mean_ss = 0.0, var_ss = 0.0;
  for (const auto& [id, s] : stats) {
    mean_ss += (s.mean_hz - norm.mean_center) * (s.mean_hz - norm.mean_center);
    var_ss += (s.variance_hz2 - norm.var_center) * (s.variance_hz2 - norm.var_center);
  }
  norm.mean_scale = std::sqrt(mean_ss / n);
  norm.var_scale = std::sqrt(var_ss / n);
  if (!(norm.mean_scale > 0.0)) norm.mean_scale = 1.0;
  if (!(norm.var_scale > 0.0)) norm.var_scale = 1.0;

  std::vector<FeaturePoint> points;
  points.reserve(stats.size());
  for (const auto& [id, s] : stats) {
    points.push_back({id, (s.mean_hz - norm.mean_center) / norm.mean_scale,
                      (s.variance_hz2 - norm.var_center) / norm.var_scale});
  }
  return points;
}

PitchSelection select_pitch_clusters(const CandidatePool& pool,
                                     const std::map<std::string, PitchStats>& stats,
                                     std::size_t num_clusters, std::size_t m,
                                     Polarity polarity, std::uint64_t seed) {
  if (m < 1 || m > num_clusters) {
    throw Error(Errc::invalid_argument, "m must lie in [1, num_clusters]");
  }
  std::vector<std::pair<std::string, PitchStats>> rows;
  for (const auto& c : pool.candidates) {
    if (auto it = stats.find(c.id); it != stats.end()) rows.emplace_back(c.id, it->second);
  }
  if (rows.size() < num_clusters) {
    throw Error(Errc::too_few_points,
                std::to_string(rows.size()) + " candidates with pitch stats, need " +
                    std::to_string(num_clusters));
  }

  PitchSelection out;
  auto points = normalize_features(rows, out.model.norm);
  const auto norm = out.model.norm;
  out.model = fit_kmeans(points, num_clusters, seed);
  out.model.norm = norm;
  out.cluster_order = rank_clusters(out.model, polarity);
  out.kept_clusters.assign(out.cluster_order.begin(), out.cluster_order.begin() + m);

  const std::set<std::size_t> kept(out.kept_clusters.begin(), out.kept_clusters.end());
  out.pool.speaker_id = pool.speaker_id;
  out.pool.emotion = pool.emotion;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (kept.contains(out.model.assignments[i])) {
      out.pool.candidates.push_back(*pool.find(rows[i].first));
    }
  }
  spdlog::info("pitch clustering kept {} of {} candidates ({} of {} clusters, {})",
               out.pool.size(), rows.size(), m, num_clusters, to_string(polarity));
  return out;
}

}  // namespace emopro
