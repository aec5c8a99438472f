// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emopro/pitch.hpp"
#include "emopro/types.hpp"

namespace emopro {

/// A candidate in z-scored (pitch mean, pitch variance) space.
struct FeaturePoint {
  std::string candidate_id;
  double x = 0.0;  // normalized mean
  double y = 0.0;  // normalized variance
};

struct NormParams {
  double mean_center = 0.0, mean_scale = 1.0;
  double var_center = 0.0, var_scale = 1.0;
};

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

struct ClusterModel {
  std::size_t k = 0;
  std::vector<Centroid> centroids;
  std::vector<std::size_t> assignments;  // parallel to the fitted points
  std::vector<std::string> candidate_ids;
  NormParams norm;
  std::uint64_t seed = 0;
  double inertia = 0.0;
  std::size_t best_restart = 0;
  /// Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_trace;

  std::size_t cluster_of(const std::string& candidate_id) const;
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

/// Lloyd's algorithm with k-means++ seeding. Each restart draws from its own
/// SplitMix64 stream derived from `seed`; the lowest-inertia restart wins
/// (earlier restart on ties). Points are assigned to the nearest centroid,
/// lowest index on ties. An empty cluster takes the point farthest from its
/// centroid. Errors: Errc::too_few_points when points.size() < k.
ClusterModel fit_kmeans(const std::vector<FeaturePoint>& points, std::size_t k,
                        std::uint64_t seed, const KMeansOptions& options = {});

/// Sum of squared distances of each point to its assigned centroid.
double compute_inertia(const std::vector<FeaturePoint>& points,
                       const std::vector<Centroid>& centroids,
                       const std::vector<std::size_t>& assignments);

enum class Polarity { high, low };

struct EmotionPolarity {
  std::map<EmotionLabel, Polarity> table = {
      {EmotionLabel::happy, Polarity::high},
      {EmotionLabel::surprised, Polarity::high},
      {EmotionLabel::anger, Polarity::high},
      {EmotionLabel::sad, Polarity::low},
      {EmotionLabel::comfort, Polarity::low},
  };

  Polarity of(EmotionLabel emotion) const { return table.at(emotion); }
};

std::string_view to_string(Polarity polarity);
Polarity parse_polarity(std::string_view text);

/// Orders clusters by centroid score x + y: descending for High,
/// ascending for Low, lower index first on ties.
std::vector<std::size_t> rank_clusters(const ClusterModel& model, Polarity polarity);

/// z-scores (mean, variance) over the given stats (population std; a
/// constant column maps to 0).
std::vector<FeaturePoint> normalize_features(
    const std::vector<std::pair<std::string, PitchStats>>& stats, NormParams& norm);

struct PitchSelection {
  CandidatePool pool;  // survivors, in input pool order
  ClusterModel model;
  std::vector<std::size_t> cluster_order;
  std::vector<std::size_t> kept_clusters;
};

/// Keeps every candidate of the top `m` clusters after fitting `num_clusters`
/// clusters on the z-scored pitch statistics. Candidates without stats are
/// dropped. Errors: Errc::too_few_points, Errc::invalid_argument (m out of range).
PitchSelection select_pitch_clusters(const CandidatePool& pool,
                                     const std::map<std::string, PitchStats>& stats,
                                     std::size_t num_clusters, std::size_t m,
                                     Polarity polarity, std::uint64_t seed);

}  // namespace emopro
