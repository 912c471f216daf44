#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace airdemand {

struct LatLon {
  double lat = 0, lon = 0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// Result of a Lloyd fit. Location IDs are 1-based centroid indices.
struct ClusterModel {
  int K = 0;
  std::vector<LatLon> centroids;
  std::uint64_t seed = 0;
  int iterations_run = 0;
  double wcss = 0;  // objective under nearest-centroid assignment

  // Objective after each full (assign, recompute) iteration. Monotone
  // non-increasing; not serialized.
  std::vector<double> wcss_trace;
};

// Initial centroids are K distinct input points sampled via the seed
// (duplicates allowed only when the input has fewer distinct values).
// Stops when no assignment changes, every centroid moves less than tol,
// or max_iter is reached. Empty clusters are reseeded with the point
// farthest from its assigned centroid.
ClusterModel kmeans_fit(const std::vector<LatLon>& points, int K,
                        std::uint64_t seed, int max_iter = 100,
                        double tol = 1e-8, int jobs = 1);

// Same fit from caller-provided starting centroids.
ClusterModel kmeans_fit_from(const std::vector<LatLon>& points,
                             std::vector<LatLon> initial, int max_iter = 100,
                             double tol = 1e-8, int jobs = 1);

// 1-based index of the nearest centroid, ties to the lowest index.
int assign_location(const LatLon& point, const ClusterModel& model);

double wcss_of(const std::vector<LatLon>& points, const ClusterModel& model);

std::string cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const std::string& text);
void save_cluster_model(const ClusterModel& model, const std::string& path);
ClusterModel load_cluster_model(const std::string& path);

}  // namespace airdemand
