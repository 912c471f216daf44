#include "airdemand/kmeans.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "airdemand/errors.hpp"
#include "airdemand/parallel.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

double sq_dist(const LatLon& a, const LatLon& b) {
  const double dlat = a.lat - b.lat;
  const double dlon = a.lon - b.lon;
  return dlat * dlat + dlon * dlon;
}

int nearest(const LatLon& p, const std::vector<LatLon>& centroids) {
  int best = 0;
  double best_d = sq_dist(p, centroids[0]);
  for (int k = 1; k < static_cast<int>(centroids.size()); ++k) {
    const double d = sq_dist(p, centroids[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

void check_points(const std::vector<LatLon>& points) {
  if (points.empty()) throw ArgumentError("kmeans: no points");
  for (const auto& p : points)
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon))
      throw ArgumentError("kmeans: non-finite coordinate");
}

}  // namespace

ClusterModel kmeans_fit_from(const std::vector<LatLon>& points,
                             std::vector<LatLon> initial, int max_iter,
                             double tol, int jobs) {
  check_points(points);
  const int K = static_cast<int>(initial.size());
  if (K < 1 || K > static_cast<int>(points.size()))
    throw ArgumentError("kmeans: K must be in [1, point count]");
  if (max_iter < 1) throw ArgumentError("kmeans: max_iter must be >= 1");
  if (tol < 0) throw ArgumentError("kmeans: tol must be >= 0");
  for (const auto& c : initial)
    if (!std::isfinite(c.lat) || !std::isfinite(c.lon))
      throw ArgumentError("kmeans: non-finite initial centroid");

  const std::size_t n = points.size();
  std::vector<LatLon> centroids = std::move(initial);
  std::vector<int> assignment(n, -1);
  std::vector<int> new_assignment(n);

  ClusterModel model;
  model.K = K;

  std::vector<double> sum_lat(K), sum_lon(K);
  std::vector<long> counts(K);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment step; indexed writes keep the result identical at any
    // job count.
    parallel_for(n, jobs, [&](std::size_t i) {
      new_assignment[i] = nearest(points[i], centroids);
    });
    long changed = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (new_assignment[i] != assignment[i]) ++changed;
    assignment.swap(new_assignment);

    // Recompute means, sequentially for a fixed summation order.
    std::fill(sum_lat.begin(), sum_lat.end(), 0.0);
    std::fill(sum_lon.begin(), sum_lon.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0L);
    for (std::size_t i = 0; i < n; ++i) {
      const int k = assignment[i];
      sum_lat[k] += points[i].lat;
      sum_lon[k] += points[i].lon;
      ++counts[k];
    }
    std::vector<LatLon> updated(K);
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0)
        updated[k] = LatLon{sum_lat[k] / counts[k], sum_lon[k] / counts[k]};
      else
        updated[k] = centroids[k];
    }

    // Reseed any empty cluster with the point farthest from its assigned
    // centroid, donating from a cluster that keeps at least one member.
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) continue;
      std::size_t far = n;
      double far_d = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assignment[i]] < 2) continue;
        const double d = sq_dist(points[i], updated[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) continue;  // every remaining cluster is a singleton
      const int donor = assignment[far];
      assignment[far] = k;
      counts[donor] -= 1;
      counts[k] = 1;
      updated[k] = points[far];
      ++changed;
      // Re-derive the donor mean over its remaining members.
      double slat = 0, slon = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != donor) continue;
        slat += points[i].lat;
        slon += points[i].lon;
      }
      updated[donor] = LatLon{slat / counts[donor], slon / counts[donor]};
    }

    double max_shift = 0;
    for (int k = 0; k < K; ++k)
      max_shift = std::max(max_shift, std::sqrt(sq_dist(centroids[k], updated[k])));
    centroids.swap(updated);
    model.iterations_run = iter + 1;

    double obj = 0;
    for (std::size_t i = 0; i < n; ++i)
      obj += sq_dist(points[i], centroids[assignment[i]]);
    model.wcss_trace.push_back(obj);

    if (changed == 0) break;
    if (max_shift < tol) break;
  }

  model.centroids = std::move(centroids);
  model.wcss = wcss_of(points, model);
  return model;
}

ClusterModel kmeans_fit(const std::vector<LatLon>& points, int K,
                        std::uint64_t seed, int max_iter, double tol,
                        int jobs) {
  check_points(points);
  if (K < 1 || K > static_cast<int>(points.size()))
    throw ArgumentError("kmeans: K must be in [1, point count]");

  // Seeded draw of K pairwise-distinct input points; fall back to
  // duplicates only when fewer distinct values exist.
  Rng rng(derive_seed(seed, "kmeans/init"));
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i + 1 < n; ++i)
    std::swap(order[i], order[i + rng.uniform_index(n - i)]);

  std::vector<LatLon> initial;
  initial.reserve(K);
  for (std::size_t i = 0; i < n && static_cast<int>(initial.size()) < K; ++i) {
    const LatLon& p = points[order[i]];
    bool seen = false;
    for (const auto& c : initial) seen = seen || c == p;
    if (!seen) initial.push_back(p);
  }
  for (std::size_t i = 0; static_cast<int>(initial.size()) < K; ++i)
    initial.push_back(points[order[i % n]]);

  ClusterModel model = kmeans_fit_from(points, std::move(initial), max_iter,
                                       tol, jobs);
  model.seed = seed;
  return model;
}

int assign_location(const LatLon& point, const ClusterModel& model) {
  if (!std::isfinite(point.lat) || !std::isfinite(point.lon))
    throw ArgumentError("kmeans: non-finite coordinate");
  if (model.centroids.empty()) throw ArgumentError("kmeans: empty model");
  return nearest(point, model.centroids) + 1;
}

double wcss_of(const std::vector<LatLon>& points, const ClusterModel& model) {
  if (model.centroids.empty()) throw ArgumentError("kmeans: empty model");
  double total = 0;
  for (const auto& p : points)
    total += sq_dist(p, model.centroids[nearest(p, model.centroids)]);
  return total;
}

std::string cluster_model_to_json(const ClusterModel& model) {
  nlohmann::json j;
  j["K"] = model.K;
  j["seed"] = model.seed;
  j["iterations_run"] = model.iterations_run;
  j["wcss"] = model.wcss;
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : model.centroids)
    cents.push_back({{"lat", c.lat}, {"lon", c.lon}});
  j["centroids"] = cents;
  return j.dump(2) + "\n";
}

ClusterModel cluster_model_from_json(const std::string& text) {
  ClusterModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    model.K = j.at("K").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.iterations_run = j.value("iterations_run", 0);
    model.wcss = j.value("wcss", 0.0);
    for (const auto& c : j.at("centroids"))
      model.centroids.push_back(
          LatLon{c.at("lat").get<double>(), c.at("lon").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cluster model: ") + e.what());
  }
  if (model.K != static_cast<int>(model.centroids.size()))
    throw FormatError("cluster model: centroid count does not match K");
  return model;
}

void save_cluster_model(const ClusterModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << cluster_model_to_json(model);
}

ClusterModel load_cluster_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return cluster_model_from_json(buf.str());
}

}  // namespace airdemand
