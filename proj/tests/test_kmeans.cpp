#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "airdemand/errors.hpp"
#include "airdemand/kmeans.hpp"
#include "airdemand/rng.hpp"

using namespace airdemand;

TEST_CASE("single cluster centroid is the mean") {
  const std::vector<LatLon> pts = {{0, 0}, {2, 0}, {4, 0}};
  const auto model = kmeans_fit(pts, 1, 42);
  REQUIRE(model.centroids.size() == 1);
  CHECK(model.centroids[0].lat == doctest::Approx(2.0));
  CHECK(model.centroids[0].lon == doctest::Approx(0.0));
  CHECK(model.wcss == doctest::Approx(8.0));  // 4 + 0 + 4
}

TEST_CASE("two well-separated groups are recovered for any seed") {
  const std::vector<LatLon> pts = {{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = kmeans_fit(pts, 2, seed);
    REQUIRE(model.centroids.size() == 2);
    std::vector<LatLon> got = model.centroids;
    std::sort(got.begin(), got.end(), [](const LatLon& a, const LatLon& b) {
      return a.lat < b.lat;
    });
    CHECK(got[0].lat == doctest::Approx(0.0));
    CHECK(got[0].lon == doctest::Approx(0.5));
    CHECK(got[1].lat == doctest::Approx(10.0));
    CHECK(got[1].lon == doctest::Approx(10.5));
    CHECK(model.wcss == doctest::Approx(1.0));  // 4 * 0.25
  }
}

TEST_CASE("wcss trace is monotone non-increasing on random instances") {
  Rng rng(2024);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 20 + static_cast<int>(rng.uniform_index(180));
    std::vector<LatLon> pts(n);
    for (auto& p : pts) {
      p.lat = rng.uniform(-5, 5);
      p.lon = rng.uniform(-5, 5);
    }
    const int K = 2 + static_cast<int>(rng.uniform_index(6));
    const auto model = kmeans_fit(pts, K, rng.next(), 50);
    REQUIRE(!model.wcss_trace.empty());
    for (std::size_t i = 1; i < model.wcss_trace.size(); ++i)
      CHECK(model.wcss_trace[i] <= model.wcss_trace[i - 1] + 1e-9);
    CHECK(model.wcss == doctest::Approx(model.wcss_trace.back()));
    CHECK(model.wcss == doctest::Approx(wcss_of(pts, model)));
  }
}

TEST_CASE("assignment is deterministic and 1-based") {
  const std::vector<LatLon> pts = {{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  const auto model = kmeans_fit(pts, 2, 3);
  std::set<int> ids;
  for (const auto& p : pts) {
    const int id = assign_location(p, model);
    CHECK(id >= 1);
    CHECK(id <= 2);
    ids.insert(id);
  }
  CHECK(ids.size() == 2);
  CHECK(assign_location(pts[0], model) == assign_location(pts[1], model));
  CHECK(assign_location(pts[2], model) == assign_location(pts[3], model));
}

TEST_CASE("same seed reproduces the same model") {
  Rng rng(9);
  std::vector<LatLon> pts(300);
  for (auto& p : pts) {
    p.lat = rng.uniform(40, 41);
    p.lon = rng.uniform(-75, -73);
  }
  const auto a = kmeans_fit(pts, 7, 555);
  const auto b = kmeans_fit(pts, 7, 555);
  REQUIRE(a.centroids.size() == b.centroids.size());
  for (std::size_t i = 0; i < a.centroids.size(); ++i) {
    CHECK(a.centroids[i].lat == b.centroids[i].lat);
    CHECK(a.centroids[i].lon == b.centroids[i].lon);
  }
  CHECK(a.wcss == b.wcss);
  CHECK(a.iterations_run == b.iterations_run);
}

TEST_CASE("parallel assignment matches single-threaded") {
  Rng rng(10);
  std::vector<LatLon> pts(500);
  for (auto& p : pts) {
    p.lat = rng.uniform(-1, 1);
    p.lon = rng.uniform(-1, 1);
  }
  const auto a = kmeans_fit(pts, 6, 77, 100, 1e-8, 1);
  const auto b = kmeans_fit(pts, 6, 77, 100, 1e-8, 8);
  REQUIRE(a.centroids.size() == b.centroids.size());
  for (std::size_t i = 0; i < a.centroids.size(); ++i) {
    CHECK(a.centroids[i].lat == b.centroids[i].lat);
    CHECK(a.centroids[i].lon == b.centroids[i].lon);
  }
  CHECK(a.wcss == b.wcss);
}

TEST_CASE("empty clusters are repaired") {
  // Two tight groups plus one starting centroid far from every point: the
  // first assignment leaves that centroid empty, so it must be reseeded
  // with a distant point instead of being dropped.
  std::vector<LatLon> pts;
  for (int i = 0; i < 5; ++i) {
    pts.push_back({0.0 + i * 1e-3, 0.0});
    pts.push_back({10.0 + i * 1e-3, 10.0});
  }
  const auto model = kmeans_fit_from(pts, {{0.0, 0.0}, {100.0, 100.0}});
  std::set<int> used;
  for (const auto& p : pts) used.insert(assign_location(p, model));
  CHECK(used.size() == 2);
  CHECK(model.wcss < 1e-4);
}

TEST_CASE("every cluster stays in use across seeds") {
  std::vector<LatLon> pts;
  for (int i = 0; i < 5; ++i) {
    pts.push_back({0.0 + i * 1e-3, 0.0});
    pts.push_back({50.0 + i * 1e-3, 0.0});
    pts.push_back({0.0 + i * 1e-3, 50.0});
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = kmeans_fit(pts, 3, seed);
    std::set<int> used;
    for (const auto& p : pts) used.insert(assign_location(p, model));
    CHECK(used.size() == 3);
  }
}

TEST_CASE("invalid arguments are rejected") {
  const std::vector<LatLon> pts = {{0, 0}, {1, 1}};
  CHECK_THROWS_AS(kmeans_fit(pts, 0, 1), ArgumentError);
  CHECK_THROWS_AS(kmeans_fit(pts, -2, 1), ArgumentError);
  CHECK_THROWS_AS(kmeans_fit(pts, 3, 1), ArgumentError);  // K > n
  CHECK_THROWS_AS(kmeans_fit({}, 1, 1), ArgumentError);
}

TEST_CASE("model json round-trips exactly") {
  const std::vector<LatLon> pts = {{40.75, -73.98}, {40.71, -74.01},
                                   {40.77, -73.87}, {40.69, -73.98},
                                   {40.75, -73.94}};
  const auto model = kmeans_fit(pts, 2, 12345);
  const auto text = cluster_model_to_json(model);
  const auto back = cluster_model_from_json(text);
  CHECK(back.K == model.K);
  CHECK(back.seed == model.seed);
  CHECK(back.iterations_run == model.iterations_run);
  CHECK(back.wcss == model.wcss);
  REQUIRE(back.centroids.size() == model.centroids.size());
  for (std::size_t i = 0; i < model.centroids.size(); ++i) {
    CHECK(back.centroids[i].lat == model.centroids[i].lat);
    CHECK(back.centroids[i].lon == model.centroids[i].lon);
  }

  const auto path =
      (std::filesystem::temp_directory_path() / "airdemand_kmeans_rt.json")
          .string();
  save_cluster_model(model, path);
  const auto loaded = load_cluster_model(path);
  CHECK(loaded.wcss == model.wcss);
  CHECK(loaded.centroids.size() == model.centroids.size());
  std::remove(path.c_str());
}

TEST_CASE("fit from explicit centroids converges to local optimum") {
  const std::vector<LatLon> pts = {{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  const auto model = kmeans_fit_from(pts, {{0, 0}, {10, 10}});
  CHECK(model.centroids[0].lat == doctest::Approx(0.0));
  CHECK(model.centroids[0].lon == doctest::Approx(0.5));
  CHECK(model.centroids[1].lat == doctest::Approx(10.0));
  CHECK(model.centroids[1].lon == doctest::Approx(10.5));
  CHECK(model.wcss == doctest::Approx(1.0));
}
