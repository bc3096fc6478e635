#include "tsclab/meta/kmeans.hpp"

#include <limits>
#include <stdexcept>

#include "tsclab/rng.hpp"

namespace tsclab::meta {

double squared_distance(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("squared_distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

namespace {

// D^2-weighted (k-means++ style) seeded centroid choice.
std::vector<std::vector<double>> seed_centroids(
    const std::vector<std::vector<double>>& points, int clusters, Rng& rng) {
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng.uniform_int(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < clusters) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = squared_distance(points[i], centroids[0]);
      for (std::size_t j = 1; j < centroids.size(); ++j)
        d2[i] = std::min(d2[i], squared_distance(points[i], centroids[j]));
      total += d2[i];
    }
    int pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (; pick < n - 1; ++pick) {
        target -= d2[pick];
        if (target <= 0.0) break;
      }
    } else {
      pick = static_cast<int>(rng.uniform_int(n));
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

KmeansResult lloyd_from(const std::vector<std::vector<double>>& points,
                        int clusters,
                        std::vector<std::vector<double>> centroids);

}  // namespace

KmeansResult kmeans_recluster(const std::vector<std::vector<double>>& points,
                              int clusters, std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (clusters < 1) throw std::invalid_argument("kmeans: clusters must be >= 1");
  if (n < clusters)
    throw std::invalid_argument("kmeans: fewer points than clusters");

  Rng rng(derive_seed(seed, 0x6b6d));
  // Several seeded restarts; keep the lowest within-cluster SSQ fixed point.
  constexpr int kRestarts = 8;
  KmeansResult best;
  double best_ssq = std::numeric_limits<double>::infinity();
  for (int r = 0; r < kRestarts; ++r) {
    KmeansResult res =
        lloyd_from(points, clusters, seed_centroids(points, clusters, rng));
    const double ssq = within_cluster_ssq(points, res.assignment, clusters);
    if (ssq < best_ssq) {
      best_ssq = ssq;
      best = std::move(res);
    }
  }
  return best;
}

namespace {

KmeansResult lloyd_from(const std::vector<std::vector<double>>& points,
                        int clusters,
                        std::vector<std::vector<double>> centroids) {
  const int n = static_cast<int>(points.size());
  KmeansResult res;
  res.centroids = std::move(centroids);
  res.assignment.assign(n, -1);

  auto nearest = [&](const std::vector<double>& p) {
    int best = 0;
    double best_d = squared_distance(p, res.centroids[0]);
    for (int j = 1; j < clusters; ++j) {
      const double d = squared_distance(p, res.centroids[j]);
      if (d < best_d) {  // strict: lowest-index tie-break
        best_d = d;
        best = j;
      }
    }
    return best;
  };

  constexpr int kMaxIterations = 100;
  for (res.iterations = 1; res.iterations <= kMaxIterations; ++res.iterations) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int j = nearest(points[i]);
      if (j != res.assignment[i]) {
        res.assignment[i] = j;
        changed = true;
      }
    }

    std::vector<int> counts(clusters, 0);
    std::vector<std::vector<double>> sums(
        clusters, std::vector<double>(points.front().size(), 0.0));
    for (int i = 0; i < n; ++i) {
      ++counts[res.assignment[i]];
      for (std::size_t d = 0; d < points[i].size(); ++d)
        sums[res.assignment[i]][d] += points[i][d];
    }
    for (int j = 0; j < clusters; ++j) {
      if (counts[j] > 0) {
        for (double& v : sums[j]) v /= counts[j];
        res.centroids[j] = std::move(sums[j]);
      } else {
        // Reseed with the point farthest from its own centroid.
        int far_i = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              squared_distance(points[i], res.centroids[res.assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        res.centroids[j] = points[far_i];
        changed = true;
      }
    }
    if (!changed) break;
  }
  return res;
}

}  // namespace

double within_cluster_ssq(const std::vector<std::vector<double>>& points,
                          const std::vector<int>& assignment, int clusters) {
  if (points.size() != assignment.size())
    throw std::invalid_argument("within_cluster_ssq: size mismatch");
  const std::size_t dim = points.empty() ? 0 : points.front().size();
  std::vector<int> counts(clusters, 0);
  std::vector<std::vector<double>> means(clusters,
                                         std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[assignment[i]];
    for (std::size_t d = 0; d < dim; ++d) means[assignment[i]][d] += points[i][d];
  }
  for (int j = 0; j < clusters; ++j)
    if (counts[j])
      for (double& v : means[j]) v /= counts[j];
  double ssq = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    ssq += squared_distance(points[i], means[assignment[i]]);
  return ssq;
}

}  // namespace tsclab::meta
