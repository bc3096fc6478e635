#pragma once

#include <cstdint>
#include <vector>

namespace tsclab::meta {

struct KmeansResult {
  std::vector<int> assignment;                  // flow -> cluster
  std::vector<std::vector<double>> centroids;   // cluster means
  int iterations = 0;
};

// Lloyd iterations to a fixed point (or 100 iterations): assign each point
// to the nearest centroid (Euclidean, lowest-index tie-break), recompute
// centroids as member means; an empty cluster is reseeded with the point
// farthest from its own centroid. Initial centroids are k distinct seeded
// points. Rejects fewer points than clusters.
KmeansResult kmeans_recluster(const std::vector<std::vector<double>>& points,
                              int clusters, std::uint64_t seed);

double squared_distance(const std::vector<double>& a,
                        const std::vector<double>& b);

// Within-cluster sum of squared distances to member means; the quantity
// the exhaustive clustering oracle minimizes.
double within_cluster_ssq(const std::vector<std::vector<double>>& points,
                          const std::vector<int>& assignment, int clusters);

}  // namespace tsclab::meta
