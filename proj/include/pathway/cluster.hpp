#pragma once

#include <cstdint>
#include <vector>

#include "pathway/partition.hpp"

namespace pathway {

enum class KmeansInit { plusplus, random_points };

struct Clustering {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;  // k * dim
    std::vector<int> labels;        // one per input point
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations = 0;
    std::vector<double> inertia_history;  // per Lloyd iteration
};

// points: n rows of d values, row-major. Throws ConfigError for n < k and
// DataError for non-finite inputs.
Clustering kmeans(const std::vector<double>& points, std::size_t n, std::size_t d,
                  std::size_t k, KmeansInit init, std::uint64_t seed,
                  int max_iter = 300, double tol = 1e-6);

std::vector<double> kmeanspp_init(const std::vector<double>& points, std::size_t n,
                                  std::size_t d, std::size_t k, std::uint64_t seed);

// Permute cluster IDs so the mean of centroid components is increasing.
// Returns the permutation applied: new_id = perm[old_id].
std::vector<int> relabel_by_centroid(Clustering& c);

double rand_index(const std::vector<int>& a, const std::vector<int>& b);
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct StabilityEstimate {
    std::size_t k = 0;
    double averaged_ari = 0.0;
    std::vector<double> comparison_aris;  // 6 entries
    double near_optimal_inertia = 0.0;
};

// 10 k-means++ runs (seeds seed..seed+9): the minimum-inertia run is the
// near-optimal reference. 6 random-init runs (seeds seed+10..seed+15) are
// each compared to it by ARI; the mean is the stability score.
StabilityEstimate stability_estimate(const std::vector<double>& points, std::size_t n,
                                     std::size_t d, std::size_t k, std::uint64_t seed,
                                     int threads = 1);

struct SweepResult {
    std::vector<StabilityEstimate> rows;   // one per k in the input range
    std::size_t recommended_k = 0;
    std::vector<std::size_t> peaks;        // every k > 3 satisfying the peak rule
    bool tie_fallback = false;             // flat curve, fell back to smallest k > 3
};

// First-local-peak-after-3 selection; a boundary k counts as a peak only if
// it exceeds its inner neighbor.
SweepResult stability_sweep_k(const std::vector<double>& points, std::size_t n,
                              std::size_t d, const std::vector<std::size_t>& ks,
                              std::uint64_t seed, int threads = 1);

// Per-(t, partition) labels; -1 marks invalid entries.
using LabelField = std::vector<std::int32_t>;

// Nearest-centroid labels for one signature tensor (ties to lowest ID).
LabelField assign_labels(const SignatureTensor& sig, const std::vector<double>& centroids,
                         std::size_t k, std::size_t d);

}  // namespace pathway
