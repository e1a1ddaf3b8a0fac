#pragma once

#include "tsgan/numerics.hpp"
#include "tsgan/series.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tsgan {

struct DtwResult {
    double distance = 0.0;
    // 0-based (i, j) pairs from (0, 0) to (n-1, m-1).
    std::vector<std::pair<std::size_t, std::size_t>> path;
};

struct DtwOptions {
    // Sakoe-Chiba half-width; unset means unconstrained.
    std::optional<std::size_t> band;
};

// Unconstrained DTW with steps (1,0), (0,1), (1,1) and squared pointwise cost.
// The reported distance is the square root of the optimal path sum.
DtwResult dtw(const Series& q, const Series& c, const DtwOptions& options = {});
double dtw_distance(const Series& q, const Series& c, const DtwOptions& options = {});

double euclidean_distance(const Series& a, const Series& b);

struct SimilarityReport {
    std::string group_a;
    std::string group_b; // empty for within-group reports
    std::size_t n = 0;
    std::size_t pair_count = 0;
    double mean = 0.0;
    double std_dev = 0.0; // population standard deviation over the pairs
};

// Draws n members per group without replacement. Without group_b, every
// within-group pair (n(n-1)/2) is scored; otherwise every cross pair (n*n).
SimilarityReport average_similarity(const std::vector<Series>& group_a,
                                    const std::vector<Series>* group_b, std::size_t n, Rng& rng,
                                    std::string name_a = "a", std::string name_b = "");

// CSV with header "group_a,group_b,n,mean,std".
std::string similarity_csv(const std::vector<SimilarityReport>& reports);

enum class DistanceKind { dtw, euclidean };

struct KMedoidsResult {
    std::vector<std::size_t> medoids;    // indices into the input set
    std::vector<std::size_t> assignment; // position in `medoids` for each point
    double cost = 0.0;                   // total distance of points to their medoid
    std::vector<double> cost_history;    // after BUILD, then after each accepted swap
};

// PAM: greedy BUILD, then repeatedly apply the best improving (medoid, non-medoid) swap.
KMedoidsResult k_medoids(const std::vector<Series>& set, std::size_t k,
                         DistanceKind distance = DistanceKind::dtw);

// Argmin of DTW distance; ties resolve to the lowest index.
std::size_t nearest_generated(const Series& example, const std::vector<Series>& generated);

} // namespace tsgan
