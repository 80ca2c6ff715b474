#pragma once

#include <cstdint>
#include <span>

#include "pga/types.hpp"

namespace pga {

// Result of exact 1D k-means on one value sequence.
struct CentroidSet {
    std::vector<double> centroids;  // strictly increasing
    std::vector<int> assignment;    // input index -> nearest centroid index (ties to the lower)
    double sse = 0.0;               // within-cluster sum of squares of the optimal clustering
};

// Exact 1D k-means: dynamic programming over the sorted values (optimal 1D
// clusters are contiguous in sorted order), globally minimal SSE, no
// initialization ambiguity. If k is at least the number of distinct values
// the clustering is the identity.
//
// Errors: k < 1 -> InvalidParameter; empty input -> InvalidInput;
// k > length -> InsufficientData.
CentroidSet kmeans_1d(std::span<const double> values, int k);

// The summarization step: substitute every raw value with its nearest
// centroid. k = 1 yields the constant mean; k >= distinct count yields the
// input unchanged.
SummarizedSeries summarize(const SupplierSeries& raw, int k);

// Move `amount` summarization units from one paired supplier to the other;
// the population total of k is conserved. Returns false and leaves the table
// untouched if either side's k would leave [k_min, k_max].
bool transfer_centroids(PolicyTable& policies, const SupplierId& from, const SupplierId& to,
                        int amount, int k_min, int k_max);

struct DispersalResult {
    double achieved_std = 0.0;       // sample standard deviation of k after dispersal
    std::uint64_t attempts = 0;      // pair transfers attempted (applied or blocked)
    std::uint64_t transfers = 0;     // transfers applied
};

// Spread the summarization levels of a population until the sample standard
// deviation of k reaches target_std or max_steps pair attempts elapse. Each
// round randomly pairs the population and moves one unit within each pair
// toward the member with the higher k (ties resolved by a random bit), so
// the deviation never decreases. A gainer already at k_max is saturated: the
// loser still sheds its unit, which evaporates at the cap. This keeps every
// level inside [k_min, k_max] while letting a population that starts at
// k_max (the usual initial state) disperse at all; away from the cap the
// population total of k is conserved. Deterministic given the seed.
DispersalResult disperse_levels(PolicyTable& policies, double target_std, std::uint64_t seed,
                                std::uint64_t max_steps, int k_min, int k_max);

// Sample standard deviation of the k values in a policy table (0 for fewer
// than two entries).
double policy_std(const PolicyTable& policies);

}  // namespace pga
