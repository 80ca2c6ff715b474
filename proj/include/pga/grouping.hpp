#pragma once

#include <cstdint>
#include <map>

#include "pga/types.hpp"

namespace pga {

enum class SizeKind { fixed, uniform, powerlaw, step };

std::string to_string(SizeKind kind);
SizeKind parse_size_kind(const std::string& name);

// Group-size law with maximum size N: fixed always returns N, uniform draws
// from {2..N}, powerlaw draws from {2..N} with p(s) proportional to s^-gamma,
// step returns 2 or N with equal probability.
struct SizeDistribution {
    SizeKind kind = SizeKind::fixed;
    int max_size = 2;    // N >= 2
    double gamma = 2.0;  // powerlaw exponent, > 0
};

enum class GroupingStrategy { random, data_proximity, summarization_proximity };

std::string to_string(GroupingStrategy strategy);
GroupingStrategy parse_strategy(const std::string& name);

// i.i.d. group sizes drawn until they cover the population; the final draw is
// truncated so the sizes sum to the population exactly, which can leave one
// remainder group smaller than the distribution's support. Deterministic
// given the seed.
std::vector<int> sample_sizes(const SizeDistribution& dist, int population, std::uint64_t seed);

// Per-supplier series for one epoch; data proximity sorts on the series mean.
using EpochData = std::map<SupplierId, std::vector<double>>;

// Chunk the supplier set into groups of the given sizes. random shuffles by
// seed; data_proximity orders by the epoch mean of the raw series (recomputed
// every epoch); summarization_proximity orders by k with ties broken by
// supplier id, so partitions are stable across epochs while policies are.
GroupPartition partition(const std::vector<SupplierId>& suppliers, const std::vector<int>& sizes,
                         GroupingStrategy strategy, const EpochData& epoch_data,
                         const PolicyTable& policies, int epoch, std::uint64_t seed);

// Partition into m groups of size n/m rounded up or down (sizes differ by at
// most one), then delegate to partition.
GroupPartition equal_partition(const std::vector<SupplierId>& suppliers, int num_groups,
                               GroupingStrategy strategy, const EpochData& epoch_data,
                               const PolicyTable& policies, int epoch, std::uint64_t seed);

}  // namespace pga
