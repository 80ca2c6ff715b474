#include "pga/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pga/rng.hpp"

namespace pga {

std::string to_string(SizeKind kind) {
    switch (kind) {
        case SizeKind::fixed: return "fixed";
        case SizeKind::uniform: return "uniform";
        case SizeKind::powerlaw: return "powerlaw";
        case SizeKind::step: return "step";
    }
    return "?";
}

SizeKind parse_size_kind(const std::string& name) {
    if (name == "fixed") return SizeKind::fixed;
    if (name == "uniform") return SizeKind::uniform;
    if (name == "powerlaw") return SizeKind::powerlaw;
    if (name == "step") return SizeKind::step;
    throw InvalidParameter("unknown size distribution: " + name);
}

std::string to_string(GroupingStrategy strategy) {
    switch (strategy) {
        case GroupingStrategy::random: return "random";
        case GroupingStrategy::data_proximity: return "data_proximity";
        case GroupingStrategy::summarization_proximity: return "summarization_proximity";
    }
    return "?";
}

GroupingStrategy parse_strategy(const std::string& name) {
    if (name == "random") return GroupingStrategy::random;
    if (name == "data_proximity") return GroupingStrategy::data_proximity;
    if (name == "summarization_proximity") return GroupingStrategy::summarization_proximity;
    throw InvalidParameter("unknown grouping strategy: " + name);
}

namespace {

int draw_size(const SizeDistribution& dist, Rng& rng) {
    switch (dist.kind) {
        case SizeKind::fixed:
            return dist.max_size;
        case SizeKind::uniform:
            return rng.uniform_int(2, dist.max_size);
        case SizeKind::step:
            return rng.coin() ? 2 : dist.max_size;
        case SizeKind::powerlaw: {
            // discrete p(s) proportional to s^-gamma over {2..N}, by inverse CDF
            double total = 0.0;
            for (int s = 2; s <= dist.max_size; ++s) total += std::pow(s, -dist.gamma);
            double u = rng.uniform() * total;
            double acc = 0.0;
            for (int s = 2; s <= dist.max_size; ++s) {
                acc += std::pow(s, -dist.gamma);
                if (u < acc) return s;
            }
            return dist.max_size;
        }
    }
    return dist.max_size;
}

}  // namespace

std::vector<int> sample_sizes(const SizeDistribution& dist, int population, std::uint64_t seed) {
    if (population < 2) throw InvalidParameter("sample_sizes: population must be >= 2");
    if (dist.max_size < 2) throw InvalidParameter("sample_sizes: max group size must be >= 2");
    if (dist.kind == SizeKind::powerlaw && !(dist.gamma > 0.0)) {
        throw InvalidParameter("sample_sizes: powerlaw exponent must be > 0");
    }
    Rng rng(seed);
    std::vector<int> sizes;
    int remaining = population;
    while (remaining > 0) {
        int s = draw_size(dist, rng);
        if (s > remaining) s = remaining;  // remainder group
        sizes.push_back(s);
        remaining -= s;
    }
    return sizes;
}

GroupPartition partition(const std::vector<SupplierId>& suppliers, const std::vector<int>& sizes,
                         GroupingStrategy strategy, const EpochData& epoch_data,
                         const PolicyTable& policies, int epoch, std::uint64_t seed) {
    long total = std::accumulate(sizes.begin(), sizes.end(), 0L);
    if (total != static_cast<long>(suppliers.size())) {
        throw InvalidParameter("partition: sizes sum to " + std::to_string(total) + ", expected " +
                               std::to_string(suppliers.size()));
    }
    if (std::any_of(sizes.begin(), sizes.end(), [](int s) { return s < 1; })) {
        throw InvalidParameter("partition: group sizes must be >= 1");
    }

    std::vector<SupplierId> ordered = suppliers;
    switch (strategy) {
        case GroupingStrategy::random: {
            Rng rng(seed);
            rng.shuffle(ordered);
            break;
        }
        case GroupingStrategy::data_proximity: {
            std::vector<std::pair<double, SupplierId>> keyed;
            keyed.reserve(ordered.size());
            for (const SupplierId& id : ordered) {
                auto it = epoch_data.find(id);
                if (it == epoch_data.end() || it->second.empty()) {
                    throw InvalidParameter("partition: no epoch data for supplier " + id);
                }
                double mean = std::accumulate(it->second.begin(), it->second.end(), 0.0) /
                              static_cast<double>(it->second.size());
                keyed.emplace_back(mean, id);
            }
            std::sort(keyed.begin(), keyed.end());
            for (std::size_t i = 0; i < keyed.size(); ++i) ordered[i] = keyed[i].second;
            break;
        }
        case GroupingStrategy::summarization_proximity: {
            std::vector<std::pair<int, SupplierId>> keyed;
            keyed.reserve(ordered.size());
            for (const SupplierId& id : ordered) {
                auto it = policies.find(id);
                if (it == policies.end()) {
                    throw InvalidParameter("partition: no policy for supplier " + id);
                }
                keyed.emplace_back(it->second.k, id);
            }
            std::sort(keyed.begin(), keyed.end());
            for (std::size_t i = 0; i < keyed.size(); ++i) ordered[i] = keyed[i].second;
            break;
        }
    }

    GroupPartition out;
    out.epoch = epoch;
    out.groups.reserve(sizes.size());
    std::size_t pos = 0;
    for (int s : sizes) {
        Group group(ordered.begin() + static_cast<long>(pos),
                    ordered.begin() + static_cast<long>(pos) + s);
        out.groups.push_back(std::move(group));
        pos += static_cast<std::size_t>(s);
    }
    return out;
}

GroupPartition equal_partition(const std::vector<SupplierId>& suppliers, int num_groups,
                               GroupingStrategy strategy, const EpochData& epoch_data,
                               const PolicyTable& policies, int epoch, std::uint64_t seed) {
    int n = static_cast<int>(suppliers.size());
    if (num_groups < 1) throw InvalidParameter("equal_partition: need at least one group");
    if (num_groups > n) throw InvalidParameter("equal_partition: more groups than suppliers");
    int base = n / num_groups;
    int larger = n % num_groups;
    std::vector<int> sizes;
    sizes.reserve(static_cast<std::size_t>(num_groups));
    for (int g = 0; g < num_groups; ++g) sizes.push_back(g < larger ? base + 1 : base);
    // Scatter the oversized groups along the chunk order. The proximity
    // strategies sort suppliers before chunking, and pinning the larger
    // groups to one end of that order would couple group size to the sort
    // key and bias the composed mean.
    Rng rng(derive_seed(seed, "size-placement"));
    rng.shuffle(sizes);
    return partition(suppliers, sizes, strategy, epoch_data, policies, epoch, seed);
}

}  // namespace pga
