#pragma once

#include <map>
#include <span>

#include "pga/types.hpp"

namespace pga {

// Arithmetic mean or sum of a non-empty value set.
double aggregate(std::span<const double> values, AggregationKind kind);

struct GroupAggregate {
    std::vector<double> per_group;  // aG per group, in partition order
    double composed = 0.0;          // the aggregation applied to the group values
};

// Group-level aggregation at one (epoch, t): the per-group aggregates and the
// consumer's composed value a(aG_1, ..., aG_m). The composed top level uses
// the same aggregation as within groups, so for mean with unequal group sizes
// the composed value deviates from the direct mean (grand-mean weighting);
// for sum it always equals the direct sum.
GroupAggregate group_aggregate(const GroupPartition& partition,
                               const std::map<SupplierId, double>& values, AggregationKind kind);

// Per-member report in the distributed organization: aG/|G| under sum (so the
// group's reports sum back to aG), aG itself under mean.
double distributed_share(double group_aggregate, std::size_t group_size, AggregationKind kind);

// Consumer-side recombination of member reports: per group, the aggregation
// recovers aG from the members' reports; composing over groups reproduces the
// hierarchical value.
double recombine_shares(const std::vector<std::vector<double>>& reports_per_group,
                        AggregationKind kind);

}  // namespace pga
