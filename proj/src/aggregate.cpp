#include "pga/aggregate.hpp"

namespace pga {

double aggregate(std::span<const double> values, AggregationKind kind) {
    if (values.empty()) throw InvalidInput("aggregate: empty input");
    double sum = 0.0;
    for (double v : values) sum += v;
    return kind == AggregationKind::sum ? sum : sum / static_cast<double>(values.size());
}

GroupAggregate group_aggregate(const GroupPartition& partition,
                               const std::map<SupplierId, double>& values, AggregationKind kind) {
    if (partition.groups.empty()) throw InvalidInput("group_aggregate: empty partition");
    GroupAggregate out;
    out.per_group.reserve(partition.groups.size());
    for (const Group& group : partition.groups) {
        if (group.empty()) throw InvalidInput("group_aggregate: empty group");
        double sum = 0.0;
        for (const SupplierId& member : group) {
            auto it = values.find(member);
            if (it == values.end()) {
                throw InvalidInput("group_aggregate: no value for supplier " + member);
            }
            sum += it->second;
        }
        out.per_group.push_back(kind == AggregationKind::sum
                                    ? sum
                                    : sum / static_cast<double>(group.size()));
    }
    out.composed = aggregate(out.per_group, kind);
    return out;
}

double distributed_share(double group_aggregate, std::size_t group_size, AggregationKind kind) {
    if (group_size == 0) throw InvalidParameter("distributed_share: empty group");
    return kind == AggregationKind::sum
               ? group_aggregate / static_cast<double>(group_size)
               : group_aggregate;
}

double recombine_shares(const std::vector<std::vector<double>>& reports_per_group,
                        AggregationKind kind) {
    if (reports_per_group.empty()) throw InvalidInput("recombine_shares: no groups");
    std::vector<double> group_values;
    group_values.reserve(reports_per_group.size());
    for (const std::vector<double>& reports : reports_per_group) {
        group_values.push_back(kind == AggregationKind::sum
                                   ? aggregate(reports, AggregationKind::sum)
                                   : aggregate(reports, AggregationKind::mean));
    }
    return aggregate(group_values, kind);
}

}  // namespace pga
