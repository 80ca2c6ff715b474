#include "pga/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pga {

std::string to_string(AggregationKind kind) {
    return kind == AggregationKind::mean ? "mean" : "sum";
}

AggregationKind parse_aggregation_kind(const std::string& name) {
    if (name == "mean") return AggregationKind::mean;
    if (name == "sum") return AggregationKind::sum;
    throw InvalidParameter("unknown aggregation kind: " + name);
}

bool is_valid_partition(const GroupPartition& partition, const std::vector<SupplierId>& suppliers) {
    if (partition.groups.empty()) return suppliers.empty();
    std::set<SupplierId> seen;
    for (const Group& group : partition.groups) {
        if (group.empty()) return false;
        for (const SupplierId& member : group) {
            if (!seen.insert(member).second) return false;  // duplicate across or within groups
        }
    }
    if (seen.size() != suppliers.size()) return false;
    return std::all_of(suppliers.begin(), suppliers.end(),
                       [&](const SupplierId& id) { return seen.count(id) != 0; });
}

ValidationReport validate_dataset(const Dataset& series) {
    ValidationReport report;
    std::set<std::pair<SupplierId, int>> keys;
    for (const SupplierSeries& s : series) {
        if (!keys.insert({s.supplier, s.epoch}).second) {
            report.duplicates.push_back({s.supplier, s.epoch});
        }
        if (s.values.empty()) {
            report.empty_series.push_back({s.supplier, s.epoch});
            continue;
        }
        if (std::any_of(s.values.begin(), s.values.end(),
                        [](double v) { return !std::isfinite(v); })) {
            report.bad_values.push_back({s.supplier, s.epoch});
        }
    }
    return report;
}

}  // namespace pga
