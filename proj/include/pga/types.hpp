#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pga {

// An argument violates an operation's contract.
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input data violate an operation's contract (length mismatch, empty input).
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A series is too short for the requested cluster count.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t line_number)
        : std::runtime_error(msg + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
    std::size_t line;
};

// A loaded dataset is internally inconsistent.
struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using SupplierId = std::string;

// One supplier's raw measurements for one epoch. Time steps are 0-based
// internally; emitted records render them 1-based.
struct SupplierSeries {
    SupplierId supplier;
    int epoch = 0;
    std::vector<double> values;
};

// Same length as the raw series it came from, at most k distinct values,
// each equal to one of the cluster centroids.
struct SummarizedSeries {
    SupplierId supplier;
    int epoch = 0;
    std::vector<double> values;
};

using Dataset = std::vector<SupplierSeries>;

// Per-supplier cluster count; the summarization level is 1/k.
struct SummarizationPolicy {
    int k = 1;

    bool operator==(const SummarizationPolicy&) const = default;
};

// Ordered for deterministic iteration.
using PolicyTable = std::map<SupplierId, SummarizationPolicy>;

enum class AggregationKind { mean, sum };

std::string to_string(AggregationKind kind);
AggregationKind parse_aggregation_kind(const std::string& name);

// Members aggregating together. Non-empty, no duplicates.
using Group = std::vector<SupplierId>;

struct GroupPartition {
    int epoch = 0;
    std::vector<Group> groups;
};

// True iff groups are non-empty, pairwise disjoint and their union equals
// `suppliers` exactly.
bool is_valid_partition(const GroupPartition& partition, const std::vector<SupplierId>& suppliers);

// One (experiment, seed, epoch, time-step, metric) observation. epoch/t use
// -1 for "not applicable" and are rendered 1-based (or empty) on emission.
struct MetricRecord {
    std::string experiment;
    std::uint64_t seed = 0;
    int epoch = -1;
    int t = -1;
    std::string metric;
    double value = 0.0;
    bool defined = true;
    std::vector<std::pair<std::string, std::string>> context;
};

struct ValidationIssue {
    SupplierId supplier;
    int epoch = 0;
};

struct ValidationReport {
    std::vector<ValidationIssue> duplicates;    // repeated (supplier, epoch) pairs
    std::vector<ValidationIssue> bad_values;    // series containing non-finite values
    std::vector<ValidationIssue> empty_series;  // series with no values

    bool clean() const { return duplicates.empty() && bad_values.empty() && empty_series.empty(); }
};

// Pure report; callers decide whether to abort.
ValidationReport validate_dataset(const Dataset& series);

}  // namespace pga
