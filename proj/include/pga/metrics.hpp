#pragma once

#include <span>

#include "pga/types.hpp"

namespace pga {

// One error observation. `defined` is false when the measure's denominator
// degenerates: MAPE with zero raw values, correlation with zero variance.
// The symmetric measures instead resolve 0/0 to 0 and stay defined.
struct ErrorValue {
    double value = 0.0;
    bool defined = true;

    static ErrorValue undefined() { return {0.0, false}; }
};

// Symmetric per-supplier term |r-s| / (|r|+|s|). Bounded in [0,1].
ErrorValue local_error_term(double r, double s);

// Local error: mean of the symmetric terms over index-aligned suppliers.
// Higher value means more privacy.
ErrorValue local_error(std::span<const double> raw, std::span<const double> summarized);

// Global error |a(R)-a(S)| / (|a(R)|+|a(S)|). Higher value means less
// accuracy. Identical under mean and sum aggregation.
ErrorValue global_error(std::span<const double> raw, std::span<const double> summarized,
                        AggregationKind kind);

// Local group error |r - aG| / (|r|+|aG|) of one member against the group
// aggregate. Reduces to local_error_term for singleton groups.
ErrorValue local_group_error(double r, double group_aggregate);

// Total group error: sum (not mean) over members of the symmetric term
// between each summarized value and the group aggregate. Range [0, |G|].
ErrorValue total_group_error(std::span<const double> summarized_members, double group_aggregate);

// Original MAPE-style measures, normalized on the raw data. Unbounded above;
// undefined whenever a denominator is zero.
ErrorValue mape_local_error_term(double r, double s);
ErrorValue mape_local_error(std::span<const double> raw, std::span<const double> summarized);
ErrorValue mape_global_error(std::span<const double> raw, std::span<const double> summarized,
                             AggregationKind kind);

// Pearson product-moment correlation between two equal-length series.
// Undefined when either input has zero variance (fewer than 2 points counts
// as zero variance).
ErrorValue pearson(std::span<const double> a, std::span<const double> b);

// Privacy-correlation C = 1 - pearson, in [0, 2]. C = 0 means the group
// series has exactly the member's shape (minimal privacy); C = 2 means
// perfect anti-correlation. Translation- and scale-invariant.
ErrorValue privacy_correlation(std::span<const double> member_series,
                               std::span<const double> group_series);

}  // namespace pga
