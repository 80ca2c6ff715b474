#include "pga/metrics.hpp"

#include <cmath>

#include "pga/aggregate.hpp"

namespace pga {

ErrorValue local_error_term(double r, double s) {
    double denom = std::abs(r) + std::abs(s);
    if (denom == 0.0) return {0.0, true};  // r = s = 0, by convention
    return {std::abs(r - s) / denom, true};
}

ErrorValue local_error(std::span<const double> raw, std::span<const double> summarized) {
    if (raw.size() != summarized.size()) throw InvalidInput("local_error: length mismatch");
    if (raw.empty()) throw InvalidInput("local_error: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        sum += local_error_term(raw[i], summarized[i]).value;
    }
    return {sum / static_cast<double>(raw.size()), true};
}

ErrorValue global_error(std::span<const double> raw, std::span<const double> summarized,
                        AggregationKind kind) {
    if (raw.size() != summarized.size()) throw InvalidInput("global_error: length mismatch");
    if (raw.empty()) throw InvalidInput("global_error: empty input");
    // Evaluated on the sums for either kind: the mean divides numerator and
    // denominator by the same n, so the value is identical and the mean/sum
    // agreement holds bit-for-bit.
    (void)kind;
    double ar = aggregate(raw, AggregationKind::sum);
    double as = aggregate(summarized, AggregationKind::sum);
    return local_error_term(ar, as);
}

ErrorValue local_group_error(double r, double group_aggregate) {
    return local_error_term(r, group_aggregate);
}

ErrorValue total_group_error(std::span<const double> summarized_members, double group_aggregate) {
    if (summarized_members.empty()) throw InvalidInput("total_group_error: empty group");
    double sum = 0.0;
    for (double s : summarized_members) {
        sum += local_error_term(s, group_aggregate).value;
    }
    return {sum, true};
}

ErrorValue mape_local_error_term(double r, double s) {
    if (r == 0.0) return ErrorValue::undefined();
    return {std::abs(r - s) / std::abs(r), true};
}

ErrorValue mape_local_error(std::span<const double> raw, std::span<const double> summarized) {
    if (raw.size() != summarized.size()) throw InvalidInput("mape_local_error: length mismatch");
    if (raw.empty()) throw InvalidInput("mape_local_error: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        ErrorValue term = mape_local_error_term(raw[i], summarized[i]);
        if (!term.defined) return ErrorValue::undefined();
        sum += term.value;
    }
    return {sum / static_cast<double>(raw.size()), true};
}

ErrorValue mape_global_error(std::span<const double> raw, std::span<const double> summarized,
                             AggregationKind kind) {
    if (raw.size() != summarized.size()) throw InvalidInput("mape_global_error: length mismatch");
    if (raw.empty()) throw InvalidInput("mape_global_error: empty input");
    // same sum-based evaluation as global_error
    (void)kind;
    double ar = aggregate(raw, AggregationKind::sum);
    double as = aggregate(summarized, AggregationKind::sum);
    return mape_local_error_term(ar, as);
}

ErrorValue pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("pearson: length mismatch");
    std::size_t n = a.size();
    if (n < 2) return ErrorValue::undefined();
    // A constant input has zero variance, but the subtracted mean carries
    // rounding noise, so detect constancy on the values themselves.
    auto constant = [](std::span<const double> v) {
        for (double x : v) {
            if (x != v.front()) return false;
        }
        return true;
    };
    if (constant(a) || constant(b)) return ErrorValue::undefined();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double da = a[i] - mean_a;
        double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return ErrorValue::undefined();
    double p = cov / (std::sqrt(var_a) * std::sqrt(var_b));
    // clamp fp drift so the derived C stays in [0,2]
    if (p > 1.0) p = 1.0;
    if (p < -1.0) p = -1.0;
    return {p, true};
}

ErrorValue privacy_correlation(std::span<const double> member_series,
                               std::span<const double> group_series) {
    ErrorValue p = pearson(member_series, group_series);
    if (!p.defined) return ErrorValue::undefined();
    return {1.0 - p.value, true};
}

}  // namespace pga
