#include "pga/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pga/rng.hpp"

namespace pga {

namespace {

// Within-block SSE in O(1) from prefix sums over the sorted values:
// sum (x - mean)^2 = sum x^2 - (sum x)^2 / count.
class BlockCost {
public:
    explicit BlockCost(const std::vector<double>& sorted) {
        sum_.resize(sorted.size() + 1, 0.0);
        sum2_.resize(sorted.size() + 1, 0.0);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            sum_[i + 1] = sum_[i] + sorted[i];
            sum2_[i + 1] = sum2_[i] + sorted[i] * sorted[i];
        }
    }

    // SSE of sorted[a..b)
    double sse(std::size_t a, std::size_t b) const {
        double s = sum_[b] - sum_[a];
        double s2 = sum2_[b] - sum2_[a];
        double cost = s2 - s * s / static_cast<double>(b - a);
        return cost > 0.0 ? cost : 0.0;
    }

    double mean(std::size_t a, std::size_t b) const {
        return (sum_[b] - sum_[a]) / static_cast<double>(b - a);
    }

private:
    std::vector<double> sum_;
    std::vector<double> sum2_;
};

int nearest_centroid(const std::vector<double>& centroids, double x) {
    // centroids sorted ascending; equidistant points go to the lower one
    auto it = std::lower_bound(centroids.begin(), centroids.end(), x);
    if (it == centroids.begin()) return 0;
    if (it == centroids.end()) return static_cast<int>(centroids.size()) - 1;
    int hi = static_cast<int>(it - centroids.begin());
    int lo = hi - 1;
    return (x - centroids[lo]) <= (centroids[hi] - x) ? lo : hi;
}

}  // namespace

CentroidSet kmeans_1d(std::span<const double> values, int k) {
    if (k < 1) throw InvalidParameter("kmeans_1d: k must be >= 1");
    if (values.empty()) throw InvalidInput("kmeans_1d: empty input");
    std::size_t n = values.size();
    if (static_cast<std::size_t>(k) > n) {
        throw InsufficientData("kmeans_1d: fewer data points than clusters (k=" +
                               std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    CentroidSet out;
    if (static_cast<std::size_t>(k) >= distinct.size()) {
        // identity: raw and summarized data are equivalent
        out.centroids = std::move(distinct);
        out.sse = 0.0;
    } else {
        // D[j] = minimal SSE of sorted[0..j) split into the current number of
        // blocks; splits[c][j] = start of the last block in the optimal split
        // of sorted[0..j) into c+1 blocks.
        BlockCost cost(sorted);
        std::vector<double> prev(n + 1), cur(n + 1);
        std::vector<std::vector<std::size_t>> splits(
            static_cast<std::size_t>(k), std::vector<std::size_t>(n + 1, 0));
        for (std::size_t j = 1; j <= n; ++j) prev[j] = cost.sse(0, j);
        for (int c = 1; c < k; ++c) {
            auto& split_row = splits[static_cast<std::size_t>(c)];
            for (std::size_t j = static_cast<std::size_t>(c) + 1; j <= n; ++j) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t best_p = static_cast<std::size_t>(c);
                for (std::size_t p = static_cast<std::size_t>(c); p < j; ++p) {
                    double candidate = prev[p] + cost.sse(p, j);
                    if (candidate < best) {
                        best = candidate;
                        best_p = p;
                    }
                }
                cur[j] = best;
                split_row[j] = best_p;
            }
            std::swap(prev, cur);
        }
        out.sse = prev[n];

        // backtrack block boundaries, centroids are the block means
        std::vector<std::size_t> starts(static_cast<std::size_t>(k));
        std::size_t end = n;
        for (int c = k - 1; c >= 1; --c) {
            starts[static_cast<std::size_t>(c)] = splits[static_cast<std::size_t>(c)][end];
            end = starts[static_cast<std::size_t>(c)];
        }
        starts[0] = 0;
        out.centroids.resize(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            std::size_t a = starts[static_cast<std::size_t>(c)];
            std::size_t b = (c + 1 < k) ? starts[static_cast<std::size_t>(c) + 1] : n;
            out.centroids[static_cast<std::size_t>(c)] = cost.mean(a, b);
        }
    }

    out.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.assignment[i] = nearest_centroid(out.centroids, values[i]);
    }
    return out;
}

SummarizedSeries summarize(const SupplierSeries& raw, int k) {
    if (k < 1) throw InvalidParameter("summarize: k must be >= 1");
    if (raw.values.empty()) throw InvalidInput("summarize: empty series");
    CentroidSet clusters = kmeans_1d(raw.values, k);
    SummarizedSeries out;
    out.supplier = raw.supplier;
    out.epoch = raw.epoch;
    out.values.resize(raw.values.size());
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        out.values[i] = clusters.centroids[static_cast<std::size_t>(clusters.assignment[i])];
    }
    return out;
}

bool transfer_centroids(PolicyTable& policies, const SupplierId& from, const SupplierId& to,
                        int amount, int k_min, int k_max) {
    if (amount < 1) throw InvalidParameter("transfer_centroids: amount must be >= 1");
    auto from_it = policies.find(from);
    auto to_it = policies.find(to);
    if (from_it == policies.end()) throw InvalidParameter("transfer_centroids: unknown supplier " + from);
    if (to_it == policies.end()) throw InvalidParameter("transfer_centroids: unknown supplier " + to);
    int new_from = from_it->second.k - amount;
    int new_to = to_it->second.k + amount;
    if (new_from < k_min || new_to > k_max) return false;
    from_it->second.k = new_from;
    to_it->second.k = new_to;
    return true;
}

double policy_std(const PolicyTable& policies) {
    if (policies.size() < 2) return 0.0;
    double n = static_cast<double>(policies.size());
    double mean = 0.0;
    for (const auto& [id, policy] : policies) mean += policy.k;
    mean /= n;
    double ss = 0.0;
    for (const auto& [id, policy] : policies) {
        double d = policy.k - mean;
        ss += d * d;
    }
    return std::sqrt(ss / (n - 1.0));
}

DispersalResult disperse_levels(PolicyTable& policies, double target_std, std::uint64_t seed,
                                std::uint64_t max_steps, int k_min, int k_max) {
    if (target_std < 0.0) throw InvalidParameter("disperse_levels: negative target_std");
    DispersalResult result;
    result.achieved_std = policy_std(policies);
    if (policies.size() < 2 || result.achieved_std >= target_std) return result;

    std::vector<SupplierId> ids;
    ids.reserve(policies.size());
    for (const auto& [id, policy] : policies) ids.push_back(id);

    Rng rng(seed);
    while (result.attempts < max_steps && result.achieved_std < target_std) {
        rng.shuffle(ids);
        for (std::size_t i = 0; i + 1 < ids.size() && result.attempts < max_steps; i += 2) {
            ++result.attempts;
            const SupplierId& a = ids[i];
            const SupplierId& b = ids[i + 1];
            int ka = policies[a].k;
            int kb = policies[b].k;
            // the higher-k member gains, so the spread only grows
            bool a_gains = ka > kb || (ka == kb && rng.coin());
            const SupplierId& loser = a_gains ? b : a;
            const SupplierId& gainer = a_gains ? a : b;
            if (policies[loser].k - 1 < k_min) continue;  // blocked at the floor
            policies[loser].k -= 1;
            if (policies[gainer].k < k_max) policies[gainer].k += 1;  // else saturated
            ++result.transfers;
            result.achieved_std = policy_std(policies);
            if (result.achieved_std >= target_std) break;
        }
    }
    return result;
}

}  // namespace pga
