#include "pga/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

#include "pga/aggregate.hpp"
#include "pga/io.hpp"
#include "pga/metrics.hpp"
#include "pga/rng.hpp"
#include "pga/summarize.hpp"

namespace pga {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::macro_sweep: return "macro_sweep";
        case ExperimentKind::pair_grid: return "pair_grid";
        case ExperimentKind::incentive_grid: return "incentive_grid";
        case ExperimentKind::strategy_sweep: return "strategy_sweep";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "macro_sweep") return ExperimentKind::macro_sweep;
    if (name == "pair_grid") return ExperimentKind::pair_grid;
    if (name == "incentive_grid") return ExperimentKind::incentive_grid;
    if (name == "strategy_sweep") return ExperimentKind::strategy_sweep;
    throw InvalidParameter("unknown experiment kind: " + name);
}

std::string context_string(const std::vector<std::pair<std::string, std::string>>& context) {
    std::string out;
    for (const auto& [key, value] : context) {
        if (!out.empty()) out += ';';
        out += key;
        out += '=';
        out += value;
    }
    return out;
}

namespace {

using Context = std::vector<std::pair<std::string, std::string>>;

const EpochData kNoEpochData{};
const PolicyTable kNoPolicies{};

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// The active population of an experiment: suppliers present in every epoch
// whose every series is long enough for the largest level in the grid.
struct Prepared {
    std::vector<SupplierId> ids;  // sorted
    std::vector<int> epochs;      // sorted distinct epoch keys
    std::vector<std::vector<std::vector<double>>> raw;  // [epoch][supplier]
    std::vector<std::size_t> common_length;  // per epoch: min series length over suppliers
    std::vector<EpochData> epoch_data;       // per epoch: id -> series
};

Prepared prepare(const Dataset& data, int min_k_required) {
    std::set<int> epoch_set;
    for (const SupplierSeries& s : data) epoch_set.insert(s.epoch);
    if (epoch_set.empty()) throw DatasetError("experiment dataset is empty");

    std::map<SupplierId, std::map<int, const SupplierSeries*>> by_supplier;
    for (const SupplierSeries& s : data) {
        if (!by_supplier[s.supplier].emplace(s.epoch, &s).second) {
            throw DatasetError("duplicate series for supplier " + s.supplier + ", epoch " +
                               std::to_string(s.epoch));
        }
    }

    Prepared prep;
    prep.epochs.assign(epoch_set.begin(), epoch_set.end());
    int needed = std::max(1, min_k_required);
    for (const auto& [id, per_epoch] : by_supplier) {
        if (per_epoch.size() != epoch_set.size()) continue;  // absent in some epoch
        bool eligible = std::all_of(per_epoch.begin(), per_epoch.end(), [&](const auto& entry) {
            return static_cast<int>(entry.second->values.size()) >= needed;
        });
        if (eligible) prep.ids.push_back(id);
    }
    if (prep.ids.size() < 2) {
        throw DatasetError("fewer than 2 suppliers eligible at summarization level 1/" +
                           std::to_string(needed));
    }

    prep.raw.resize(prep.epochs.size());
    prep.common_length.resize(prep.epochs.size());
    prep.epoch_data.resize(prep.epochs.size());
    for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
        prep.raw[e].reserve(prep.ids.size());
        std::size_t common = std::numeric_limits<std::size_t>::max();
        for (const SupplierId& id : prep.ids) {
            const SupplierSeries* s = by_supplier[id].at(prep.epochs[e]);
            prep.raw[e].push_back(s->values);
            prep.epoch_data[e][id] = s->values;
            common = std::min(common, s->values.size());
        }
        prep.common_length[e] = common;
    }
    return prep;
}

// summarized values per level: [epoch][supplier] -> series
using SummMatrix = std::vector<std::vector<std::vector<double>>>;

std::map<int, SummMatrix> build_summaries(const Prepared& prep, const std::set<int>& levels,
                                          int threads) {
    std::map<int, SummMatrix> out;
    struct Task {
        SummMatrix* matrix;
        int k;
        std::size_t e;
    };
    std::vector<Task> tasks;
    for (int k : levels) {
        SummMatrix& matrix = out[k];
        matrix.resize(prep.epochs.size());
        for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
            matrix[e].resize(prep.ids.size());
            tasks.push_back({&matrix, k, e});
        }
    }
    parallel_for(static_cast<int>(tasks.size()), threads, [&](int ti) {
        const Task& task = tasks[static_cast<std::size_t>(ti)];
        for (std::size_t i = 0; i < prep.ids.size(); ++i) {
            const std::vector<double>& values = prep.raw[task.e][i];
            CentroidSet clusters = kmeans_1d(values, task.k);
            std::vector<double>& summ = (*task.matrix)[task.e][i];
            summ.resize(values.size());
            for (std::size_t t = 0; t < values.size(); ++t) {
                summ[t] = clusters.centroids[static_cast<std::size_t>(clusters.assignment[t])];
            }
        }
    });
    return out;
}

struct CellOutput {
    std::vector<MetricRecord> records;
    std::vector<std::pair<std::string, std::vector<int>>> size_draws;
};

struct Emitter {
    const std::string* experiment;
    std::uint64_t seed;  // replicate number, 1-based
    const Context* context;
    std::vector<MetricRecord>* out;

    void value(int epoch, int t, const char* metric, double v) {
        out->push_back({*experiment, seed, epoch, t, metric, v, true, *context});
    }
    void error(int epoch, int t, const char* metric, ErrorValue ev) {
        out->push_back({*experiment, seed, epoch, t, metric, ev.value, ev.defined, *context});
    }
};

std::vector<std::vector<int>> to_index_groups(const GroupPartition& part,
                                              const std::unordered_map<SupplierId, int>& index_of) {
    std::vector<std::vector<int>> groups;
    groups.reserve(part.groups.size());
    for (const Group& group : part.groups) {
        std::vector<int> idx;
        idx.reserve(group.size());
        for (const SupplierId& member : group) idx.push_back(index_of.at(member));
        groups.push_back(std::move(idx));
    }
    return groups;
}

// Per-(epoch, t) population metrics for one partition: the local error of the
// summarized data, the mean local group error against each member's group
// aggregate, and the global error of the composed consumer value against the
// direct raw aggregate. Time steps run to the epoch's common length so every
// group is fully populated.
template <class SummAt>
void epoch_metrics(Emitter& emit, const Prepared& prep, std::size_t e,
                   const std::vector<std::vector<int>>& groups, AggregationKind kind,
                   bool with_local_error, SummAt&& summ_at) {
    std::size_t n = prep.ids.size();
    std::size_t T = prep.common_length[e];
    std::vector<int> group_of(n, 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (int i : groups[g]) group_of[static_cast<std::size_t>(i)] = static_cast<int>(g);
    }
    std::vector<double> group_agg(groups.size());
    int epoch_pos = static_cast<int>(e);
    for (std::size_t t = 0; t < T; ++t) {
        double raw_total = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            double s = 0.0;
            for (int i : groups[g]) s += summ_at(e, static_cast<std::size_t>(i), t);
            group_agg[g] =
                kind == AggregationKind::sum ? s : s / static_cast<double>(groups[g].size());
        }
        double composed = aggregate(group_agg, kind);
        double local = 0.0;
        double local_group = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = prep.raw[e][i][t];
            raw_total += r;
            if (with_local_error) local += local_error_term(r, summ_at(e, i, t)).value;
            local_group +=
                local_group_error(r, group_agg[static_cast<std::size_t>(group_of[i])]).value;
        }
        double direct_raw =
            kind == AggregationKind::sum ? raw_total : raw_total / static_cast<double>(n);
        if (with_local_error) {
            emit.value(epoch_pos, static_cast<int>(t), "local_error",
                       local / static_cast<double>(n));
        }
        emit.value(epoch_pos, static_cast<int>(t), "local_group_error",
                   local_group / static_cast<double>(n));
        emit.error(epoch_pos, static_cast<int>(t), "global_error",
                   local_error_term(direct_raw, composed));
    }
}

std::unordered_map<SupplierId, int> make_index(const std::vector<SupplierId>& ids) {
    std::unordered_map<SupplierId, int> index;
    index.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);
    return index;
}

std::string fmt_int(int v) { return std::to_string(v); }

// ---------------------------------------------------------------- macro

std::vector<CellOutput> run_macro(const ExperimentConfig& cfg, const Prepared& prep,
                                  int threads) {
    std::map<int, SummMatrix> summaries = build_summaries(prep, {cfg.fixed_k}, threads);
    const SummMatrix& summ = summaries.at(cfg.fixed_k);
    auto index_of = make_index(prep.ids);
    int n = static_cast<int>(prep.ids.size());

    struct Cell {
        int N;
        int rep;
    };
    std::vector<Cell> cells;
    for (int N : cfg.group_sizes) {
        for (int rep = 0; rep < cfg.replicates; ++rep) cells.push_back({N, rep});
    }
    std::vector<CellOutput> outputs(cells.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int ci) {
        const Cell& cell = cells[static_cast<std::size_t>(ci)];
        CellOutput& out = outputs[static_cast<std::size_t>(ci)];
        Context ctx{{"N", fmt_int(cell.N)},
                    {"distribution", to_string(cfg.distribution)},
                    {"k", fmt_int(cfg.fixed_k)}};
        if (cfg.distribution == SizeKind::powerlaw) {
            ctx.emplace_back("gamma", format_double(cfg.powerlaw_gamma));
        }
        Emitter emit{&cfg.name, static_cast<std::uint64_t>(cell.rep) + 1, &ctx, &out.records};
        std::uint64_t cell_seed = derive_seed(cfg.master_seed, "macro", cell.N, cell.rep);

        std::vector<int> sizes;
        if (cell.N == 1) {
            sizes.assign(static_cast<std::size_t>(n), 1);  // singleton baseline
        } else {
            SizeDistribution dist{cfg.distribution, cell.N, cfg.powerlaw_gamma};
            sizes = sample_sizes(dist, n, derive_seed(cell_seed, "sizes"));
        }
        out.size_draws.emplace_back(context_string(ctx), sizes);

        for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
            GroupPartition part =
                partition(prep.ids, sizes, GroupingStrategy::random, kNoEpochData, kNoPolicies,
                          prep.epochs[e], derive_seed(cell_seed, "partition", static_cast<int>(e)));
            auto groups = to_index_groups(part, index_of);
            epoch_metrics(emit, prep, e, groups, cfg.aggregation, /*with_local_error=*/true,
                          [&](std::size_t ee, std::size_t i, std::size_t t) {
                              return summ[ee][i][t];
                          });
        }
    });
    return outputs;
}

// ---------------------------------------------------------------- pair grid

std::vector<CellOutput> run_pair(const ExperimentConfig& cfg, const Prepared& prep, int threads) {
    std::set<int> levels(cfg.k1_values.begin(), cfg.k1_values.end());
    levels.insert(cfg.k2_values.begin(), cfg.k2_values.end());
    std::map<int, SummMatrix> summaries = build_summaries(prep, levels, threads);
    int n = static_cast<int>(prep.ids.size());
    int g = cfg.pair_group_size;
    if (g < 2) throw InvalidParameter("pair_grid: group size must be >= 2");
    if (n < g) throw DatasetError("pair_grid: not enough suppliers for one group");

    struct Cell {
        int k1, k2, rep;
    };
    std::vector<Cell> cells;
    for (int k1 : cfg.k1_values) {
        for (int k2 : cfg.k2_values) {
            for (int rep = 0; rep < cfg.replicates; ++rep) cells.push_back({k1, k2, rep});
        }
    }
    std::vector<CellOutput> outputs(cells.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int ci) {
        const Cell& cell = cells[static_cast<std::size_t>(ci)];
        CellOutput& out = outputs[static_cast<std::size_t>(ci)];
        Context ctx{{"k1", fmt_int(cell.k1)},
                    {"k2", fmt_int(cell.k2)},
                    {"group_size", fmt_int(g)}};
        Emitter emit{&cfg.name, static_cast<std::uint64_t>(cell.rep) + 1, &ctx, &out.records};
        std::uint64_t cell_seed = derive_seed(cfg.master_seed, "pair", cell.k1, cell.k2, cell.rep);

        // random grouping; the first member of each group takes level k1,
        // the others k2. A population remainder smaller than g is dropped.
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        {
            Rng rng(derive_seed(cell_seed, "pairing"));
            rng.shuffle(order);
        }
        int usable = n - n % g;
        if (usable < n) {
            emit.value(-1, -1, "dropped_suppliers", static_cast<double>(n - usable));
        }
        std::vector<std::vector<int>> groups;
        groups.reserve(static_cast<std::size_t>(usable / g));
        for (int pos = 0; pos + g <= usable; pos += g) {
            groups.emplace_back(order.begin() + pos, order.begin() + pos + g);
        }
        out.size_draws.emplace_back(context_string(ctx),
                                    std::vector<int>(groups.size(), g));

        const SummMatrix& summ1 = summaries.at(cell.k1);
        const SummMatrix& summ2 = summaries.at(cell.k2);
        auto summ_of = [&](std::size_t role, std::size_t e, std::size_t i) -> const std::vector<double>& {
            return role == 0 ? summ1[e][i] : summ2[e][i];
        };

        std::vector<double> s_vals(static_cast<std::size_t>(g));
        std::vector<double> r_vals(static_cast<std::size_t>(g));
        for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
            std::size_t T = prep.common_length[e];
            int epoch_pos = static_cast<int>(e);
            for (std::size_t t = 0; t < T; ++t) {
                double a1_sum = 0.0, a2_sum = 0.0, diff_sum = 0.0;
                double gerr_sum = 0.0, tot_sum = 0.0;
                for (const std::vector<int>& group : groups) {
                    for (std::size_t j = 0; j < group.size(); ++j) {
                        std::size_t i = static_cast<std::size_t>(group[j]);
                        s_vals[j] = summ_of(j == 0 ? 0 : 1, e, i)[t];
                        r_vals[j] = prep.raw[e][i][t];
                    }
                    double agg_s = aggregate(s_vals, cfg.aggregation);
                    double agg_r = aggregate(r_vals, cfg.aggregation);
                    double a1 = local_group_error(r_vals[0], agg_s).value;
                    double a2 = 0.0;
                    for (std::size_t j = 1; j < group.size(); ++j) {
                        a2 += local_group_error(r_vals[j], agg_s).value;
                    }
                    a2 /= static_cast<double>(group.size() - 1);
                    a1_sum += a1;
                    a2_sum += a2;
                    diff_sum += std::abs(a1 - a2);
                    gerr_sum += local_error_term(agg_r, agg_s).value;
                    tot_sum += total_group_error(s_vals, agg_s).value;
                }
                double m = static_cast<double>(groups.size());
                emit.value(epoch_pos, static_cast<int>(t), "local_group_error_a1", a1_sum / m);
                emit.value(epoch_pos, static_cast<int>(t), "local_group_error_a2", a2_sum / m);
                emit.value(epoch_pos, static_cast<int>(t), "pair_error_diff", diff_sum / m);
                emit.value(epoch_pos, static_cast<int>(t), "group_global_error", gerr_sum / m);
                emit.value(epoch_pos, static_cast<int>(t), "total_group_error", tot_sum / m);
                emit.value(epoch_pos, static_cast<int>(t), "total_group_error_per_member",
                           tot_sum / m / static_cast<double>(g));
            }

            // shape privacy of a1 against the group series, over the epoch
            std::vector<double> group_series(T);
            std::vector<double> member_raw(T);
            std::vector<double> member_summ(T);
            double c_raw_sum = 0.0, c_summ_sum = 0.0;
            long c_raw_n = 0, c_summ_n = 0, undefined = 0;
            for (const std::vector<int>& group : groups) {
                for (std::size_t t = 0; t < T; ++t) {
                    for (std::size_t j = 0; j < group.size(); ++j) {
                        s_vals[j] = summ_of(j == 0 ? 0 : 1, e, static_cast<std::size_t>(group[j]))[t];
                    }
                    group_series[t] = aggregate(s_vals, cfg.aggregation);
                }
                std::size_t a1_index = static_cast<std::size_t>(group[0]);
                std::copy_n(prep.raw[e][a1_index].begin(), T, member_raw.begin());
                std::copy_n(summ_of(0, e, a1_index).begin(), T, member_summ.begin());
                ErrorValue c_raw = privacy_correlation(member_raw, group_series);
                ErrorValue c_summ = privacy_correlation(member_summ, group_series);
                if (c_raw.defined) {
                    c_raw_sum += c_raw.value;
                    ++c_raw_n;
                }
                if (c_summ.defined) {
                    c_summ_sum += c_summ.value;
                    ++c_summ_n;
                }
                if (!c_raw.defined || !c_summ.defined) ++undefined;
            }
            if (c_raw_n > 0) {
                emit.value(epoch_pos, -1, "privacy_correlation_raw",
                           c_raw_sum / static_cast<double>(c_raw_n));
            } else {
                emit.error(epoch_pos, -1, "privacy_correlation_raw", ErrorValue::undefined());
            }
            if (c_summ_n > 0) {
                emit.value(epoch_pos, -1, "privacy_correlation_summarized",
                           c_summ_sum / static_cast<double>(c_summ_n));
            } else {
                emit.error(epoch_pos, -1, "privacy_correlation_summarized",
                           ErrorValue::undefined());
            }
            if (undefined > 0) {
                emit.value(epoch_pos, -1, "privacy_correlation_undefined_groups",
                           static_cast<double>(undefined));
            }
        }
    });
    return outputs;
}

// ---------------------------------------------------------------- incentive

std::vector<CellOutput> run_incentive(const ExperimentConfig& cfg, const Prepared& prep,
                                      int threads) {
    std::set<int> levels(cfg.k_grid.begin(), cfg.k_grid.end());
    std::map<int, SummMatrix> summaries = build_summaries(prep, levels, threads);
    auto index_of = make_index(prep.ids);
    int n = static_cast<int>(prep.ids.size());

    struct Cell {
        int group_size, k, rep;
    };
    std::vector<Cell> cells;
    for (int gs : cfg.incentive_group_sizes) {
        for (int k : cfg.k_grid) {
            for (int rep = 0; rep < cfg.replicates; ++rep) cells.push_back({gs, k, rep});
        }
    }
    std::vector<CellOutput> outputs(cells.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int ci) {
        const Cell& cell = cells[static_cast<std::size_t>(ci)];
        CellOutput& out = outputs[static_cast<std::size_t>(ci)];
        Context ctx{{"group_size", fmt_int(cell.group_size)}, {"k", fmt_int(cell.k)}};
        Emitter emit{&cfg.name, static_cast<std::uint64_t>(cell.rep) + 1, &ctx, &out.records};
        std::uint64_t cell_seed =
            derive_seed(cfg.master_seed, "incentive", cell.group_size, cell.k, cell.rep);

        std::vector<int> sizes;
        if (cell.group_size == 1) {
            sizes.assign(static_cast<std::size_t>(n), 1);  // baseline column
        } else {
            SizeDistribution dist{SizeKind::fixed, cell.group_size, cfg.powerlaw_gamma};
            sizes = sample_sizes(dist, n, derive_seed(cell_seed, "sizes"));
        }
        out.size_draws.emplace_back(context_string(ctx), sizes);

        const SummMatrix& summ = summaries.at(cell.k);
        for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
            GroupPartition part =
                partition(prep.ids, sizes, GroupingStrategy::random, kNoEpochData, kNoPolicies,
                          prep.epochs[e], derive_seed(cell_seed, "partition", static_cast<int>(e)));
            auto groups = to_index_groups(part, index_of);
            epoch_metrics(emit, prep, e, groups, cfg.aggregation, /*with_local_error=*/true,
                          [&](std::size_t ee, std::size_t i, std::size_t t) {
                              return summ[ee][i][t];
                          });
        }
    });
    return outputs;
}

// ---------------------------------------------------------------- strategy

std::vector<CellOutput> run_strategy(const ExperimentConfig& cfg, const Prepared& prep,
                                     int threads) {
    int n = static_cast<int>(prep.ids.size());
    if (cfg.k_start < cfg.disperse_k_min || cfg.k_start > cfg.disperse_k_max) {
        throw InvalidParameter("strategy_sweep: k_start outside dispersal bounds");
    }

    // One dispersal state per (std target, replicate), shared by every
    // strategy and number of groups so their comparison is paired.
    struct State {
        PolicyTable policies;
        std::vector<int> k_of;  // by supplier index
        double achieved_std = 0.0;
    };
    std::size_t n_std = cfg.std_targets.size();
    std::vector<State> states(n_std * static_cast<std::size_t>(cfg.replicates));
    std::set<int> used_levels;
    for (std::size_t si = 0; si < n_std; ++si) {
        for (int rep = 0; rep < cfg.replicates; ++rep) {
            State& state = states[si * static_cast<std::size_t>(cfg.replicates) +
                                  static_cast<std::size_t>(rep)];
            for (const SupplierId& id : prep.ids) state.policies[id] = {cfg.k_start};
            DispersalResult dispersal = disperse_levels(
                state.policies, cfg.std_targets[si],
                derive_seed(cfg.master_seed, "disperse", static_cast<int>(si), rep),
                cfg.disperse_max_steps, cfg.disperse_k_min, cfg.disperse_k_max);
            state.achieved_std = dispersal.achieved_std;
            state.k_of.reserve(prep.ids.size());
            for (const SupplierId& id : prep.ids) {
                int k = state.policies[id].k;
                state.k_of.push_back(k);
                used_levels.insert(k);
            }
        }
    }
    std::map<int, SummMatrix> summaries = build_summaries(prep, used_levels, threads);
    auto index_of = make_index(prep.ids);

    struct Cell {
        int m;
        std::size_t std_index;
        GroupingStrategy strategy;
        int rep;
    };
    std::vector<Cell> cells;
    for (int m : cfg.num_groups) {
        for (std::size_t si = 0; si < n_std; ++si) {
            for (GroupingStrategy strategy : cfg.strategies) {
                for (int rep = 0; rep < cfg.replicates; ++rep) {
                    cells.push_back({m, si, strategy, rep});
                }
            }
        }
    }
    std::vector<CellOutput> outputs(cells.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int ci) {
        const Cell& cell = cells[static_cast<std::size_t>(ci)];
        CellOutput& out = outputs[static_cast<std::size_t>(ci)];
        const State& state = states[cell.std_index * static_cast<std::size_t>(cfg.replicates) +
                                    static_cast<std::size_t>(cell.rep)];
        Context ctx{{"m", fmt_int(cell.m)},
                    {"std_target", format_double(cfg.std_targets[cell.std_index])},
                    {"strategy", to_string(cell.strategy)}};
        Emitter emit{&cfg.name, static_cast<std::uint64_t>(cell.rep) + 1, &ctx, &out.records};
        emit.value(-1, -1, "achieved_std", state.achieved_std);

        {
            int base = n / cell.m, larger = n % cell.m;
            std::vector<int> sizes;
            for (int g = 0; g < cell.m; ++g) sizes.push_back(g < larger ? base + 1 : base);
            out.size_draws.emplace_back(context_string(ctx), sizes);
        }

        // per-supplier summarized rows for this dispersal state
        std::vector<std::vector<const std::vector<double>*>> rows(prep.epochs.size());
        for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
            rows[e].resize(prep.ids.size());
            for (std::size_t i = 0; i < prep.ids.size(); ++i) {
                rows[e][i] = &summaries.at(state.k_of[i])[e][i];
            }
        }

        // summarization proximity depends only on the policies, so its
        // partition is fixed across epochs; the other strategies re-form
        // groups every epoch.
        std::vector<std::vector<int>> fixed_groups;
        if (cell.strategy == GroupingStrategy::summarization_proximity) {
            GroupPartition part = equal_partition(
                prep.ids, cell.m, cell.strategy, kNoEpochData, state.policies, prep.epochs[0],
                derive_seed(cfg.master_seed, "strategy", cell.m, static_cast<int>(cell.std_index),
                            to_string(cell.strategy), cell.rep, "partition-fixed"));
            fixed_groups = to_index_groups(part, index_of);
        }
        for (std::size_t e = 0; e < prep.epochs.size(); ++e) {
            std::vector<std::vector<int>> groups;
            if (cell.strategy == GroupingStrategy::summarization_proximity) {
                groups = fixed_groups;
            } else {
                GroupPartition part = equal_partition(
                    prep.ids, cell.m, cell.strategy, prep.epoch_data[e], state.policies,
                    prep.epochs[e],
                    derive_seed(cfg.master_seed, "strategy", cell.m, static_cast<int>(cell.std_index),
                                to_string(cell.strategy), cell.rep, "partition",
                                static_cast<int>(e)));
                groups = to_index_groups(part, index_of);
            }
            epoch_metrics(emit, prep, e, groups, cfg.aggregation, /*with_local_error=*/false,
                          [&](std::size_t ee, std::size_t i, std::size_t t) {
                              return (*rows[ee][i])[t];
                          });
        }
    });
    return outputs;
}

int required_level(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::macro_sweep:
            return cfg.fixed_k;
        case ExperimentKind::pair_grid: {
            int k = 1;
            for (int v : cfg.k1_values) k = std::max(k, v);
            for (int v : cfg.k2_values) k = std::max(k, v);
            return k;
        }
        case ExperimentKind::incentive_grid: {
            int k = 1;
            for (int v : cfg.k_grid) k = std::max(k, v);
            return k;
        }
        case ExperimentKind::strategy_sweep:
            return cfg.disperse_k_max;
    }
    return 1;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.replicates < 1) throw InvalidParameter("config: replicates must be >= 1");
    auto positive = [](const std::vector<int>& v, const char* what) {
        if (v.empty()) throw InvalidParameter(std::string("config: empty grid: ") + what);
        for (int x : v) {
            if (x < 1) throw InvalidParameter(std::string("config: ") + what + " entries must be >= 1");
        }
    };
    switch (cfg.kind) {
        case ExperimentKind::macro_sweep:
            positive(cfg.group_sizes, "group_sizes");
            if (cfg.fixed_k < 1) throw InvalidParameter("config: k must be >= 1");
            break;
        case ExperimentKind::pair_grid:
            positive(cfg.k1_values, "k1_values");
            positive(cfg.k2_values, "k2_values");
            if (cfg.pair_group_size < 2) {
                throw InvalidParameter("config: pair_group_size must be >= 2");
            }
            break;
        case ExperimentKind::incentive_grid:
            positive(cfg.incentive_group_sizes, "group_sizes");
            positive(cfg.k_grid, "k_grid");
            break;
        case ExperimentKind::strategy_sweep:
            positive(cfg.num_groups, "num_groups");
            if (cfg.std_targets.empty()) throw InvalidParameter("config: empty std_targets");
            for (double s : cfg.std_targets) {
                if (s < 0.0) throw InvalidParameter("config: std_targets must be >= 0");
            }
            if (cfg.strategies.empty()) throw InvalidParameter("config: empty strategies");
            if (cfg.disperse_k_min < 1 || cfg.disperse_k_max < cfg.disperse_k_min) {
                throw InvalidParameter("config: bad dispersal bounds");
            }
            break;
    }
}

// The incentive grid's headline figure: for each level, the smallest group
// size whose mean local group error exceeds the best error reachable in the
// baseline scenario (no groups, any level in the grid).
void append_crossover(RunResult& run, const ExperimentConfig& cfg) {
    std::map<std::pair<int, int>, double> grid;  // (group_size, k) -> mean local group error
    for (const SummaryRow& row : run.summary) {
        if (row.metric != "local_group_error") continue;
        int gs = -1, k = -1;
        std::size_t pos = 0;
        std::string ctx = row.context;
        // context is "group_size=G;k=K"
        while (pos < ctx.size()) {
            std::size_t eq = ctx.find('=', pos);
            std::size_t end = ctx.find(';', pos);
            if (end == std::string::npos) end = ctx.size();
            std::string key = ctx.substr(pos, eq - pos);
            int value = std::stoi(ctx.substr(eq + 1, end - eq - 1));
            if (key == "group_size") gs = value;
            if (key == "k") k = value;
            pos = end + 1;
        }
        if (gs > 0 && k > 0) grid[{gs, k}] = row.mean;
    }
    double baseline_max = -std::numeric_limits<double>::infinity();
    for (int k : cfg.k_grid) {
        auto it = grid.find({1, k});
        if (it != grid.end()) baseline_max = std::max(baseline_max, it->second);
    }
    if (!std::isfinite(baseline_max)) return;  // no baseline column in the grid
    std::vector<int> sizes_sorted;
    for (int gs : cfg.incentive_group_sizes) {
        if (gs > 1) sizes_sorted.push_back(gs);
    }
    std::sort(sizes_sorted.begin(), sizes_sorted.end());
    for (int k : cfg.k_grid) {
        for (int gs : sizes_sorted) {
            auto it = grid.find({gs, k});
            if (it != grid.end() && it->second > baseline_max) {
                run.summary.push_back({"crossover_group_size", "k=" + fmt_int(k),
                                       static_cast<double>(gs), 0.0, cfg.replicates});
                break;
            }
        }
    }
}

// Figure-level view of intra-pair fairness: the gap between the two roles'
// average local group errors. Zero on the level diagonal up to sampling
// noise, since equal levels make the roles exchangeable.
void append_pair_gaps(RunResult& run) {
    std::map<std::string, std::pair<const SummaryRow*, const SummaryRow*>> by_context;
    for (const SummaryRow& row : run.summary) {
        if (row.metric == "local_group_error_a1") by_context[row.context].first = &row;
        if (row.metric == "local_group_error_a2") by_context[row.context].second = &row;
    }
    std::vector<SummaryRow> gaps;
    for (const auto& [context, rows] : by_context) {
        if (rows.first == nullptr || rows.second == nullptr) continue;
        gaps.push_back({"pair_error_mean_gap", context,
                        std::abs(rows.first->mean - rows.second->mean), 0.0,
                        std::min(rows.first->seeds, rows.second->seeds)});
    }
    run.summary.insert(run.summary.end(), gaps.begin(), gaps.end());
}

}  // namespace

Dataset load_experiment_data(const ExperimentConfig& config, PreprocessReport* report) {
    if (config.data_path.empty()) {
        return generate_synthetic(config.synthetic, derive_seed(config.master_seed, "data"));
    }
    LoadResult loaded;
    switch (config.data_format) {
        case DatasetFormat::ecbt_like:
            loaded = load_ecbt_like(config.data_path, config.availability_threshold);
            break;
        case DatasetFormat::nrel_like:
            loaded = load_nrel_like(config.data_path);
            break;
        case DatasetFormat::synthetic:
            throw InvalidParameter("config: data_format required when data is a file");
    }
    if (report != nullptr) *report = loaded.report;
    return std::move(loaded.series);
}

RunResult run_experiment(const ExperimentConfig& config, const Dataset& data, int threads) {
    validate_config(config);
    if (threads < 1) throw InvalidParameter("run_experiment: threads must be >= 1");
    ExperimentConfig cfg = config;
    if (cfg.name.empty()) cfg.name = to_string(cfg.kind);

    Prepared prep = prepare(data, required_level(cfg));

    std::vector<CellOutput> outputs;
    switch (cfg.kind) {
        case ExperimentKind::macro_sweep: outputs = run_macro(cfg, prep, threads); break;
        case ExperimentKind::pair_grid: outputs = run_pair(cfg, prep, threads); break;
        case ExperimentKind::incentive_grid: outputs = run_incentive(cfg, prep, threads); break;
        case ExperimentKind::strategy_sweep: outputs = run_strategy(cfg, prep, threads); break;
    }

    RunResult run;
    std::map<std::string, std::map<int, long>> size_counts;
    for (CellOutput& out : outputs) {
        run.records.insert(run.records.end(), std::make_move_iterator(out.records.begin()),
                           std::make_move_iterator(out.records.end()));
        for (const auto& [ctx, sizes] : out.size_draws) {
            for (int s : sizes) size_counts[ctx][s] += 1;
        }
    }
    for (const auto& [ctx, counts] : size_counts) {
        for (const auto& [size, count] : counts) run.sizes.push_back({ctx, size, count});
    }
    run.summary = summarize_records(run.records);
    if (cfg.kind == ExperimentKind::incentive_grid) append_crossover(run, cfg);
    if (cfg.kind == ExperimentKind::pair_grid) append_pair_gaps(run);
    return run;
}

std::vector<SummaryRow> summarize_records(const std::vector<MetricRecord>& records) {
    struct Acc {
        double sum = 0.0;
        long count = 0;
    };
    std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, Acc>> cells;
    for (const MetricRecord& record : records) {
        if (!record.defined) continue;
        Acc& acc = cells[{record.metric, context_string(record.context)}][record.seed];
        acc.sum += record.value;
        acc.count += 1;
    }
    std::vector<SummaryRow> rows;
    rows.reserve(cells.size());
    for (const auto& [key, by_seed] : cells) {
        std::vector<double> means;
        means.reserve(by_seed.size());
        for (const auto& [seed, acc] : by_seed) {
            means.push_back(acc.sum / static_cast<double>(acc.count));
        }
        double mean = std::accumulate(means.begin(), means.end(), 0.0) /
                      static_cast<double>(means.size());
        double stddev = 0.0;
        if (means.size() > 1) {
            double ss = 0.0;
            for (double v : means) ss += (v - mean) * (v - mean);
            stddev = std::sqrt(ss / static_cast<double>(means.size() - 1));
        }
        rows.push_back({key.first, key.second, mean, stddev, static_cast<int>(means.size())});
    }
    return rows;
}

}  // namespace pga
