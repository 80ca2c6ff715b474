// Acceptance suite: end-to-end checks of the simulator's contract, one
// printed line per criterion. The CLI binary path is taken from argv[1]
// (wired up by ctest) for the subprocess checks.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pga/aggregate.hpp"
#include "pga/harness.hpp"
#include "pga/ingest.hpp"
#include "pga/io.hpp"
#include "pga/metrics.hpp"
#include "pga/rng.hpp"
#include "pga/summarize.hpp"

using namespace pga;
namespace fs = std::filesystem;

namespace {

int worker_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

struct Checker {
    int failed = 0;

    void run(int number, const std::string& name, const std::function<bool(std::string&)>& body) {
        std::string detail;
        bool ok = false;
        auto start = std::chrono::steady_clock::now();
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream line;
        line << (ok ? "[PASS] " : "[FAIL] ") << number << ". " << name;
        if (!detail.empty()) line << " -- " << detail;
        line.setf(std::ios::fixed);
        line.precision(2);
        line << " (" << seconds << "s)";
        std::cout << line.str() << std::endl;
        if (!ok) ++failed;
    }
};

std::string ctx_value(const MetricRecord& record, const std::string& key) {
    for (const auto& [k, v] : record.context) {
        if (k == key) return v;
    }
    return "";
}

std::map<std::string, std::string> parse_context(const std::string& context) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < context.size()) {
        std::size_t eq = context.find('=', pos);
        if (eq == std::string::npos) break;
        std::size_t end = context.find(';', pos);
        if (end == std::string::npos) end = context.size();
        out[context.substr(pos, eq - pos)] = context.substr(eq + 1, end - eq - 1);
        pos = end + 1;
    }
    return out;
}

// oracle for criterion 5: exhaustive contiguous partitions of the sorted input
double block_sse(const std::vector<double>& sorted, std::size_t a, std::size_t b) {
    double mean = 0.0;
    for (std::size_t i = a; i < b; ++i) mean += sorted[i];
    mean /= static_cast<double>(b - a);
    double sse = 0.0;
    for (std::size_t i = a; i < b; ++i) sse += (sorted[i] - mean) * (sorted[i] - mean);
    return sse;
}

double min_sse_rec(const std::vector<double>& sorted, std::size_t start, int blocks) {
    if (blocks == 1) return block_sse(sorted, start, sorted.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t end = start + 1;
         end + static_cast<std::size_t>(blocks) - 1 <= sorted.size(); ++end) {
        best = std::min(best, block_sse(sorted, start, end) + min_sse_rec(sorted, end, blocks - 1));
    }
    return best;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i + 1);
        return r;
    };
    std::vector<double> ra = ranks(a), rb = ranks(b);
    return pearson(ra, rb).value;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int run_command(const std::string& command) {
    int status = std::system(command.c_str());
    return status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : -1);
}

const SyntheticSpec kDeskSpec{SyntheticProfile::daily_load, 200, 10, 48, 2, 12};

}  // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";
    Checker checker;
    int threads = worker_threads();

    checker.run(1, "singleton group error equals the local error term, bit-exact",
                [&](std::string& detail) {
                    Rng rng(101);
                    for (int i = 0; i < 1000; ++i) {
                        double r = rng.uniform(-100, 100);
                        double s = rng.uniform(-100, 100);
                        if (i % 25 == 0) r = 0.0;
                        if (i % 40 == 0) s = 0.0;
                        std::vector<double> singleton{s};
                        double via_group =
                            local_group_error(r, aggregate(singleton, AggregationKind::mean)).value;
                        double direct = local_error_term(r, s).value;
                        if (via_group != direct) {
                            detail = "mismatch at r=" + format_double(r) + " s=" + format_double(s);
                            return false;
                        }
                    }
                    return true;
                });

    checker.run(2, "grand-mean identity: equal groups leave the global error unchanged",
                [&](std::string& detail) {
                    Rng rng(202);
                    for (int trial = 0; trial < 200; ++trial) {
                        int size = rng.uniform_int(1, 8);
                        int m = rng.uniform_int(1, 64 / size);
                        int n = size * m;
                        std::vector<double> raw, summ;
                        for (int i = 0; i < n; ++i) {
                            raw.push_back(rng.uniform(1, 10));
                            summ.push_back(rng.uniform(1, 10));
                        }
                        std::vector<int> order(static_cast<std::size_t>(n));
                        std::iota(order.begin(), order.end(), 0);
                        rng.shuffle(order);
                        std::vector<double> group_means;
                        for (int g = 0; g < m; ++g) {
                            double sum = 0.0;
                            for (int j = 0; j < size; ++j) {
                                sum += summ[static_cast<std::size_t>(order[static_cast<std::size_t>(
                                    g * size + j)])];
                            }
                            group_means.push_back(sum / size);
                        }
                        double composed = aggregate(group_means, AggregationKind::mean);
                        double mean_raw = aggregate(raw, AggregationKind::mean);
                        double mean_summ = aggregate(summ, AggregationKind::mean);
                        double e_direct = local_error_term(mean_raw, mean_summ).value;
                        double e_composed = local_error_term(mean_raw, composed).value;
                        double scale = std::max({std::abs(e_direct), std::abs(e_composed), 1e-30});
                        if (std::abs(e_direct - e_composed) > 1e-12 * scale) {
                            detail = "relative gap " +
                                     format_double(std::abs(e_direct - e_composed) / scale);
                            return false;
                        }
                    }
                    return true;
                });

    checker.run(3, "sum aggregation composes associatively over any partition",
                [&](std::string& detail) {
                    Rng rng(303);
                    for (int trial = 0; trial < 200; ++trial) {
                        int n = rng.uniform_int(1, 100);
                        std::vector<double> values;
                        for (int i = 0; i < n; ++i) values.push_back(rng.uniform(-50, 50));
                        double direct = aggregate(values, AggregationKind::sum);
                        std::vector<double> group_sums;
                        std::size_t pos = 0;
                        while (pos < values.size()) {
                            std::size_t size = 1 + rng.below(values.size() - pos);
                            double sum = 0.0;
                            for (std::size_t j = pos; j < pos + size; ++j) sum += values[j];
                            group_sums.push_back(sum);
                            pos += size;
                        }
                        double composed = aggregate(group_sums, AggregationKind::sum);
                        if (std::abs(composed - direct) >
                            1e-9 * std::max(1.0, std::abs(direct))) {
                            detail = "gap " + format_double(std::abs(composed - direct));
                            return false;
                        }
                    }
                    return true;
                });

    checker.run(4, "unequal groups shift the mean: (10,10,10 | 20) composes to 15, direct 12.5",
                [&](std::string& detail) {
                    GroupPartition part;
                    part.groups = {{"s1", "s2", "s3"}, {"s4"}};
                    std::map<SupplierId, double> values{
                        {"s1", 10}, {"s2", 10}, {"s3", 10}, {"s4", 20}};
                    GroupAggregate grouped = group_aggregate(part, values, AggregationKind::mean);
                    std::vector<double> flat{10, 10, 10, 20};
                    double direct = aggregate(flat, AggregationKind::mean);
                    if (grouped.composed != 15.0 || direct != 12.5) {
                        detail = "composed=" + format_double(grouped.composed) +
                                 " direct=" + format_double(direct);
                        return false;
                    }
                    return true;
                });

    checker.run(5, "exact 1D k-means matches the brute-force optimum", [&](std::string& detail) {
        Rng rng(505);
        for (int trial = 0; trial < 10000; ++trial) {
            int n = rng.uniform_int(1, 8);
            std::vector<double> values;
            for (int i = 0; i < n; ++i) values.push_back(rng.uniform_int(0, 9));
            int k = rng.uniform_int(1, std::min(3, n));
            std::vector<double> sorted(values);
            std::sort(sorted.begin(), sorted.end());
            double oracle = min_sse_rec(sorted, 0, k);
            SummarizedSeries out = summarize({"s", 0, values}, k);
            double achieved = 0.0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                achieved += (values[i] - out.values[i]) * (values[i] - out.values[i]);
            }
            if (std::abs(achieved - oracle) > 1e-9) {
                detail = "sse " + format_double(achieved) + " vs oracle " + format_double(oracle);
                return false;
            }
        }
        return true;
    });

    checker.run(6, "metric bounds, symmetry, affine invariance, MAPE flagging",
                [&](std::string& detail) {
                    Rng rng(606);
                    for (int trial = 0; trial < 10000; ++trial) {
                        double r = rng.uniform(-100, 100);
                        double s = rng.uniform(-100, 100);
                        ErrorValue term = local_error_term(r, s);
                        if (term.value < 0.0 || term.value > 1.0 ||
                            term.value != local_error_term(s, r).value) {
                            detail = "symmetric term out of contract";
                            return false;
                        }
                        if (mape_local_error_term(0.0, s == 0.0 ? 1.0 : s).defined) {
                            detail = "MAPE must flag zero denominators";
                            return false;
                        }
                    }
                    for (int trial = 0; trial < 2000; ++trial) {
                        int n = rng.uniform_int(2, 48);
                        std::vector<double> a, b;
                        for (int i = 0; i < n; ++i) {
                            a.push_back(rng.uniform(-10, 10));
                            b.push_back(rng.uniform(-10, 10));
                        }
                        ErrorValue c = privacy_correlation(a, b);
                        if (!c.defined) continue;
                        if (c.value < 0.0 || c.value > 2.0) {
                            detail = "C out of [0,2]: " + format_double(c.value);
                            return false;
                        }
                        double scale = rng.uniform(0.1, 5.0);
                        double shift = rng.uniform(-30, 30);
                        std::vector<double> affine(b.size());
                        for (std::size_t i = 0; i < b.size(); ++i) {
                            affine[i] = scale * b[i] + shift;
                        }
                        ErrorValue c2 = privacy_correlation(a, affine);
                        if (!c2.defined || std::abs(c2.value - c.value) > 1e-9) {
                            detail = "affine invariance violated";
                            return false;
                        }
                    }
                    return true;
                });

    checker.run(7, "privacy rises with group size while the global error stays put",
                [&](std::string& detail) {
                    ExperimentConfig cfg;
                    cfg.kind = ExperimentKind::macro_sweep;
                    cfg.master_seed = 20240807;
                    cfg.replicates = 30;
                    cfg.group_sizes = {1, 2, 5, 10, 20};
                    cfg.distribution = SizeKind::fixed;
                    cfg.fixed_k = 10;
                    cfg.synthetic = kDeskSpec;
                    Dataset data = load_experiment_data(cfg);
                    RunResult run = run_experiment(cfg, data, threads);

                    std::map<std::pair<std::uint64_t, int>, std::pair<double, long>> lge;
                    std::map<std::string, std::map<int, double>> ge;  // (seed|e|t) -> N -> value
                    for (const MetricRecord& r : run.records) {
                        int N = std::stoi(ctx_value(r, "N"));
                        if (r.metric == "local_group_error") {
                            auto& acc = lge[{r.seed, N}];
                            acc.first += r.value;
                            acc.second += 1;
                        } else if (r.metric == "global_error") {
                            ge[std::to_string(r.seed) + "|" + std::to_string(r.epoch) + "|" +
                               std::to_string(r.t)][N] = r.value;
                        }
                    }
                    int monotone_seeds = 0;
                    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
                        double previous = -1.0;
                        bool increasing = true;
                        for (int N : cfg.group_sizes) {
                            auto& acc = lge.at({seed, N});
                            double mean = acc.first / static_cast<double>(acc.second);
                            if (mean <= previous) increasing = false;
                            previous = mean;
                        }
                        monotone_seeds += increasing ? 1 : 0;
                    }
                    double max_gap = 0.0;
                    for (const auto& [key, by_size] : ge) {
                        double baseline = by_size.at(1);
                        for (const auto& [N, value] : by_size) {
                            max_gap = std::max(max_gap, std::abs(value - baseline));
                        }
                    }
                    detail = "monotone in " + std::to_string(monotone_seeds) +
                             "/30 seeds, max global-error gap " + format_double(max_gap);
                    return monotone_seeds >= 28 && max_gap <= 1e-12;
                });

    checker.run(8, "summarization proximity beats random grouping; accuracy is unaffected",
                [&](std::string& detail) {
                    ExperimentConfig cfg;
                    cfg.kind = ExperimentKind::strategy_sweep;
                    cfg.master_seed = 20240808;
                    cfg.replicates = 30;
                    cfg.num_groups = {20, 60, 100};
                    cfg.std_targets = {2.0};
                    // the strategy contrast needs real group sizes: m=100
                    // over 4000 suppliers gives groups of 20
                    cfg.synthetic = {SyntheticProfile::daily_load, 4000, 10, 48, 2, 12};
                    Dataset data = load_experiment_data(cfg);
                    RunResult run = run_experiment(cfg, data, threads);

                    // per (seed, strategy) mean local group error at the largest m
                    std::map<std::pair<std::uint64_t, std::string>, std::pair<double, long>> lge;
                    for (const MetricRecord& r : run.records) {
                        if (r.metric != "local_group_error") continue;
                        if (ctx_value(r, "m") != "100") continue;
                        auto& acc = lge[{r.seed, ctx_value(r, "strategy")}];
                        acc.first += r.value;
                        acc.second += 1;
                    }
                    int wins = 0;
                    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
                        auto& sp = lge.at({seed, "summarization_proximity"});
                        auto& rnd = lge.at({seed, "random"});
                        double mean_sp = sp.first / static_cast<double>(sp.second);
                        double mean_rnd = rnd.first / static_cast<double>(rnd.second);
                        wins += mean_sp >= mean_rnd ? 1 : 0;
                    }

                    // global error bands overlap across strategies for every m
                    std::map<std::string, std::map<std::string, std::pair<double, double>>> bands;
                    for (const SummaryRow& row : run.summary) {
                        if (row.metric != "global_error") continue;
                        auto ctx = parse_context(row.context);
                        bands[ctx.at("m")][ctx.at("strategy")] = {row.mean, row.stddev};
                    }
                    bool overlapping = true;
                    for (const auto& [m, by_strategy] : bands) {
                        for (const auto& [sa, a] : by_strategy) {
                            for (const auto& [sb, b] : by_strategy) {
                                if (std::abs(a.first - b.first) > a.second + b.second) {
                                    overlapping = false;
                                }
                            }
                        }
                    }
                    detail = "proximity >= random in " + std::to_string(wins) +
                             "/30 seeds at m=100, bands " +
                             (overlapping ? "overlap" : "separate");
                    return wins >= 24 && overlapping;
                });

    checker.run(9, "MAPE and symmetric local errors agree in rank across levels",
                [&](std::string& detail) {
                    SyntheticSpec spec{SyntheticProfile::daily_load, 60, 5, 48, 2, 12};
                    Dataset data = generate_synthetic(spec, 909);
                    std::vector<double> sym, mape;
                    for (int k = 1; k <= 10; ++k) {
                        double sym_sum = 0.0, mape_sum = 0.0;
                        long count = 0;
                        for (const SupplierSeries& series : data) {
                            SummarizedSeries summ = summarize(series, k);
                            for (std::size_t t = 0; t < series.values.size(); ++t) {
                                sym_sum +=
                                    local_error_term(series.values[t], summ.values[t]).value;
                                ErrorValue m =
                                    mape_local_error_term(series.values[t], summ.values[t]);
                                if (!m.defined) {
                                    detail = "unexpected undefined MAPE on positive data";
                                    return false;
                                }
                                mape_sum += m.value;
                                ++count;
                            }
                        }
                        sym.push_back(sym_sum / static_cast<double>(count));
                        mape.push_back(mape_sum / static_cast<double>(count));
                    }
                    double rho = spearman(sym, mape);
                    detail = "rank correlation " + format_double(rho);
                    return rho >= 0.9;
                });

    checker.run(10, "sweep output is byte-identical across reruns and thread counts",
                [&](std::string& detail) {
                    if (cli.empty()) {
                        detail = "CLI path missing (argv[1])";
                        return false;
                    }
                    fs::path tmp =
                        fs::temp_directory_path() / ("pga_accept_" + std::to_string(::getpid()));
                    fs::remove_all(tmp);
                    fs::create_directories(tmp);
                    std::ofstream config(tmp / "cfg.txt");
                    config << "experiment = macro_sweep\n"
                           << "master_seed = 11\n"
                           << "replicates = 3\n"
                           << "group_sizes = 1, 4\n"
                           << "k = 5\n"
                           << "suppliers = 40\n"
                           << "epochs = 2\n"
                           << "series_length = 24\n";
                    config.close();
                    std::vector<std::pair<std::string, int>> runs = {
                        {"r1", 1}, {"r2", 1}, {"r3", 8}, {"r4", 8}};
                    for (const auto& [name, thread_count] : runs) {
                        int code = run_command(cli + " sweep --config " + (tmp / "cfg.txt").string() +
                                               " --out " + (tmp / name).string() + " --threads " +
                                               std::to_string(thread_count) + " > /dev/null");
                        if (code != 0) {
                            detail = "sweep exited with " + std::to_string(code);
                            fs::remove_all(tmp);
                            return false;
                        }
                    }
                    std::string reference = read_file((tmp / "r1" / "records.csv").string());
                    bool identical = !reference.empty();
                    for (const auto& [name, thread_count] : runs) {
                        if (read_file((tmp / name / "records.csv").string()) != reference) {
                            identical = false;
                        }
                    }
                    fs::remove_all(tmp);
                    detail = identical ? "4 runs identical" : "records.csv differ";
                    return identical;
                });

    checker.run(11, "loader drops low-availability suppliers, interpolates, round-trips",
                [&](std::string& detail) {
                    fs::path tmp =
                        fs::temp_directory_path() / ("pga_accept11_" + std::to_string(::getpid()));
                    fs::remove_all(tmp);
                    fs::create_directories(tmp);
                    // 2 epochs x 10 slots; "low" misses 2 cells (90%), "keep"
                    // misses one interior cell (95%), planted between 10 and 20
                    std::ofstream csv(tmp / "d.csv");
                    csv << "supplier_id,epoch,t,value\n";
                    for (int e = 0; e < 2; ++e) {
                        for (int t = 1; t <= 10; ++t) {
                            if (!(e == 1 && (t == 4 || t == 8))) {
                                csv << "low," << e << "," << t << ",3\n";
                            }
                            if (!(e == 0 && t == 5)) {
                                double v = t == 4 ? 10.0 : t == 6 ? 20.0 : 5.0;
                                csv << "keep," << e << "," << t << "," << format_double(v) << "\n";
                            }
                        }
                    }
                    csv.close();

                    LoadResult loaded = load_ecbt_like((tmp / "d.csv").string(), 0.95);
                    bool dropped = loaded.report.suppliers_dropped == 1 &&
                                   loaded.report.dropped_suppliers.size() == 1 &&
                                   loaded.report.dropped_suppliers[0] == "low";
                    bool interpolated = false;
                    for (const SupplierSeries& s : loaded.series) {
                        if (s.supplier == "keep" && s.epoch == 0) {
                            interpolated = s.values.size() == 10 && s.values[4] == 15.0;
                        }
                    }
                    write_dataset((tmp / "round.csv").string(), loaded.series,
                                  DatasetFormat::ecbt_like);
                    LoadResult reloaded = load_ecbt_like((tmp / "round.csv").string(), 0.95);
                    bool round_trip = reloaded.series.size() == loaded.series.size();
                    if (round_trip) {
                        for (std::size_t i = 0; i < loaded.series.size(); ++i) {
                            if (loaded.series[i].supplier != reloaded.series[i].supplier ||
                                loaded.series[i].epoch != reloaded.series[i].epoch ||
                                loaded.series[i].values != reloaded.series[i].values) {
                                round_trip = false;
                            }
                        }
                    }
                    fs::remove_all(tmp);
                    detail = std::string(dropped ? "dropped" : "NOT dropped") + ", " +
                             (interpolated ? "midpoint 15" : "bad interpolation") + ", " +
                             (round_trip ? "round-trip ok" : "round-trip broken");
                    return dropped && interpolated && round_trip;
                });

    if (checker.failed == 0) {
        std::cout << "acceptance: all criteria passed" << std::endl;
        return 0;
    }
    std::cout << "acceptance: " << checker.failed << " criterion(s) failed" << std::endl;
    return 1;
}
