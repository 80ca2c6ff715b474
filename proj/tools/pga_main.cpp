#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "pga/harness.hpp"
#include "pga/io.hpp"
#include "pga/metrics.hpp"
#include "pga/rng.hpp"
#include "pga/summarize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Datasets are self-describing: the third header column distinguishes the
// fixed-length (t) and trip (trip) layouts.
pga::LoadResult load_auto(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pga::DatasetError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    in.close();
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::string> columns = pga::csv_split(header);
    if (columns.size() == 4 && columns[2] == "trip") return pga::load_nrel_like(path);
    return pga::load_ecbt_like(path);
}

struct TripLaw {
    int lo = 2, hi = 12;
};

TripLaw parse_trip_law(const std::string& text) {
    std::size_t colon = text.find(':');
    TripLaw law;
    if (colon == std::string::npos || !pga::parse_int(text.substr(0, colon), law.lo) ||
        !pga::parse_int(text.substr(colon + 1), law.hi) || law.lo < 0 || law.hi < law.lo) {
        throw pga::InvalidParameter("bad trip law '" + text + "', expected LO:HI");
    }
    return law;
}

int cmd_gen_data(const std::string& profile_name, int suppliers, int epochs, int series_length,
                 const std::string& trip_law, std::uint64_t seed, const std::string& out_path) {
    pga::SyntheticSpec spec;
    spec.profile = pga::parse_profile(profile_name);
    spec.suppliers = suppliers;
    spec.epochs = epochs;
    spec.series_length = series_length;
    TripLaw law = parse_trip_law(trip_law);
    spec.trips_min = law.lo;
    spec.trips_max = law.hi;
    pga::Dataset data = pga::generate_synthetic(spec, seed);
    pga::write_dataset(out_path, data,
                       spec.profile == pga::SyntheticProfile::trip_speeds
                           ? pga::DatasetFormat::nrel_like
                           : pga::DatasetFormat::ecbt_like);
    std::cout << "wrote " << data.size() << " series to " << out_path << "\n";
    return kExitOk;
}

int cmd_summarize(const std::string& in_path, int k, std::string supplier, int epoch,
                  bool epoch_set) {
    pga::LoadResult loaded = load_auto(in_path);
    if (loaded.series.empty()) throw pga::DatasetError("dataset is empty");
    if (supplier.empty()) supplier = loaded.series.front().supplier;
    const pga::SupplierSeries* chosen = nullptr;
    for (const pga::SupplierSeries& s : loaded.series) {
        if (s.supplier != supplier) continue;
        if (!epoch_set || s.epoch == epoch) {
            chosen = &s;
            break;
        }
    }
    if (chosen == nullptr) {
        throw pga::DatasetError("no series for supplier " + supplier +
                                (epoch_set ? " at epoch " + std::to_string(epoch) : ""));
    }
    pga::SummarizedSeries summ = pga::summarize(*chosen, k);
    std::cout << "t,raw,summarized\n";
    for (std::size_t t = 0; t < chosen->values.size(); ++t) {
        std::cout << (t + 1) << ',' << pga::format_double(chosen->values[t]) << ','
                  << pga::format_double(summ.values[t]) << '\n';
    }
    return kExitOk;
}

int cmd_eligible(const std::string& in_path, const std::string& k_range) {
    std::size_t colon = k_range.find(':');
    int k_lo = 1, k_hi = 1;
    if (colon == std::string::npos || !pga::parse_int(k_range.substr(0, colon), k_lo) ||
        !pga::parse_int(k_range.substr(colon + 1), k_hi)) {
        throw pga::InvalidParameter("bad k range '" + k_range + "', expected LO:HI");
    }
    pga::LoadResult loaded = load_auto(in_path);
    std::cout << "k,eligible_suppliers\n";
    for (const auto& [k, count] : pga::eligible_counts(loaded.series, k_lo, k_hi)) {
        std::cout << k << ',' << count << '\n';
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads) {
    std::ifstream in(config_path);
    if (!in) throw pga::DatasetError("cannot open config " + config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string config_text = buffer.str();
    pga::ExperimentConfig config = pga::parse_config_text(config_text, config_path);

    if (const char* env_seed = std::getenv("PGA_MASTER_SEED")) {
        try {
            config.master_seed = std::stoull(env_seed);
        } catch (const std::exception&) {
            throw pga::InvalidParameter("PGA_MASTER_SEED is not an integer");
        }
    }

    pga::PreprocessReport report;
    pga::Dataset data = pga::load_experiment_data(config, &report);
    if (!config.data_path.empty()) std::cerr << report.to_text();
    pga::RunResult run = pga::run_experiment(config, data, threads);
    pga::write_outputs(out_dir, config, run, config_text);
    std::cout << "wrote " << run.records.size() << " records to " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IoT group-aggregation privacy simulator"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset file");
    std::string profile = "daily_load";
    int suppliers = 100, epochs = 30, series_length = 48;
    std::string trip_law = "2:12";
    std::uint64_t seed = 1;
    std::string out_path;
    gen->add_option("--profile", profile, "daily_load or trip_speeds");
    gen->add_option("--suppliers", suppliers, "number of suppliers (>= 2)");
    gen->add_option("--epochs", epochs, "number of epochs");
    gen->add_option("--series-length", series_length, "measurements per epoch (daily_load)");
    gen->add_option("--trip-law", trip_law, "per-epoch trip count range LO:HI (trip_speeds)");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out_path, "output dataset path")->required();

    auto* summ = app.add_subcommand("summarize", "print one series next to its summarized form");
    std::string in_path, supplier;
    int k = 1, epoch = 0;
    summ->add_option("--in", in_path, "dataset file")->required();
    summ->add_option("--k", k, "number of centroids")->required();
    summ->add_option("--supplier", supplier, "supplier id (default: first in file)");
    auto* epoch_opt = summ->add_option("--epoch", epoch, "epoch key (default: first for supplier)");

    auto* sweep = app.add_subcommand("sweep", "run a configured experiment sweep");
    std::string config_path, sweep_out;
    int threads = 1;
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--out", sweep_out, "output directory")->required();
    sweep->add_option("--threads", threads, "parallel cells (output is order-independent)");

    auto* eligible = app.add_subcommand("eligible", "eligible-supplier counts per level");
    std::string eligible_in, k_range = "1:10";
    eligible->add_option("--in", eligible_in, "dataset file")->required();
    eligible->add_option("--k-range", k_range, "level range LO:HI");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_data(profile, suppliers, epochs, series_length, trip_law, seed,
                                out_path);
        }
        if (summ->parsed()) {
            return cmd_summarize(in_path, k, supplier, epoch, epoch_opt->count() > 0);
        }
        if (sweep->parsed()) return cmd_sweep(config_path, sweep_out, threads);
        if (eligible->parsed()) return cmd_eligible(eligible_in, k_range);
        std::cerr << "no command\n";
        return kExitUsage;
    } catch (const pga::InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pga::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const pga::DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const pga::InsufficientData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const pga::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
