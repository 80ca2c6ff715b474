#pragma once

#include <cstdint>
#include <string>

#include "pga/grouping.hpp"
#include "pga/ingest.hpp"
#include "pga/types.hpp"

namespace pga {

enum class ExperimentKind { macro_sweep, pair_grid, incentive_grid, strategy_sweep };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

// One experiment family with its parameter grid. Defaults follow the
// simulator's desk-scale setup; every field maps to one config key (see
// README for the config reference).
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::macro_sweep;
    std::string name;  // record tag; defaults to the kind name
    AggregationKind aggregation = AggregationKind::mean;
    std::uint64_t master_seed = 1;
    int replicates = 1;

    // data source: a file in one of the ingest formats, or synthetic
    std::string data_path;  // empty -> synthetic
    DatasetFormat data_format = DatasetFormat::synthetic;
    double availability_threshold = 0.95;
    SyntheticSpec synthetic;

    // macro_sweep: group-size grid (1 = singleton baseline), size
    // distribution, fixed summarization level
    std::vector<int> group_sizes{1, 2, 5, 10, 20};
    SizeKind distribution = SizeKind::fixed;
    double powerlaw_gamma = 2.0;
    int fixed_k = 10;

    // pair_grid: level grids for the two roles, group size knob
    std::vector<int> k1_values{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> k2_values{1, 2, 3, 4, 5, 6, 7, 8, 9};
    int pair_group_size = 2;

    // incentive_grid: group sizes (1 = baseline column) x uniform levels
    std::vector<int> incentive_group_sizes{1, 2, 5, 10, 20};
    std::vector<int> k_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    // strategy_sweep: number-of-groups grid x dispersion targets x strategies
    std::vector<int> num_groups{20, 60, 100};
    std::vector<double> std_targets{0.0, 1.0, 2.0};
    std::vector<GroupingStrategy> strategies{GroupingStrategy::random,
                                             GroupingStrategy::data_proximity,
                                             GroupingStrategy::summarization_proximity};
    double comparison_std = 2.0;
    int k_start = 10;  // every supplier's initial level before dispersal
    int disperse_k_min = 1;
    int disperse_k_max = 10;
    std::uint64_t disperse_max_steps = 1000000;
};

// Parse the flat key=value config format, or JSON when the text starts with
// '{'. Both renderings share one key set.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

// Group-size frequency observation (how often each size occurred across the
// sampled partitions of one grid cell).
struct SizeFrequency {
    std::string context;
    int size = 0;
    long count = 0;
};

// Figure-level aggregate of one metric in one grid cell: the mean over
// replicates of the per-replicate means, and the sample deviation across
// replicates.
struct SummaryRow {
    std::string metric;
    std::string context;
    double mean = 0.0;
    double stddev = 0.0;
    int seeds = 0;
};

struct RunResult {
    std::vector<MetricRecord> records;
    std::vector<SizeFrequency> sizes;
    std::vector<SummaryRow> summary;
};

// The dataset an experiment runs on: loaded from the configured path, or
// generated with a sub-seed of the master seed so the same config always
// sees the same data. A preprocessing report is filled in when loading
// applies one (file data only).
Dataset load_experiment_data(const ExperimentConfig& config,
                             PreprocessReport* report = nullptr);

// Run every cell of the experiment grid. Cells execute independently (up to
// `threads` in parallel) and the record stream is emitted in cell order, so
// output is byte-identical for any thread count.
RunResult run_experiment(const ExperimentConfig& config, const Dataset& data, int threads = 1);

// Recompute the figure-level summary of a record stream (also done inside
// run_experiment).
std::vector<SummaryRow> summarize_records(const std::vector<MetricRecord>& records);

// join context pairs as "key=value;key=value"
std::string context_string(const std::vector<std::pair<std::string, std::string>>& context);

// Write records.csv, summary.csv, sizes.csv and manifest.json under out_dir.
// The manifest is written last and marks the run complete.
void write_outputs(const std::string& out_dir, const ExperimentConfig& config,
                   const RunResult& run, const std::string& config_text);

}  // namespace pga
