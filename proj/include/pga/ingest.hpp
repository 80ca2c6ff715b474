#pragma once

#include <cstdint>
#include <string>

#include "pga/types.hpp"

namespace pga {

enum class DatasetFormat { ecbt_like, nrel_like, synthetic };

std::string to_string(DatasetFormat format);
DatasetFormat parse_dataset_format(const std::string& name);

struct DatasetManifest {
    DatasetFormat format = DatasetFormat::synthetic;
    int supplier_count = 0;
    int epoch_count = 0;
    int fixed_epoch_length = 0;  // T when every epoch has the same length, else 0
};

struct PreprocessReport {
    int suppliers_total = 0;
    int suppliers_retained = 0;
    int suppliers_dropped = 0;
    long cells_expected = 0;      // supplier x epoch x t grid size (ecbt_like)
    long cells_missing = 0;       // absent rows plus non-numeric value cells
    long cells_interpolated = 0;
    int series_dropped_empty = 0;  // retained supplier, epoch with no data at all
    std::vector<SupplierId> dropped_suppliers;

    // structured key-value rendering for reports and the CLI
    std::string to_text() const;
};

struct LoadResult {
    Dataset series;
    DatasetManifest manifest;
    PreprocessReport report;
};

// Fixed-epoch-length load profiles, long format with header
// supplier_id,epoch,t,value (t is 1-based). Non-numeric value cells count as
// missing. Suppliers whose availability over the full epoch x t grid falls
// below the threshold are dropped; remaining gaps are linearly interpolated
// within each epoch (edge gaps take the nearest value).
LoadResult load_ecbt_like(const std::string& path, double availability_threshold = 0.95,
                          bool interpolate = true);

// Trip-style datasets, header supplier_id,epoch,trip,value (trip is 1-based);
// one series per (supplier, epoch) with as many values as trips. Epochs with
// no trips simply yield no series.
LoadResult load_nrel_like(const std::string& path);

// Inverse of the loaders; load_*(write_dataset(d)) == d.
void write_dataset(const std::string& path, const Dataset& series, DatasetFormat format);

struct FilterResult {
    Dataset eligible;
    int retained = 0;
    int dropped = 0;
};

// Keep only series with at least k points (suppliers with fewer points than
// clusters cannot be summarized at level 1/k).
FilterResult filter_by_level(const Dataset& series, int k);

// Suppliers whose every epoch has at least k points, per k in [k_lo, k_hi];
// the declining-population curve for trip-style data.
std::vector<std::pair<int, int>> eligible_counts(const Dataset& series, int k_lo, int k_hi);

enum class SyntheticProfile { daily_load, trip_speeds };

std::string to_string(SyntheticProfile profile);
SyntheticProfile parse_profile(const std::string& name);

struct SyntheticSpec {
    SyntheticProfile profile = SyntheticProfile::daily_load;
    int suppliers = 100;
    int epochs = 30;
    int series_length = 48;  // daily_load: measurements per epoch
    int trips_min = 2;       // trip_speeds: per-epoch trip count law, uniform
    int trips_max = 12;
};

// Deterministic synthetic data. daily_load draws a per-supplier base level
// and diurnal double-peak shape with multiplicative noise (strictly
// positive); trip_speeds draws per-epoch trip counts and positive speeds
// around a per-supplier cruising speed.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace pga
