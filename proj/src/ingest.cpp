#include "pga/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "pga/io.hpp"
#include "pga/rng.hpp"

namespace pga {

std::string to_string(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::ecbt_like: return "ecbt_like";
        case DatasetFormat::nrel_like: return "nrel_like";
        case DatasetFormat::synthetic: return "synthetic";
    }
    return "?";
}

DatasetFormat parse_dataset_format(const std::string& name) {
    if (name == "ecbt_like") return DatasetFormat::ecbt_like;
    if (name == "nrel_like") return DatasetFormat::nrel_like;
    if (name == "synthetic") return DatasetFormat::synthetic;
    throw InvalidParameter("unknown dataset format: " + name);
}

std::string to_string(SyntheticProfile profile) {
    return profile == SyntheticProfile::daily_load ? "daily_load" : "trip_speeds";
}

SyntheticProfile parse_profile(const std::string& name) {
    if (name == "daily_load") return SyntheticProfile::daily_load;
    if (name == "trip_speeds") return SyntheticProfile::trip_speeds;
    throw InvalidParameter("unknown synthetic profile: " + name);
}

std::string PreprocessReport::to_text() const {
    std::ostringstream out;
    out << "suppliers_total: " << suppliers_total << "\n"
        << "suppliers_retained: " << suppliers_retained << "\n"
        << "suppliers_dropped: " << suppliers_dropped << "\n"
        << "cells_expected: " << cells_expected << "\n"
        << "cells_missing: " << cells_missing << "\n"
        << "cells_interpolated: " << cells_interpolated << "\n"
        << "series_dropped_empty: " << series_dropped_empty << "\n";
    out << "dropped_suppliers:";
    for (const SupplierId& id : dropped_suppliers) out << " " << id;
    out << "\n";
    return out.str();
}

namespace {

struct Row {
    SupplierId supplier;
    int epoch = 0;
    int index = 0;  // t or trip, 1-based in the file
    std::optional<double> value;
    std::size_t line = 0;
};

std::vector<Row> read_rows(const std::string& path, const char* index_column,
                           bool missing_allowed) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open " + path);
    std::string line;
    std::size_t line_number = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = csv_split(line);
    if (header.size() != 4 || header[0] != "supplier_id" || header[1] != "epoch" ||
        header[2] != index_column || header[3] != "value") {
        throw ParseError(std::string("expected header supplier_id,epoch,") + index_column +
                             ",value",
                         1);
    }

    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = csv_split(line);
        if (fields.size() != 4) throw ParseError("expected 4 columns", line_number);
        Row row;
        row.supplier = fields[0];
        row.line = line_number;
        if (row.supplier.empty()) throw ParseError("empty supplier_id", line_number);
        if (!parse_int(fields[1], row.epoch) || row.epoch < 0) {
            throw ParseError("bad epoch", line_number);
        }
        if (!parse_int(fields[2], row.index) || row.index < 1) {
            throw ParseError(std::string("bad ") + index_column, line_number);
        }
        double v;
        if (parse_double(fields[3], v)) {
            if (!std::isfinite(v)) throw ParseError("non-finite value", line_number);
            row.value = v;
        } else if (!missing_allowed) {
            throw ParseError("bad value", line_number);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

DatasetManifest make_manifest(const Dataset& series, DatasetFormat format) {
    DatasetManifest manifest;
    manifest.format = format;
    std::set<SupplierId> suppliers;
    std::set<int> epochs;
    std::size_t fixed_len = series.empty() ? 0 : series.front().values.size();
    for (const SupplierSeries& s : series) {
        suppliers.insert(s.supplier);
        epochs.insert(s.epoch);
        if (s.values.size() != fixed_len) fixed_len = 0;
    }
    manifest.supplier_count = static_cast<int>(suppliers.size());
    manifest.epoch_count = static_cast<int>(epochs.size());
    manifest.fixed_epoch_length = static_cast<int>(fixed_len);
    return manifest;
}

// Fill gaps in one epoch: interior gaps linearly between the bracketing
// values, edge gaps with the nearest value.
long interpolate_epoch(std::vector<std::optional<double>>& cells) {
    long filled = 0;
    int n = static_cast<int>(cells.size());
    int first = -1, last = -1;
    for (int i = 0; i < n; ++i) {
        if (cells[static_cast<std::size_t>(i)].has_value()) {
            if (first < 0) first = i;
            last = i;
        }
    }
    for (int i = 0; i < first; ++i) {
        cells[static_cast<std::size_t>(i)] = *cells[static_cast<std::size_t>(first)];
        ++filled;
    }
    for (int i = last + 1; i < n; ++i) {
        cells[static_cast<std::size_t>(i)] = *cells[static_cast<std::size_t>(last)];
        ++filled;
    }
    int i = first;
    while (i < last) {
        if (cells[static_cast<std::size_t>(i + 1)].has_value()) {
            ++i;
            continue;
        }
        int j = i + 1;
        while (!cells[static_cast<std::size_t>(j)].has_value()) ++j;
        double lo = *cells[static_cast<std::size_t>(i)];
        double hi = *cells[static_cast<std::size_t>(j)];
        for (int g = i + 1; g < j; ++g) {
            double frac = static_cast<double>(g - i) / static_cast<double>(j - i);
            cells[static_cast<std::size_t>(g)] = lo + (hi - lo) * frac;
            ++filled;
        }
        i = j;
    }
    return filled;
}

}  // namespace

LoadResult load_ecbt_like(const std::string& path, double availability_threshold,
                          bool interpolate) {
    std::vector<Row> rows = read_rows(path, "t", /*missing_allowed=*/true);

    int T = 0;
    std::set<int> epochs;
    for (const Row& row : rows) {
        T = std::max(T, row.index);
        epochs.insert(row.epoch);
    }

    // supplier -> epoch -> t -> value
    std::map<SupplierId, std::map<int, std::vector<std::optional<double>>>> grid;
    std::set<std::tuple<SupplierId, int, int>> seen;
    for (const Row& row : rows) {
        if (!seen.insert({row.supplier, row.epoch, row.index}).second) {
            throw ParseError("duplicate (supplier, epoch, t) cell", row.line);
        }
        auto& epoch_cells = grid[row.supplier][row.epoch];
        if (epoch_cells.empty()) epoch_cells.resize(static_cast<std::size_t>(T));
        epoch_cells[static_cast<std::size_t>(row.index - 1)] = row.value;
    }

    LoadResult result;
    result.report.suppliers_total = static_cast<int>(grid.size());
    long per_supplier_cells = static_cast<long>(epochs.size()) * T;

    for (auto& [supplier, supplier_epochs] : grid) {
        long present = 0;
        for (const auto& [epoch, cells] : supplier_epochs) {
            for (const auto& cell : cells) present += cell.has_value() ? 1 : 0;
        }
        result.report.cells_expected += per_supplier_cells;
        result.report.cells_missing += per_supplier_cells - present;
        double availability =
            per_supplier_cells > 0
                ? static_cast<double>(present) / static_cast<double>(per_supplier_cells)
                : 0.0;
        if (availability < availability_threshold) {
            result.report.suppliers_dropped += 1;
            result.report.dropped_suppliers.push_back(supplier);
            continue;
        }
        result.report.suppliers_retained += 1;
        for (auto& [epoch, cells] : supplier_epochs) {
            bool any = std::any_of(cells.begin(), cells.end(),
                                   [](const std::optional<double>& c) { return c.has_value(); });
            if (!any) {
                result.report.series_dropped_empty += 1;
                continue;
            }
            bool complete = std::all_of(cells.begin(), cells.end(),
                                        [](const std::optional<double>& c) { return c.has_value(); });
            if (!complete) {
                if (!interpolate) {
                    throw DatasetError("missing values for supplier " + supplier +
                                       " and interpolation is disabled");
                }
                result.report.cells_interpolated += interpolate_epoch(cells);
            }
            SupplierSeries series;
            series.supplier = supplier;
            series.epoch = epoch;
            series.values.reserve(cells.size());
            for (const auto& cell : cells) series.values.push_back(*cell);
            result.series.push_back(std::move(series));
        }
    }

    result.manifest = make_manifest(result.series, DatasetFormat::ecbt_like);
    return result;
}

LoadResult load_nrel_like(const std::string& path) {
    std::vector<Row> rows = read_rows(path, "trip", /*missing_allowed=*/false);

    std::map<std::pair<SupplierId, int>, std::map<int, double>> trips;
    for (const Row& row : rows) {
        auto& per_trip = trips[{row.supplier, row.epoch}];
        if (!per_trip.emplace(row.index, *row.value).second) {
            throw ParseError("duplicate (supplier, epoch, trip) row", row.line);
        }
    }

    LoadResult result;
    std::set<SupplierId> suppliers;
    for (auto& [key, per_trip] : trips) {
        SupplierSeries series;
        series.supplier = key.first;
        series.epoch = key.second;
        series.values.reserve(per_trip.size());
        for (auto& [trip, value] : per_trip) series.values.push_back(value);
        suppliers.insert(key.first);
        result.series.push_back(std::move(series));
    }
    result.report.suppliers_total = static_cast<int>(suppliers.size());
    result.report.suppliers_retained = result.report.suppliers_total;
    result.manifest = make_manifest(result.series, DatasetFormat::nrel_like);
    return result;
}

void write_dataset(const std::string& path, const Dataset& series, DatasetFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write " + path);
    out << "supplier_id,epoch,"
        << (format == DatasetFormat::nrel_like ? "trip" : "t") << ",value\n";
    for (const SupplierSeries& s : series) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            out << csv_escape(s.supplier) << ',' << s.epoch << ',' << (i + 1) << ','
                << format_double(s.values[i]) << '\n';
        }
    }
    if (!out) throw DatasetError("write failed: " + path);
}

FilterResult filter_by_level(const Dataset& series, int k) {
    if (k < 1) throw InvalidParameter("filter_by_level: k must be >= 1");
    FilterResult result;
    for (const SupplierSeries& s : series) {
        if (static_cast<int>(s.values.size()) >= k) {
            result.eligible.push_back(s);
            ++result.retained;
        } else {
            ++result.dropped;
        }
    }
    return result;
}

std::vector<std::pair<int, int>> eligible_counts(const Dataset& series, int k_lo, int k_hi) {
    if (k_lo < 1 || k_hi < k_lo) throw InvalidParameter("eligible_counts: bad k range");
    std::map<SupplierId, int> min_length;
    for (const SupplierSeries& s : series) {
        int len = static_cast<int>(s.values.size());
        auto [it, inserted] = min_length.emplace(s.supplier, len);
        if (!inserted) it->second = std::min(it->second, len);
    }
    std::vector<std::pair<int, int>> counts;
    for (int k = k_lo; k <= k_hi; ++k) {
        int eligible = 0;
        for (const auto& [supplier, len] : min_length) eligible += len >= k ? 1 : 0;
        counts.emplace_back(k, eligible);
    }
    return counts;
}

namespace {

std::string supplier_name(int index, int total) {
    int width = 1;
    for (int t = total - 1; t >= 10; t /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    return "s" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(width, digits.size()),
                             '0') +
           digits;
}

double bump(double t, double center, double width) {
    double d = (t - center) / width;
    return std::exp(-0.5 * d * d);
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.suppliers < 2) throw InvalidParameter("generate_synthetic: need at least 2 suppliers");
    if (spec.epochs < 1) throw InvalidParameter("generate_synthetic: need at least 1 epoch");
    Dataset data;

    if (spec.profile == SyntheticProfile::daily_load) {
        if (spec.series_length < 1) throw InvalidParameter("generate_synthetic: bad series length");
        double scale = static_cast<double>(spec.series_length);
        for (int i = 0; i < spec.suppliers; ++i) {
            Rng sup(derive_seed(seed, "daily_supplier", i));
            double base = 0.5 * std::exp(0.35 * sup.normal());  // kWh per interval, lognormal
            // Households differ in level and peak strength but share the
            // population's daily rhythm, so peak times only jitter a little.
            double morning_center = sup.uniform(0.32, 0.35) * scale;
            double evening_center = sup.uniform(0.77, 0.82) * scale;
            double morning_amp = sup.uniform(0.8, 1.4);
            double evening_amp = sup.uniform(1.8, 2.8);
            double morning_width = sup.uniform(0.05, 0.07) * scale;
            double evening_width = sup.uniform(0.07, 0.10) * scale;
            for (int e = 0; e < spec.epochs; ++e) {
                Rng noise(derive_seed(seed, "daily_values", i, e));
                SupplierSeries series;
                series.supplier = supplier_name(i, spec.suppliers);
                series.epoch = e;
                series.values.reserve(static_cast<std::size_t>(spec.series_length));
                for (int t = 0; t < spec.series_length; ++t) {
                    double shape = 0.35 + morning_amp * bump(t, morning_center, morning_width) +
                                   evening_amp * bump(t, evening_center, evening_width);
                    series.values.push_back(base * shape * std::exp(0.10 * noise.normal()));
                }
                data.push_back(std::move(series));
            }
        }
    } else {
        if (spec.trips_min < 0 || spec.trips_max < spec.trips_min) {
            throw InvalidParameter("generate_synthetic: bad trip count law");
        }
        for (int i = 0; i < spec.suppliers; ++i) {
            Rng sup(derive_seed(seed, "trip_supplier", i));
            double cruise = sup.uniform(25.0, 65.0);  // typical speed
            double spread = sup.uniform(0.08, 0.25);
            for (int e = 0; e < spec.epochs; ++e) {
                Rng noise(derive_seed(seed, "trip_values", i, e));
                int trips = spec.trips_min +
                            static_cast<int>(noise.below(
                                static_cast<std::uint64_t>(spec.trips_max - spec.trips_min) + 1));
                if (trips == 0) continue;  // no measurement that day
                SupplierSeries series;
                series.supplier = supplier_name(i, spec.suppliers);
                series.epoch = e;
                series.values.reserve(static_cast<std::size_t>(trips));
                for (int trip = 0; trip < trips; ++trip) {
                    series.values.push_back(cruise * std::exp(spread * noise.normal()));
                }
                data.push_back(std::move(series));
            }
        }
    }
    return data;
}

}  // namespace pga
