#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pga/harness.hpp"
#include "pga/io.hpp"
#include "pga/rng.hpp"

#include "json.hpp"

namespace pga {

namespace {

struct Entry {
    std::string value;
    std::size_t line = 1;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

int to_int(const Entry& entry, const std::string& key) {
    int v;
    if (!parse_int(entry.value, v)) throw ParseError("bad integer for " + key, entry.line);
    return v;
}

double to_double(const Entry& entry, const std::string& key) {
    double v;
    if (!parse_double(entry.value, v)) throw ParseError("bad number for " + key, entry.line);
    return v;
}

std::uint64_t to_u64(const Entry& entry, const std::string& key) {
    try {
        return std::stoull(entry.value);
    } catch (const std::exception&) {
        throw ParseError("bad integer for " + key, entry.line);
    }
}

std::vector<int> to_int_list(const Entry& entry, const std::string& key) {
    std::vector<int> out;
    for (const std::string& item : split_list(entry.value)) {
        int v;
        if (!parse_int(item, v)) throw ParseError("bad integer list for " + key, entry.line);
        out.push_back(v);
    }
    if (out.empty()) throw ParseError("empty list for " + key, entry.line);
    return out;
}

std::vector<double> to_double_list(const Entry& entry, const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(entry.value)) {
        double v;
        if (!parse_double(item, v)) throw ParseError("bad number list for " + key, entry.line);
        out.push_back(v);
    }
    if (out.empty()) throw ParseError("empty list for " + key, entry.line);
    return out;
}

std::map<std::string, Entry> flatten_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(std::string("JSON: ") + err.what(), 1);
    }
    if (!doc.is_object()) throw ParseError("JSON config must be an object", 1);
    auto scalar = [](const nlohmann::json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    std::map<std::string, Entry> entries;
    for (const auto& [key, value] : doc.items()) {
        if (value.is_array()) {
            std::string joined;
            for (const auto& item : value) {
                if (!joined.empty()) joined += ",";
                joined += scalar(item);
            }
            entries[key] = {joined, 1};
        } else {
            entries[key] = {scalar(value), 1};
        }
    }
    return entries;
}

std::map<std::string, Entry> flatten_flat(const std::string& text) {
    std::map<std::string, Entry> entries;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(ss, line)) {
        ++line_number;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_number);
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_number);
        if (entries.count(key)) throw ParseError("duplicate key " + key, line_number);
        entries[key] = {value, line_number};
    }
    return entries;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw ParseError(origin + ": empty config", 1);
    std::map<std::string, Entry> entries =
        text[first] == '{' ? flatten_json(text) : flatten_flat(text);

    auto it = entries.find("experiment");
    if (it == entries.end()) throw ParseError(origin + ": missing key 'experiment'", 1);

    ExperimentConfig cfg;
    cfg.kind = parse_experiment_kind(it->second.value);
    entries.erase(it);

    using Handler = std::function<void(const Entry&)>;
    std::map<std::string, Handler> handlers;
    auto add = [&](const char* key, Handler h) { handlers[key] = std::move(h); };

    add("name", [&](const Entry& e) { cfg.name = e.value; });
    add("aggregation", [&](const Entry& e) { cfg.aggregation = parse_aggregation_kind(e.value); });
    add("master_seed", [&](const Entry& e) { cfg.master_seed = to_u64(e, "master_seed"); });
    add("replicates", [&](const Entry& e) { cfg.replicates = to_int(e, "replicates"); });
    add("data", [&](const Entry& e) { cfg.data_path = e.value == "synthetic" ? "" : e.value; });
    add("data_format", [&](const Entry& e) { cfg.data_format = parse_dataset_format(e.value); });
    add("availability_threshold",
        [&](const Entry& e) { cfg.availability_threshold = to_double(e, "availability_threshold"); });
    add("profile", [&](const Entry& e) { cfg.synthetic.profile = parse_profile(e.value); });
    add("suppliers", [&](const Entry& e) { cfg.synthetic.suppliers = to_int(e, "suppliers"); });
    add("epochs", [&](const Entry& e) { cfg.synthetic.epochs = to_int(e, "epochs"); });
    add("series_length",
        [&](const Entry& e) { cfg.synthetic.series_length = to_int(e, "series_length"); });
    add("trips_min", [&](const Entry& e) { cfg.synthetic.trips_min = to_int(e, "trips_min"); });
    add("trips_max", [&](const Entry& e) { cfg.synthetic.trips_max = to_int(e, "trips_max"); });
    add("group_sizes", [&](const Entry& e) { cfg.group_sizes = to_int_list(e, "group_sizes"); });
    add("distribution", [&](const Entry& e) { cfg.distribution = parse_size_kind(e.value); });
    add("powerlaw_gamma",
        [&](const Entry& e) { cfg.powerlaw_gamma = to_double(e, "powerlaw_gamma"); });
    add("k", [&](const Entry& e) { cfg.fixed_k = to_int(e, "k"); });
    add("k1_values", [&](const Entry& e) { cfg.k1_values = to_int_list(e, "k1_values"); });
    add("k2_values", [&](const Entry& e) { cfg.k2_values = to_int_list(e, "k2_values"); });
    add("pair_group_size",
        [&](const Entry& e) { cfg.pair_group_size = to_int(e, "pair_group_size"); });
    add("incentive_group_sizes",
        [&](const Entry& e) { cfg.incentive_group_sizes = to_int_list(e, "incentive_group_sizes"); });
    add("k_grid", [&](const Entry& e) { cfg.k_grid = to_int_list(e, "k_grid"); });
    add("num_groups", [&](const Entry& e) { cfg.num_groups = to_int_list(e, "num_groups"); });
    add("std_targets", [&](const Entry& e) { cfg.std_targets = to_double_list(e, "std_targets"); });
    add("strategies", [&](const Entry& e) {
        cfg.strategies.clear();
        for (const std::string& name : split_list(e.value)) {
            cfg.strategies.push_back(parse_strategy(name));
        }
    });
    add("comparison_std",
        [&](const Entry& e) { cfg.comparison_std = to_double(e, "comparison_std"); });
    add("k_start", [&](const Entry& e) { cfg.k_start = to_int(e, "k_start"); });
    add("disperse_k_min",
        [&](const Entry& e) { cfg.disperse_k_min = to_int(e, "disperse_k_min"); });
    add("disperse_k_max",
        [&](const Entry& e) { cfg.disperse_k_max = to_int(e, "disperse_k_max"); });
    add("disperse_max_steps",
        [&](const Entry& e) { cfg.disperse_max_steps = to_u64(e, "disperse_max_steps"); });

    for (const auto& [key, entry] : entries) {
        auto handler = handlers.find(key);
        if (handler == handlers.end()) {
            throw ParseError(origin + ": unknown key '" + key + "'", entry.line);
        }
        handler->second(entry);
    }
    if (cfg.name.empty()) cfg.name = to_string(cfg.kind);
    if (!cfg.data_path.empty() && cfg.data_format == DatasetFormat::synthetic) {
        throw ParseError(origin + ": data_format required when data is a file", 1);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open config " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

namespace {

std::string render_index(int value) {
    // internal 0-based, emitted 1-based; -1 means not applicable
    return value < 0 ? "" : std::to_string(value + 1);
}

}  // namespace

void write_outputs(const std::string& out_dir, const ExperimentConfig& config,
                   const RunResult& run, const std::string& config_text) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::string name = config.name.empty() ? to_string(config.kind) : config.name;

    {
        std::ofstream out(fs::path(out_dir) / "records.csv", std::ios::binary);
        if (!out) throw DatasetError("cannot write records.csv");
        out << "experiment,seed,epoch,t,metric,value,context\n";
        for (const MetricRecord& record : run.records) {
            out << csv_escape(record.experiment) << ',' << record.seed << ','
                << render_index(record.epoch) << ',' << render_index(record.t) << ','
                << record.metric << ',' << (record.defined ? format_double(record.value) : "")
                << ',' << csv_escape(context_string(record.context)) << '\n';
        }
    }
    {
        std::ofstream out(fs::path(out_dir) / "summary.csv", std::ios::binary);
        if (!out) throw DatasetError("cannot write summary.csv");
        out << "experiment,metric,context,mean,std,seeds\n";
        for (const SummaryRow& row : run.summary) {
            out << csv_escape(name) << ',' << row.metric << ',' << csv_escape(row.context) << ','
                << format_double(row.mean) << ',' << format_double(row.stddev) << ',' << row.seeds
                << '\n';
        }
    }
    {
        std::ofstream out(fs::path(out_dir) / "sizes.csv", std::ios::binary);
        if (!out) throw DatasetError("cannot write sizes.csv");
        out << "experiment,context,size,count\n";
        for (const SizeFrequency& row : run.sizes) {
            out << csv_escape(name) << ',' << csv_escape(row.context) << ',' << row.size << ','
                << row.count << '\n';
        }
    }
    {
        // written last: its presence marks the run complete
        nlohmann::json manifest;
        manifest["experiment"] = name;
        manifest["kind"] = to_string(config.kind);
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(config_text)));
        manifest["config_hash"] = hash;
        manifest["master_seed"] = config.master_seed;
        manifest["replicates"] = config.replicates;
        manifest["records"] = run.records.size();
        manifest["summary_rows"] = run.summary.size();
        std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
        if (!out) throw DatasetError("cannot write manifest.json");
        out << manifest.dump(2) << '\n';
    }
}

}  // namespace pga
