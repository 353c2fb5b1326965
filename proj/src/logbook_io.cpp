#include "ctmc_hums/logbook_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace fs = std::filesystem;

namespace ctmc_hums {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string format_optional(double x) { return std::isnan(x) ? std::string() : csv::format_double(x); }

std::optional<bool> parse_flag(const std::string& text) {
    const std::string t = csv::trim(text);
    if (t == "1" || t == "true" || t == "TRUE" || t == "True") return true;
    if (t == "0" || t == "false" || t == "FALSE" || t == "False" || t.empty()) return false;
    return std::nullopt;
}

std::string file_stem_for(std::size_t index, const std::string& id) {
    std::string safe;
    for (unsigned char ch : id) safe.push_back(std::isalnum(ch) || ch == '-' || ch == '_' ? char(ch) : '_');
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "appliance_%04zu_", index);
    return prefix + safe;
}

}  // namespace

void ApplianceLogbook::check() const {
    if (appliance_id.empty()) throw Error("appliance id is empty");
    for (std::size_t k = 1; k < records.size(); ++k)
        if (records[k].startup_index <= records[k - 1].startup_index)
            throw Error(appliance_id + ": startup_index must increase strictly");
    for (const auto& r : records)
        if (std::isinf(r.tmf_s)) throw Error(appliance_id + ": infinite tmf value");
    if (failure_startup) {
        if (!failed) throw Error(appliance_id + ": failure_startup given without failed flag");
        if (!records.empty() && *failure_startup > records.back().startup_index)
            throw Error(appliance_id + ": failure_startup after the last record");
    }
}

void FleetDataset::check() const {
    std::set<std::string> seen;
    for (const auto& a : appliances) {
        a.check();
        if (!seen.insert(a.appliance_id).second) throw Error("duplicate appliance id " + a.appliance_id);
    }
}

FleetDataset read_fleet_csv(std::istream& is, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw SchemaError(source_name + ": empty file");
    ++line_no;
    // UTF-8 byte order mark
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto header = csv::split_line(line);
    const std::vector<std::string> expected = csv::split_line(kFleetHeader);
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column[csv::trim(header[i])] = i;
    for (const auto& name : expected)
        if (!column.count(name)) throw SchemaError(source_name + ": missing column " + name);

    FleetDataset fleet;
    std::map<std::string, std::size_t> index_of;
    std::vector<std::string> errors;
    std::size_t first_error_line = 0;
    auto fail = [&](const std::string& what) {
        if (errors.empty()) first_error_line = line_no;
        errors.push_back("line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(fields.size()));
            continue;
        }
        auto field = [&](const char* name) -> const std::string& { return fields[column.at(name)]; };
        auto optional_double = [&](const char* name, double& out) {
            const std::string t = csv::trim(field(name));
            if (t.empty()) {
                out = kMissing;
                return true;
            }
            const auto v = csv::parse_double(t);
            if (!v || std::isinf(*v)) {
                fail(std::string("non-numeric ") + name + " '" + t + "'");
                return false;
            }
            out = *v;
            return true;
        };

        const std::string id = field("appliance_id");
        if (csv::trim(id).empty()) {
            fail("empty appliance_id");
            continue;
        }
        LogbookRecord rec;
        const auto startup = csv::parse_integer(field("startup_index"));
        if (!startup) {
            fail("non-integer startup_index '" + field("startup_index") + "'");
            continue;
        }
        rec.startup_index = *startup;
        if (!optional_double("cum_hours", rec.cum_hours) ||
            !optional_double("initial_temp_c", rec.initial_temp_c) ||
            !optional_double("tmf_s", rec.tmf_s))
            continue;
        const auto failed = parse_flag(field("failed"));
        if (!failed) {
            fail("bad failed flag '" + field("failed") + "'");
            continue;
        }
        std::optional<long long> failure_startup;
        if (!csv::trim(field("failure_startup")).empty()) {
            failure_startup = csv::parse_integer(field("failure_startup"));
            if (!failure_startup) {
                fail("non-integer failure_startup '" + field("failure_startup") + "'");
                continue;
            }
        }

        auto [it, inserted] = index_of.try_emplace(id, fleet.appliances.size());
        if (inserted) {
            ApplianceLogbook book;
            book.appliance_id = id;
            book.failed = *failed;
            book.failure_startup = failure_startup;
            fleet.appliances.push_back(std::move(book));
        }
        auto& book = fleet.appliances[it->second];
        if (book.failed != *failed || book.failure_startup != failure_startup) {
            fail("failure columns disagree with earlier rows of " + id);
            continue;
        }
        if (!book.records.empty() && rec.startup_index <= book.records.back().startup_index) {
            fail("startup_index not increasing for " + id);
            continue;
        }
        book.records.push_back(rec);
    }

    if (!errors.empty()) {
        std::string msg = std::to_string(errors.size()) + " malformed row(s)";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ParseError(source_name, first_error_line, msg);
    }
    try {
        fleet.check();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(source_name + ": " + e.what());
    }
    return fleet;
}

FleetDataset read_fleet(const fs::path& path) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    FleetDataset fleet;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw IoError("cannot open " + file.string());
        auto part = read_fleet_csv(in, file.string());
        for (auto& a : part.appliances) fleet.appliances.push_back(std::move(a));
    }
    try {
        fleet.check();
    } catch (const Error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return fleet;
}

namespace {

void write_rows(std::ostream& os, const ApplianceLogbook& book) {
    const std::string id = csv::quote_field(book.appliance_id);
    const std::string failed = book.failed ? "1" : "0";
    const std::string failure = book.failure_startup ? std::to_string(*book.failure_startup) : "";
    for (const auto& r : book.records) {
        os << id << ',' << r.startup_index << ',' << format_optional(r.cum_hours) << ','
           << format_optional(r.initial_temp_c) << ',' << format_optional(r.tmf_s) << ',' << failed
           << ',' << failure << '\n';
    }
}

}  // namespace

void write_fleet_csv(std::ostream& os, const FleetDataset& fleet) {
    os << kFleetHeader << '\n';
    for (const auto& book : fleet.appliances) write_rows(os, book);
}

void write_fleet(const FleetDataset& fleet, const fs::path& path) {
    if (path.extension() == ".csv") {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        write_fleet_csv(out, fleet);
        if (!out) throw IoError("write failed for " + path.string());
        return;
    }
    fs::create_directories(path);
    for (std::size_t k = 0; k < fleet.appliances.size(); ++k) {
        const auto file = path / (file_stem_for(k, fleet.appliances[k].appliance_id) + ".csv");
        std::ofstream out(file, std::ios::binary);
        if (!out) throw IoError("cannot write " + file.string());
        out << kFleetHeader << '\n';
        write_rows(out, fleet.appliances[k]);
        if (!out) throw IoError("write failed for " + file.string());
    }
}

FleetDataset generate_synthetic_fleet(const SyntheticFleetConfig& cfg) {
    SyntheticTruth truth;
    return generate_synthetic_fleet(cfg, truth);
}

FleetDataset generate_synthetic_fleet(const SyntheticFleetConfig& cfg, SyntheticTruth& truth) {
    if (cfg.c.size() != cfg.A.n_states() || cfg.A.n_states() < 2)
        throw DimensionError("synthetic fleet needs a two-or-more state model with matching slopes");
    if (cfg.failure_gap_min == 0 || cfg.failure_gap_max < cfg.failure_gap_min)
        throw ConfigError("failure gap range is empty");
    if (cfg.horizon < 2) throw ConfigError("horizon too short");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> temp(cfg.temp_min_c, cfg.temp_max_c);
    std::uniform_real_distribution<double> offset(-cfg.unit_offset_spread, cfg.unit_offset_spread);
    std::normal_distribution<double> noise(0.0, cfg.noise_scale);
    std::exponential_distribution<double> hours(1.0 / cfg.hours_per_startup);
    std::uniform_int_distribution<std::size_t> stable_len(cfg.horizon / 2, cfg.horizon);
    std::uniform_int_distribution<std::size_t> gap(cfg.failure_gap_min, cfg.failure_gap_max);
    const double onset_rate = cfg.A(0, 1);

    const std::size_t total = cfg.n_stable + cfg.n_degrading;
    std::vector<bool> degrading(total, false);
    std::fill(degrading.begin(), degrading.begin() + static_cast<std::ptrdiff_t>(cfg.n_degrading), true);
    std::shuffle(degrading.begin(), degrading.end(), rng);

    FleetDataset fleet;
    truth.onset_startup.assign(total, std::nullopt);
    for (std::size_t u = 0; u < total; ++u) {
        ApplianceLogbook book;
        char id[32];
        std::snprintf(id, sizeof id, "unit_%02zu", u + 1);
        book.appliance_id = id;

        std::size_t length = stable_len(rng);
        std::size_t onset = std::numeric_limits<std::size_t>::max();
        if (degrading[u]) {
            const double delay =
                onset_rate > 0.0 ? std::exponential_distribution<double>(onset_rate)(rng) : 0.0;
            onset = cfg.min_stable_startups + static_cast<std::size_t>(std::floor(delay));
            length = onset + gap(rng);
            book.failed = true;
            book.failure_startup = static_cast<long long>(length);
            truth.onset_startup[u] = static_cast<long long>(onset);
        }

        const double level = cfg.temp_intercept + offset(rng);
        double drift = 0.0;
        double cum_hours = 0.0;
        for (std::size_t s = 1; s <= length; ++s) {
            const StateIndex state = s > onset ? 1 : 0;
            drift += cfg.c[state];
            cum_hours += hours(rng);
            LogbookRecord rec;
            rec.startup_index = static_cast<long long>(s);
            rec.cum_hours = cum_hours;
            rec.initial_temp_c = temp(rng);
            rec.tmf_s = level + cfg.temp_slope * rec.initial_temp_c + drift + noise(rng);
            book.records.push_back(rec);
        }
        fleet.appliances.push_back(std::move(book));
    }
    return fleet;
}

}  // namespace ctmc_hums
