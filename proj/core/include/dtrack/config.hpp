#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtrack/grid.hpp"
#include "dtrack/model.hpp"
#include "dtrack/pricing.hpp"

namespace dtrack {

// INI-style config: [section] headers, key = value lines, '#' or ';'
// comments. Keys keep their order within a section.
class IniFile {
public:
    static IniFile parse_file(const std::string& path);   // IoError if unreadable
    static IniFile parse_string(const std::string& text); // ConfigError with line info

    bool has(const std::string& section, const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const;

    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key,
                     long fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key) const;
    bool get_bool_or(const std::string& section, const std::string& key,
                     bool fallback) const;

    // Resolved text in section/key order, for manifests.
    std::string dump() const;

private:
    struct Entry {
        std::string key;
        std::string value;
    };
    std::map<std::string, std::vector<Entry>> sections_;
    const std::string* find(const std::string& section, const std::string& key) const;
};

// A full experiment description assembled from an IniFile.
struct ExperimentConfig {
    ModelSpec model;
    StateVector x0;      // t = grid.t0, m = (s0[, y0])
    TimeGrid grid;
    double beta = 1.0;
    std::vector<double> etas;
    std::vector<DerivativeSpec> instruments;
    int paths = 1;
    bool has_seed = false;
    std::uint64_t seed = 0;
    double wealth0 = 100.0;
    int rebalance_every = 1;
    int threads = 1;
    std::vector<double> track_betas; // [track] betas
    int calendar_months = 0;         // [vxx] months (0 = derive from horizon)
    std::optional<double> v0;        // [vxx] start value (default: index start)
    std::string quotes_path;         // [calibrate] quotes
    double s_now = 0.0;              // [calibrate] s_now
};

// Builds the model block ([model]: kind, r, then the kind's parameters,
// s0/y0, strict_feller). Throws MissingParameter / NonPositiveParameter /
// FellerViolation / ConfigError.
ModelSpec parse_model(const IniFile& ini);

// Assembles the whole experiment: [model], [grid] (t0, horizon, and n_steps
// or dt), [target] (beta, eta), [instruments] (kind,maturity[,strike][,leg]
// per entry), [run] (paths, seed, x0, rebalance_every, threads), plus the
// subcommand blocks [track], [vxx], [calibrate].
ExperimentConfig parse_experiment(const IniFile& ini);

} // namespace dtrack
