#include "dtrack/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dtrack/errors.hpp"

namespace dtrack {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!s.empty() && s.back() == ',') fields.push_back("");
    return fields;
}

double to_double(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError(where + ": empty value");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(where + ": '" + t + "' is not a number");
    return v;
}

long to_long(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError(where + ": empty value");
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(where + ": '" + t + "' is not an integer");
    return v;
}

std::uint64_t to_u64(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty() || t[0] == '-') throw ConfigError(where + ": '" + t + "' is not a seed");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(where + ": '" + t + "' is not a seed");
    return v;
}

std::vector<double> to_double_list(const std::string& where, const std::string& text) {
    std::vector<double> out;
    for (const auto& field : split_fields(text)) out.push_back(to_double(where, field));
    return out;
}

} // namespace

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_string(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

IniFile IniFile::parse_string(const std::string& text) {
    IniFile ini;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
            ini.sections_[section]; // a header alone still declares the section
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) +
                              ": key outside any [section]");
        auto& entries = ini.sections_[section];
        auto hit = std::find_if(entries.begin(), entries.end(),
                                [&](const Entry& e) { return e.key == key; });
        if (hit != entries.end())
            hit->value = value; // later assignment wins, position kept
        else
            entries.push_back(Entry{key, value});
    }
    return ini;
}

const std::string* IniFile::find(const std::string& section, const std::string& key) const {
    const auto sec = sections_.find(section);
    if (sec == sections_.end()) return nullptr;
    for (const auto& entry : sec->second)
        if (entry.key == key) return &entry.value;
    return nullptr;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::vector<std::string> IniFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto sec = sections_.find(section);
    if (sec == sections_.end()) return out;
    out.reserve(sec->second.size());
    for (const auto& entry : sec->second) out.push_back(entry.key);
    return out;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
    const std::string* v = find(section, key);
    if (!v) throw MissingParameter("[" + section + "] " + key + " is required");
    return *v;
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double IniFile::get_double(const std::string& section, const std::string& key) const {
    return to_double("[" + section + "] " + key, get(section, key));
}

double IniFile::get_double_or(const std::string& section, const std::string& key,
                              double fallback) const {
    const std::string* v = find(section, key);
    return v ? to_double("[" + section + "] " + key, *v) : fallback;
}

long IniFile::get_long(const std::string& section, const std::string& key) const {
    return to_long("[" + section + "] " + key, get(section, key));
}

long IniFile::get_long_or(const std::string& section, const std::string& key,
                          long fallback) const {
    const std::string* v = find(section, key);
    return v ? to_long("[" + section + "] " + key, *v) : fallback;
}

std::uint64_t IniFile::get_u64(const std::string& section, const std::string& key) const {
    return to_u64("[" + section + "] " + key, get(section, key));
}

bool IniFile::get_bool_or(const std::string& section, const std::string& key,
                          bool fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    std::string t = trim(*v);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("[" + section + "] " + key + ": '" + *v + "' is not a boolean");
}

std::string IniFile::dump() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, entries] : sections_) {
        if (!first) out << '\n';
        first = false;
        out << '[' << name << "]\n";
        for (const auto& entry : entries) out << entry.key << " = " << entry.value << '\n';
    }
    return out.str();
}

ModelSpec parse_model(const IniFile& ini) {
    const std::string kind = ini.get("model", "kind");
    ModelSpec model;
    if (kind == "bs" || kind == "black_scholes") {
        model = make_bs(ini.get_double("model", "r"), ini.get_double("model", "sigma"));
    } else if (kind == "heston") {
        model = make_heston(ini.get_double("model", "r"), ini.get_double("model", "kappa"),
                            ini.get_double("model", "theta"), ini.get_double("model", "nu"),
                            ini.get_double("model", "rho"),
                            ini.get_bool_or("model", "strict_feller", true));
    } else if (kind == "cir") {
        model = make_cir(ini.get_double("model", "r"), ini.get_double("model", "kappa"),
                         ini.get_double("model", "theta"), ini.get_double("model", "sigma"),
                         ini.get_bool_or("model", "strict_feller", true));
    } else if (kind == "csqr") {
        model = make_csqr(ini.get_double("model", "r"), ini.get_double("model", "gamma"),
                          ini.get_double("model", "sigma"), ini.get_double("model", "kappa"),
                          ini.get_double("model", "theta"), ini.get_double("model", "nu"),
                          ini.get_double("model", "rho"));
    } else {
        throw ConfigError("[model] kind '" + kind +
                          "' is not one of bs, heston, cir, csqr");
    }
    if (ini.has("model", "mpr")) {
        model.mpr = to_double_list("[model] mpr", ini.get("model", "mpr"));
    }
    validate(model);
    return model;
}

namespace {

DerivativeSpec parse_instrument(const std::string& key, const std::string& value) {
    const std::string where = "[instruments] " + key;
    const auto fields = split_fields(value);
    if (fields.size() < 2) throw ConfigError(where + ": expected kind,maturity,...");
    DerivativeSpec spec;
    const std::string& kind = fields[0];
    spec.maturity = to_double(where, fields[1]);
    if (kind == "call") {
        if (fields.size() != 3) throw ConfigError(where + ": call needs kind,maturity,strike");
        spec.kind = InstrumentKind::EuropeanCall;
        spec.strike = to_double(where, fields[2]);
    } else if (kind == "futures_index") {
        if (fields.size() != 2) throw ConfigError(where + ": futures_index needs kind,maturity");
        spec.kind = InstrumentKind::FuturesOnIndex;
    } else if (kind == "futures_factor") {
        if (fields.size() > 3) throw ConfigError(where + ": futures_factor needs kind,maturity[,leg]");
        spec.kind = InstrumentKind::FuturesOnFactor;
        spec.leg = fields.size() == 3 ? static_cast<int>(to_long(where, fields[2])) : 1;
    } else {
        throw ConfigError(where + ": unknown instrument kind '" + kind + "'");
    }
    return spec;
}

} // namespace

ExperimentConfig parse_experiment(const IniFile& ini) {
    ExperimentConfig cfg;
    cfg.model = parse_model(ini);

    const double t0 = ini.get_double_or("grid", "t0", 0.0);
    const double horizon = ini.get_double("grid", "horizon");
    int n_steps = 0;
    if (ini.has("grid", "n_steps")) {
        n_steps = static_cast<int>(ini.get_long("grid", "n_steps"));
    } else if (ini.has("grid", "dt")) {
        const double dt = ini.get_double("grid", "dt");
        if (!(dt > 0.0)) throw NonPositiveParameter("[grid] dt must be > 0");
        const double steps = horizon / dt;
        n_steps = static_cast<int>(std::llround(steps));
        if (n_steps < 1 || std::abs(n_steps * dt - horizon) > 1e-9 * std::max(1.0, horizon))
            throw ConfigError("[grid] horizon is not a whole number of dt steps");
    } else {
        throw MissingParameter("[grid] needs n_steps or dt");
    }
    cfg.grid = make_grid(t0, t0 + horizon, n_steps);

    const double s0 = ini.get_double("model", "s0");
    if (!(s0 > 0.0)) throw NonPositiveParameter("[model] s0 must be > 0");
    cfg.x0.t = cfg.grid.t0;
    cfg.x0.m = {s0};
    if (cfg.model.dim() == 1) {
        const double y0 = ini.get_double("model", "y0");
        if (!(y0 > 0.0)) throw NonPositiveParameter("[model] y0 must be > 0");
        cfg.x0.m.push_back(y0);
    } else if (ini.has("model", "y0")) {
        throw ConfigError("[model] y0 given but the model has no factor");
    }

    cfg.beta = ini.get_double_or("target", "beta", 1.0);
    if (cfg.model.dim() == 1) {
        cfg.etas = {ini.get_double_or("target", "eta", 0.0)};
    } else if (ini.has("target", "eta")) {
        throw ConfigError("[target] eta given but the model has no factor");
    }

    for (const auto& key : ini.keys("instruments"))
        cfg.instruments.push_back(parse_instrument(key, ini.get("instruments", key)));

    cfg.paths = static_cast<int>(ini.get_long_or("run", "paths", 1));
    if (cfg.paths < 1) throw ConfigError("[run] paths must be >= 1");
    if (ini.has("run", "seed")) {
        cfg.has_seed = true;
        cfg.seed = ini.get_u64("run", "seed");
    }
    cfg.wealth0 = ini.get_double_or("run", "x0", 100.0);
    if (!(cfg.wealth0 > 0.0)) throw NonPositiveParameter("[run] x0 must be > 0");
    cfg.rebalance_every = static_cast<int>(ini.get_long_or("run", "rebalance_every", 1));
    if (cfg.rebalance_every < 1) throw ConfigError("[run] rebalance_every must be >= 1");
    cfg.threads = static_cast<int>(ini.get_long_or("run", "threads", 1));
    if (cfg.threads < 1) throw ConfigError("[run] threads must be >= 1");

    if (ini.has("track", "betas"))
        cfg.track_betas = to_double_list("[track] betas", ini.get("track", "betas"));
    cfg.calendar_months = static_cast<int>(ini.get_long_or("vxx", "months", 0));
    if (ini.has("vxx", "v0")) cfg.v0 = ini.get_double("vxx", "v0");
    cfg.quotes_path = ini.get_or("calibrate", "quotes", "");
    cfg.s_now = ini.get_double_or("calibrate", "s_now", 0.0);
    return cfg;
}

} // namespace dtrack
