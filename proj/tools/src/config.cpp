#include "spincool/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spincool/error.hpp"

namespace spincool::cli {

namespace {

std::string trim(const std::string &s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string unquote(const std::string &s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

const std::set<std::string> &keys_for(const std::string &experiment) {
    static const std::map<std::string, std::set<std::string>> table = {
        {"fig1", {"nbar", "fock_dim", "t_points", "lambda_points", "lambda_max", "format"}},
        {"fig2", {"t", "nbar", "fock_dim", "n_max", "lambda_points", "lambda_max", "format"}},
        {"fig3", {"lambda", "t", "nbar", "fock_dim", "n_max", "iterations", "format"}},
        {"fig6", {"lambda", "t", "nbar", "fock_dim", "iterations", "format"}},
        {"collective", {"lambda", "t", "nbar", "fock_dim", "n_spins", "iterations", "format"}},
        {"open",
         {"lambda", "t", "nbar", "fock_dim", "n_spins", "iterations", "gamma", "spin_relaxation",
          "dephasing", "nbar_bath", "dt", "reinitialize_spins", "format"}},
        {"optimize",
         {"lambda", "t", "nbar", "fock_dim", "n_spins", "basis", "restarts", "max_evals", "tol",
          "seed", "probability_floor"}},
        {"estimate-coupling",
         {"dbdz", "mass", "omega", "dbdz_min", "dbdz_max", "dbdz_points", "format"}},
    };
    const auto it = table.find(experiment);
    if (it == table.end()) {
        throw ConfigError("unknown experiment '" + experiment + "'");
    }
    return it->second;
}

bool known_anywhere(const std::string &key) {
    for (const auto &name : experiment_names()) {
        if (keys_for(name).count(key) != 0) {
            return true;
        }
    }
    return false;
}

double to_double(const std::string &key, const std::string &value) {
    double out = 0.0;
    const char *begin = value.data();
    const char *end = begin + value.size();
    if (!value.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
        throw ConfigError("key '" + key + "': '" + value + "' is not a finite number");
    }
    return out;
}

long long to_integer(const std::string &key, const std::string &value) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    }
    return out;
}

int to_int(const std::string &key, const std::string &value) {
    const long long v = to_integer(key, value);
    if (v < -1000000000LL || v > 1000000000LL) {
        throw ConfigError("key '" + key + "': value out of range");
    }
    return static_cast<int>(v);
}

bool to_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw ConfigError("key '" + key + "': '" + value + "' is not a boolean");
}

void apply_defaults(RunConfig &c) {
    const std::string &e = c.experiment;
    if (e == "fig3") {
        c.iterations = 10;
    } else if (e == "fig6") {
        c.iterations = 10;
    } else if (e == "collective") {
        c.model.n_spins = 50;
        c.model.lambda = 0.028;
        c.model.basis = Basis::collective;
        c.iterations = 5;
    } else if (e == "open") {
        c.model.nbar = 3.0;
        c.model.fock_dim = 60;
        c.iterations = 5;
        c.rates = LindbladRates{1e-3, 1e-3, 1e-2, std::nullopt};
    } else if (e == "optimize") {
        c.model.n_spins = 2;
        c.optimize.n_spins = 2;
    }
}

void apply(RunConfig &c, const std::string &key, const std::string &value) {
    if (key == "lambda") {
        c.model.lambda = to_double(key, value);
    } else if (key == "t") {
        c.model.t = to_double(key, value);
    } else if (key == "nbar") {
        c.model.nbar = to_double(key, value);
    } else if (key == "fock_dim") {
        c.model.fock_dim = to_int(key, value);
    } else if (key == "n_spins") {
        c.model.n_spins = to_int(key, value);
        c.optimize.n_spins = c.model.n_spins;
    } else if (key == "iterations") {
        c.iterations = to_int(key, value);
    } else if (key == "format") {
        if (value == "csv") {
            c.format = OutputFormat::csv;
        } else if (value == "json") {
            c.format = OutputFormat::json;
        } else {
            throw ConfigError("key 'format': expected csv or json, got '" + value + "'");
        }
    } else if (key == "t_points") {
        c.t_points = to_int(key, value);
    } else if (key == "lambda_points") {
        c.lambda_points = to_int(key, value);
    } else if (key == "lambda_max") {
        c.lambda_max = to_double(key, value);
    } else if (key == "n_max") {
        c.n_max = to_int(key, value);
    } else if (key == "gamma") {
        c.rates.value().gamma = to_double(key, value);
    } else if (key == "spin_relaxation") {
        c.rates.value().spin_relaxation = to_double(key, value);
    } else if (key == "dephasing") {
        c.rates.value().dephasing = to_double(key, value);
    } else if (key == "nbar_bath") {
        c.rates.value().nbar_bath = to_double(key, value);
    } else if (key == "dt") {
        c.dt = to_double(key, value);
    } else if (key == "reinitialize_spins") {
        c.reinitialize_spins = to_bool(key, value);
    } else if (key == "basis") {
        if (value == "product") {
            c.optimize.basis = Basis::product;
        } else if (value == "collective") {
            c.optimize.basis = Basis::collective;
        } else {
            throw ConfigError("key 'basis': expected product or collective, got '" + value + "'");
        }
    } else if (key == "restarts") {
        c.optimize.restarts = to_int(key, value);
    } else if (key == "max_evals") {
        c.optimize.max_evals = to_int(key, value);
    } else if (key == "tol") {
        c.optimize.tol = to_double(key, value);
    } else if (key == "seed") {
        const long long s = to_integer(key, value);
        if (s < 0) {
            throw ConfigError("key 'seed' must be non-negative");
        }
        c.optimize.seed = static_cast<std::uint64_t>(s);
    } else if (key == "probability_floor") {
        c.optimize.probability_floor = to_double(key, value);
    } else if (key == "dbdz") {
        c.dbdz = to_double(key, value);
    } else if (key == "mass") {
        c.mass = to_double(key, value);
    } else if (key == "omega") {
        c.omega = to_double(key, value);
    } else if (key == "dbdz_min") {
        c.dbdz_min = to_double(key, value);
    } else if (key == "dbdz_max") {
        c.dbdz_max = to_double(key, value);
    } else if (key == "dbdz_points") {
        c.dbdz_points = to_int(key, value);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

double max_label(const RunConfig &c, int n_spins) {
    return c.model.basis == Basis::collective ? 0.5 * n_spins : static_cast<double>(n_spins);
}

void require_dimension(const RunConfig &c, double lambda, int n_spins) {
    const double alpha = lambda * max_label(c, n_spins) * std::abs(c.model.eta());
    if (alpha * alpha > c.model.fock_dim / 4.0) {
        std::ostringstream msg;
        msg << "fock_dim = " << c.model.fock_dim << " is too small for displacement |alpha| = "
            << alpha << "; need at least " << required_dimension(alpha);
        throw ConfigError(msg.str());
    }
}

void validate(const RunConfig &c) {
    const std::string &e = c.experiment;
    try {
        c.model.validate();
        if (c.rates) {
            c.rates->validate();
        }
    } catch (const spincool::Error &err) {
        throw ConfigError(err.what());
    }
    if (c.jobs < 1) {
        throw ConfigError("--jobs must be >= 1");
    }
    if (c.iterations < 1) {
        throw ConfigError("iterations must be >= 1");
    }
    if (e == "fig1" || e == "fig2") {
        if (c.lambda_points < 1 || c.t_points < 1) {
            throw ConfigError("grid point counts must be >= 1");
        }
        if (!(c.lambda_max >= 0.0)) {
            throw ConfigError("lambda_max must be non-negative");
        }
    }
    if (e == "fig1") {
        RunConfig probe = c;
        probe.model.t = std::numbers::pi;
        require_dimension(probe, c.lambda_max, 1);
    } else if (e == "fig2" || e == "fig3") {
        if (c.n_max < 1 || c.n_max > 12) {
            throw ConfigError("n_max must lie in 1..12");
        }
        require_dimension(c, e == "fig2" ? c.lambda_max : c.model.lambda, c.n_max);
    } else if (e == "fig6") {
        require_dimension(c, c.model.lambda, 4);
    } else if (e == "collective") {
        if (c.model.n_spins > 2000) {
            throw ConfigError("n_spins must be <= 2000 for the collective run");
        }
        require_dimension(c, c.model.lambda, c.model.n_spins);
    } else if (e == "open") {
        if (c.model.n_spins > 4) {
            throw ConfigError("open runs support 1 <= n_spins <= 4");
        }
        const long long joint = (1LL << c.model.n_spins) * c.model.fock_dim;
        if (joint > 1024) {
            throw ConfigError("open runs need 2^n_spins * fock_dim <= 1024 (got " +
                              std::to_string(joint) + ")");
        }
        if (!(c.dt > 0.0)) {
            throw ConfigError("dt must be positive");
        }
        require_dimension(c, c.model.lambda, c.model.n_spins);
    } else if (e == "optimize") {
        try {
            c.optimize.validate();
        } catch (const spincool::Error &err) {
            throw ConfigError(err.what());
        }
        require_dimension(c, c.model.lambda, c.model.n_spins);
    } else if (e == "estimate-coupling") {
        if (!(c.dbdz > 0.0 && c.mass > 0.0 && c.omega > 0.0 && c.dbdz_min > 0.0 &&
              c.dbdz_max >= c.dbdz_min)) {
            throw ConfigError("coupling inputs must be positive with dbdz_min <= dbdz_max");
        }
        if (c.dbdz_points < 1) {
            throw ConfigError("dbdz_points must be >= 1");
        }
    }
}

} // namespace

ConfigFile parse_config_text(const std::string &text) {
    ConfigFile out;
    std::string section = "common";
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "common" && !is_experiment(section)) {
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section '" +
                                  section + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        out[section][key] = value;
    }
    return out;
}

ConfigFile load_config_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> names = {
        "fig1", "fig2", "fig3", "fig6", "collective", "open", "optimize", "estimate-coupling"};
    return names;
}

bool is_experiment(const std::string &name) {
    const auto &names = experiment_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

RunConfig resolve_config(const std::string &experiment, const ConfigFile &file,
                         const std::vector<std::string> &overrides,
                         const std::filesystem::path &out_dir, int jobs) {
    const std::set<std::string> &allowed = keys_for(experiment);
    RunConfig c;
    c.experiment = experiment;
    c.out_dir = out_dir;
    c.jobs = jobs;
    apply_defaults(c);
    if (experiment == "fig1") {
        c.model.n_spins = 1;
    }

    if (const auto it = file.find("common"); it != file.end()) {
        for (const auto &[key, value] : it->second) {
            if (!known_anywhere(key)) {
                throw ConfigError("unknown key '" + key + "' in common section");
            }
            if (allowed.count(key) != 0) {
                apply(c, key, value);
            }
        }
    }
    if (const auto it = file.find(experiment); it != file.end()) {
        for (const auto &[key, value] : it->second) {
            if (allowed.count(key) == 0) {
                throw ConfigError("key '" + key + "' does not apply to " + experiment);
            }
            apply(c, key, value);
        }
    }
    for (const std::string &item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + item + "'");
        }
        std::string key = trim(item.substr(0, eq));
        const std::string value = unquote(trim(item.substr(eq + 1)));
        if (const auto dot = key.find('.'); dot != std::string::npos) {
            const std::string prefix = key.substr(0, dot);
            if (prefix != "common" && prefix != experiment) {
                throw ConfigError("--set key '" + key + "' targets another experiment");
            }
            key = key.substr(dot + 1);
        }
        if (allowed.count(key) == 0) {
            throw ConfigError("key '" + key + "' does not apply to " + experiment);
        }
        apply(c, key, value);
    }
    if (experiment == "optimize") {
        c.optimize.n_spins = c.model.n_spins;
        c.optimize.jobs = jobs;
        c.model.basis = c.optimize.basis;
    }
    validate(c);
    return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    if (experiment != "estimate-coupling") {
        j["lambda"] = model.lambda;
        j["t"] = model.t;
        j["nbar"] = model.nbar;
        j["n_spins"] = model.n_spins;
        j["fock_dim"] = model.fock_dim;
        j["basis"] = model.basis == Basis::product ? "product" : "collective";
    }
    if (experiment == "fig1" || experiment == "fig2") {
        if (experiment == "fig1") {
            j["t_points"] = t_points;
        } else {
            j["n_max"] = n_max;
        }
        j["lambda_points"] = lambda_points;
        j["lambda_max"] = lambda_max;
    }
    if (experiment == "fig3" || experiment == "fig6" || experiment == "collective" ||
        experiment == "open") {
        j["iterations"] = iterations;
    }
    if (experiment == "fig3") {
        j["n_max"] = n_max;
    }
    if (experiment == "open" && rates) {
        j["gamma"] = rates->gamma;
        j["spin_relaxation"] = rates->spin_relaxation;
        j["dephasing"] = rates->dephasing;
        j["nbar_bath"] = rates->nbar_bath.value_or(model.nbar);
        j["dt"] = dt;
        if (reinitialize_spins) {
            j["reinitialize_spins"] = *reinitialize_spins;
        } else {
            j["reinitialize_spins"] = nullptr;
        }
    }
    if (experiment == "optimize") {
        j["restarts"] = optimize.restarts;
        j["max_evals"] = optimize.max_evals;
        j["tol"] = optimize.tol;
        j["seed"] = optimize.seed;
        if (optimize.probability_floor) {
            j["probability_floor"] = *optimize.probability_floor;
        } else {
            j["probability_floor"] = nullptr;
        }
    }
    if (experiment == "estimate-coupling") {
        j["dbdz"] = dbdz;
        j["mass"] = mass;
        j["omega"] = omega;
        j["dbdz_min"] = dbdz_min;
        j["dbdz_max"] = dbdz_max;
        j["dbdz_points"] = dbdz_points;
    }
    j["format"] = format == OutputFormat::csv ? "csv" : "json";
    return j;
}

} // namespace spincool::cli
