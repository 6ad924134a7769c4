#include "subfront/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "subfront/errors.hpp"

namespace subfront::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

double to_double(const std::string& s, bool& ok) {
    double v = 0.0;
    const auto t = trim(s);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    ok = ec == std::errc{} && p == t.data() + t.size() && !t.empty();
    return v;
}

// Reads typed values and reports problems with the entry's origin.
class Reader {
public:
    Reader(const KeyValueConfig& kv, std::map<std::string, std::string>& resolved) : kv_(kv), resolved_(resolved) {
        for (const auto& k : known_keys()) resolved_[k.key] = k.default_value;
        for (const auto& [key, e] : kv.entries()) resolved_[key] = e.value;
    }

    std::string origin(const std::string& key) const {
        const auto it = kv_.entries().find(key);
        return it == kv_.entries().end() ? "default" : it->second.origin;
    }
    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(origin(key) + ": key '" + key + "': " + what);
    }

    std::string str(const std::string& key) const { return resolved_.at(key); }

    double number(const std::string& key) const {
        bool ok = false;
        const double v = to_double(str(key), ok);
        if (!ok) fail(key, "expected a number, got '" + str(key) + "'");
        return v;
    }
    double positive(const std::string& key) const {
        const double v = number(key);
        if (!(v > 0.0)) fail(key, "must be positive");
        return v;
    }
    std::uint64_t integer(const std::string& key) const {
        const auto t = trim(str(key));
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
            fail(key, "expected a non-negative integer, got '" + t + "'");
        return v;
    }
    bool boolean(const std::string& key) const {
        const auto t = trim(str(key));
        if (t == "true" || t == "1" || t == "yes") return true;
        if (t == "false" || t == "0" || t == "no") return false;
        fail(key, "expected true or false, got '" + t + "'");
    }
    std::vector<double> numbers(const std::string& key) const {
        try {
            return parse_number_list(str(key));
        } catch (const ConfigError& e) {
            fail(key, e.what());
        }
    }
    std::string choice(const std::string& key, std::initializer_list<const char*> allowed) const {
        const auto t = trim(str(key));
        for (const char* a : allowed)
            if (t == a) return t;
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail(key, "expected one of {" + list + "}, got '" + t + "'");
    }

private:
    const KeyValueConfig& kv_;
    std::map<std::string, std::string>& resolved_;
};

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
    KeyValueConfig kv;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string where = source + ":" + std::to_string(number);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!valid_key(key)) throw ConfigError(where + ": malformed key '" + key + "'");
        if (kv.entries_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "' (first set at " + kv.entries_[key].origin + ")");
        kv.set(key, value, where);
    }
    return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value, const std::string& origin) {
    if (!valid_key(key)) throw ConfigError(origin + ": malformed key '" + key + "'");
    entries_[key] = Entry{value, origin};
}

const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys = {
        {"command", "", "optional; must match the command given on the command line"},
        {"model.mu", "0.3", "subdiffusion exponent in (0,1)"},
        {"model.sigma", "1", "Gaussian jump standard deviation"},
        {"grid.x_min", "0", "left end of the periodic domain"},
        {"grid.x_max", "20", "right end of the periodic domain"},
        {"grid.cells", "auto", "cells; auto = 512 (hj), 256 (kinetic), 1024 (converge)"},
        {"ic.kind", "bounded_quadratic", "bounded_quadratic | quadratic | power | constant"},
        {"ic.center", "10", "centre of the initial profile"},
        {"ic.coeff", "0.2", "amplitude of the initial profile"},
        {"ic.cap", "20", "cap on (x - center)^2 for bounded_quadratic"},
        {"ic.value", "0", "value for the constant profile"},
        {"eps.list", "0.2, 0.1, 0.05", "epsilon values for converge"},
        {"output.dir", "out", "output directory"},
        {"output.plots", "false", "also write SVG plots"},
        {"seed", "12345", "Monte Carlo seed"},
        {"workers", "0", "worker threads; 0 = hardware concurrency"},
        {"hamiltonian.mu_list", "0.12, 0.3, 0.5, 0.7, 0.98", "mu values for the H tables"},
        {"hamiltonian.sigma", "0.5", "jump width for the H tables"},
        {"hamiltonian.p_max", "0.5", "tables cover p in [0, p_max]"},
        {"hamiltonian.points", "201", "table points"},
        {"hamiltonian.slope_p_min", "1e-3", "log-log slope window start"},
        {"hamiltonian.slope_p_max", "1e-2", "log-log slope window end"},
        {"hamiltonian.slope_tolerance", "0.03", "relative tolerance of the slope against 2/mu"},
        {"hamiltonian.asymptote_mu", "0.3", "mu of the asymptote comparison"},
        {"hamiltonian.asymptote_p", "1e-3", "p at which the asymptotic constant is checked"},
        {"hj.rows", "quadratic, power, diffusive", "rows to run"},
        {"hj.t_end", "1e5", "final time"},
        {"hj.t_first", "1", "first snapshot time"},
        {"hj.snapshots", "20", "log-spaced snapshots"},
        {"hj.diffusion", "0.01", "jump rate K of the diffusive row"},
        {"hj.cfl", "0.4", "CFL number"},
        {"hj.fit_t_min", "1e3", "snapshots used in the self-similar fit start here"},
        {"hj.table_p_max", "4", "Hamiltonian table half-width"},
        {"hj.table_points", "801", "Hamiltonian table points"},
        {"hj.exponent_tolerance", "0.10", "relative tolerance of the decay exponent"},
        {"hj.collapse_tolerance", "0.05", "tolerance of the profile collapse"},
        {"kinetic.epsilon", "0.1", "scaling parameter"},
        {"kinetic.t_end", "2", "final time"},
        {"kinetic.age_step", "0.1", "age step dt/eps"},
        {"kinetic.age_nodes", "20", "Gauss-Legendre nodes in the initial age"},
        {"kinetic.arithmetic", "auto", "auto | linear | log"},
        {"kinetic.save_every", "10", "write every n-th level"},
        {"converge.t_end", "2", "final time of the kinetic runs and the reference"},
        {"converge.t_min", "0.5", "error window start time"},
        {"converge.t_max", "2", "error window end time"},
        {"converge.x_min", "2", "error window left end"},
        {"converge.x_max", "18", "error window right end"},
        {"mc.walkers", "100000", "number of walkers"},
        {"mc.t_end", "1e4", "final time"},
        {"mc.samples", "41", "log-spaced MSD samples from t = 1"},
        {"mc.fit_t_min", "10", "MSD fit window start"},
        {"mc.initial_age", "zero", "zero | uniform"},
        {"mc.exponential", "false", "constant-rate control"},
        {"mc.rate", "1", "rate K of the control"},
        {"mc.exponent_tolerance", "0.05", "absolute tolerance of the MSD exponent"},
        {"mc.tail_eps", "0.2", "epsilon of the empirical tail"},
        {"mc.tail_bin", "0.1", "bin width of the empirical tail"},
        {"mc.tail_x", "10, 10.2, 10.4, 10.6, 10.8, 11", "tail evaluation points"},
    };
    return keys;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        bool ok = false;
        const double v = to_double(item, ok);
        if (!ok) throw ConfigError("expected a comma-separated number list, bad item '" + trim(item) + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> parse_word_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv, const std::string& command) {
    std::set<std::string> known;
    for (const auto& k : known_keys()) known.insert(k.key);
    for (const auto& [key, e] : kv.entries())
        if (!known.count(key)) throw ConfigError(e.origin + ": unknown key '" + key + "'");

    ExperimentConfig c;
    Reader r(kv, c.resolved);
    c.command = command;
    if (!trim(r.str("command")).empty() && trim(r.str("command")) != command)
        r.fail("command", "config is for '" + r.str("command") + "', invoked as '" + command + "'");
    c.resolved["command"] = command;

    c.model.mu = r.number("model.mu");
    c.model.sigma = r.number("model.sigma");
    try {
        c.model.validate();
    } catch (const DomainError& e) {
        r.fail("model.mu", e.what());
    }

    c.grid.x_min = r.number("grid.x_min");
    c.grid.x_max = r.number("grid.x_max");
    if (trim(r.str("grid.cells")) == "auto") {
        c.grid.n_cells = command == "kinetic" ? 256 : command == "converge" ? 1024 : 512;
        c.resolved["grid.cells"] = std::to_string(c.grid.n_cells);
    } else {
        c.grid.n_cells = r.integer("grid.cells");
    }
    try {
        c.grid.validate();
    } catch (const DomainError& e) {
        r.fail("grid.cells", e.what());
    }

    c.ic.kind = r.choice("ic.kind", {"bounded_quadratic", "quadratic", "power", "constant"});
    c.ic.center = r.number("ic.center");
    c.ic.coeff = r.number("ic.coeff");
    c.ic.cap = r.positive("ic.cap");
    c.ic.value = r.number("ic.value");

    c.eps_list = r.numbers("eps.list");
    for (double e : c.eps_list)
        if (!(e > 0.0 && e <= 1.0)) r.fail("eps.list", "every epsilon must lie in (0, 1]");
    c.out_dir = trim(r.str("output.dir"));
    if (c.out_dir.empty()) r.fail("output.dir", "must not be empty");
    c.plots = r.boolean("output.plots");
    c.seed = r.integer("seed");
    c.workers = r.integer("workers");

    auto& h = c.hamiltonian;
    h.mu_list = r.numbers("hamiltonian.mu_list");
    if (command == "hamiltonian" && h.mu_list.empty()) r.fail("hamiltonian.mu_list", "must not be empty");
    for (double mu : h.mu_list)
        if (!(mu > 0.0 && mu < 1.0)) r.fail("hamiltonian.mu_list", "every mu must lie in (0, 1)");
    h.sigma = r.positive("hamiltonian.sigma");
    h.p_max = r.positive("hamiltonian.p_max");
    h.points = r.integer("hamiltonian.points");
    if (h.points < 3) r.fail("hamiltonian.points", "need at least 3 points");
    h.slope_p_min = r.positive("hamiltonian.slope_p_min");
    h.slope_p_max = r.positive("hamiltonian.slope_p_max");
    if (!(h.slope_p_max > h.slope_p_min)) r.fail("hamiltonian.slope_p_max", "must exceed slope_p_min");
    h.slope_tolerance = r.positive("hamiltonian.slope_tolerance");
    h.asymptote_mu = r.number("hamiltonian.asymptote_mu");
    if (!(h.asymptote_mu > 0.0 && h.asymptote_mu < 1.0)) r.fail("hamiltonian.asymptote_mu", "must lie in (0, 1)");
    h.asymptote_p = r.positive("hamiltonian.asymptote_p");

    auto& j = c.hj;
    j.rows = parse_word_list(r.str("hj.rows"));
    for (const auto& row : j.rows)
        if (row != "quadratic" && row != "power" && row != "diffusive")
            r.fail("hj.rows", "unknown row '" + row + "' (quadratic, power, diffusive)");
    if (command == "hj" && j.rows.empty()) r.fail("hj.rows", "must not be empty");
    j.t_end = r.positive("hj.t_end");
    j.t_first = r.positive("hj.t_first");
    j.snapshots = r.integer("hj.snapshots");
    if (command == "hj" && j.snapshots == 0) r.fail("hj.snapshots", "zero snapshots requested");
    if (j.snapshots == 1) r.fail("hj.snapshots", "need at least 2 snapshots");
    if (!(j.t_end > j.t_first)) r.fail("hj.t_first", "must be below hj.t_end");
    j.diffusion = r.positive("hj.diffusion");
    j.cfl = r.positive("hj.cfl");
    j.fit_t_min = r.positive("hj.fit_t_min");
    j.table_p_max = r.positive("hj.table_p_max");
    j.table_points = r.integer("hj.table_points");
    j.exponent_tolerance = r.positive("hj.exponent_tolerance");
    j.collapse_tolerance = r.positive("hj.collapse_tolerance");

    auto& k = c.kinetic;
    k.epsilon = r.positive("kinetic.epsilon");
    if (k.epsilon > 1.0) r.fail("kinetic.epsilon", "must lie in (0, 1]");
    k.t_end = r.positive("kinetic.t_end");
    k.age_step = r.positive("kinetic.age_step");
    k.age_nodes = r.integer("kinetic.age_nodes");
    if (k.age_nodes < 2) r.fail("kinetic.age_nodes", "need at least 2 nodes");
    k.arithmetic = r.choice("kinetic.arithmetic", {"auto", "linear", "log"});
    k.save_every = r.integer("kinetic.save_every");
    if (k.save_every == 0) r.fail("kinetic.save_every", "must be at least 1");

    auto& v = c.converge;
    v.t_end = r.positive("converge.t_end");
    v.t_min = r.number("converge.t_min");
    v.t_max = r.number("converge.t_max");
    v.x_min = r.number("converge.x_min");
    v.x_max = r.number("converge.x_max");
    if (!(v.t_min < v.t_max && v.t_max <= v.t_end)) r.fail("converge.t_max", "need t_min < t_max <= t_end");
    if (!(v.x_min < v.x_max)) r.fail("converge.x_max", "need x_min < x_max");
    if (command == "converge" && c.eps_list.size() < 2) r.fail("eps.list", "need at least two epsilon values");

    auto& m = c.mc;
    m.walkers = r.integer("mc.walkers");
    if (m.walkers == 0) r.fail("mc.walkers", "must be positive");
    m.t_end = r.positive("mc.t_end");
    m.samples = r.integer("mc.samples");
    if (m.samples < 2) r.fail("mc.samples", "need at least 2 samples");
    if (!(m.t_end > 1.0)) r.fail("mc.t_end", "must exceed 1 (samples start at t = 1)");
    m.fit_t_min = r.positive("mc.fit_t_min");
    m.initial_age = r.choice("mc.initial_age", {"zero", "uniform"});
    m.exponential = r.boolean("mc.exponential");
    m.rate = r.positive("mc.rate");
    m.exponent_tolerance = r.positive("mc.exponent_tolerance");
    m.tail_eps = r.positive("mc.tail_eps");
    m.tail_bin = r.positive("mc.tail_bin");
    m.tail_x = r.numbers("mc.tail_x");
    return c;
}

}  // namespace subfront::harness
