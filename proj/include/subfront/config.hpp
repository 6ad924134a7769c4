#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "subfront/grid.hpp"
#include "subfront/model.hpp"

namespace subfront::harness {

// Flat "key = value" text, '#' starts a comment. Keys are dotted (section.name).
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        std::string origin;   // "file:line" or "command line"
    };

    static KeyValueConfig parse(std::istream& in, const std::string& source);
    static KeyValueConfig parse_file(const std::string& path);

    void set(const std::string& key, const std::string& value, const std::string& origin);
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

struct KeyInfo {
    std::string key;
    std::string default_value;
    std::string help;
};

// Every accepted key with its default.
const std::vector<KeyInfo>& known_keys();

struct IcSpec {
    std::string kind = "bounded_quadratic";   // bounded_quadratic | quadratic | power | constant
    double center = 10.0;
    double coeff = 0.2;
    double cap = 20.0;
    double value = 0.0;
};

struct HamiltonianSection {
    std::vector<double> mu_list;
    double sigma = 0.5;
    double p_max = 0.5;
    std::size_t points = 201;
    double slope_p_min = 1e-3;
    double slope_p_max = 1e-2;
    double slope_tolerance = 0.03;
    double asymptote_mu = 0.3;
    double asymptote_p = 1e-3;
};

struct HjSection {
    std::vector<std::string> rows;
    double t_end = 1e5;
    double t_first = 1.0;
    std::size_t snapshots = 20;
    double diffusion = 0.01;
    double cfl = 0.4;
    double fit_t_min = 1e3;
    double table_p_max = 4.0;
    std::size_t table_points = 801;
    double exponent_tolerance = 0.10;
    double collapse_tolerance = 0.05;
};

struct KineticSection {
    double epsilon = 0.1;
    double t_end = 2.0;
    double age_step = 0.1;
    std::size_t age_nodes = 20;
    std::string arithmetic = "auto";   // auto | linear | log
    std::size_t save_every = 10;
};

struct ConvergeSection {
    double t_end = 2.0;
    double t_min = 0.5, t_max = 2.0, x_min = 2.0, x_max = 18.0;
};

struct McSection {
    std::size_t walkers = 100000;
    double t_end = 1e4;
    std::size_t samples = 41;
    double fit_t_min = 10.0;
    std::string initial_age = "zero";   // zero | uniform
    bool exponential = false;
    double rate = 1.0;
    double exponent_tolerance = 0.05;
    double tail_eps = 0.2;
    double tail_bin = 0.1;
    std::vector<double> tail_x;
};

struct ExperimentConfig {
    std::string command;
    ModelParams model;
    Grid1D grid{0.0, 20.0, 512, true};
    IcSpec ic;
    std::vector<double> eps_list;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    bool plots = false;
    std::size_t workers = 0;
    HamiltonianSection hamiltonian;
    HjSection hj;
    KineticSection kinetic;
    ConvergeSection converge;
    McSection mc;

    // All keys with their resolved values (defaults included), for the manifest.
    std::map<std::string, std::string> resolved;

    // Throws ConfigError naming the origin (file:line) and key.
    static ExperimentConfig from(const KeyValueConfig& kv, const std::string& command);
};

std::vector<double> parse_number_list(const std::string& text);
std::vector<std::string> parse_word_list(const std::string& text);

}  // namespace subfront::harness
