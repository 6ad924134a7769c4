#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "subfront/config.hpp"
#include "subfront/kinetic.hpp"

namespace subfront::harness {

// One pass/fail (or report-only) line of a command.
struct Assertion {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool upper = true;      // measured <= bound if upper, measured >= bound otherwise
    bool asserted = true;

    double margin() const { return upper ? bound - measured : measured - bound; }
    bool pass() const { return !asserted || margin() >= 0.0; }
};

struct OutputFile {
    std::string path;       // relative to the output directory
    std::size_t bytes = 0;
    std::string sha256;
};

struct CommandResult {
    std::vector<Assertion> assertions;
    std::vector<OutputFile> files;
    double wall_seconds = 0.0;
    bool all_pass() const;
};

inline constexpr const char* kCommands[] = {"hamiltonian", "hj", "kinetic", "converge", "mc", "validate"};
bool is_command(const std::string& name);

// Kinetic initial data from the ic.* keys; the power profile uses the exponent 2/(2-mu).
kinetic::InitialCondition make_initial_condition(const ExperimentConfig& c);

// Runs the command, writes its files and manifest.json into c.out_dir, and prints one line
// per assertion to `log`. Numerical failures propagate as exceptions.
CommandResult run_command(const ExperimentConfig& c, std::ostream& log);

// Exit codes of the command-line front end.
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Full front end: argv[1] is the command, then --config FILE [--plots] [--out DIR] [--seed N]
// and --key=value overrides of any config key.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace subfront::harness
