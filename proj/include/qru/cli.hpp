#pragma once

#include "qru/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qru::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

/// Everything a training run needs besides the data itself.
struct RunConfig {
    TrainConfig train;
    double norm_lo;
    double norm_hi;
    double split_ratio = 0.8;

    RunConfig();
};

/// Flat `key = value` text; `#` starts a comment. Unknown keys and malformed
/// values raise InvalidInput naming the line.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one key; used by the parser and by sweeps.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical key-value rendering; parse_config(render_config(c)) reproduces c.
std::string render_config(const RunConfig& cfg);

/// Parses a real, accepting `pi`, `-pi`, `2pi` and `<k>pi` shorthands.
double parse_real_token(const std::string& token);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace qru::cli

namespace qru {
struct Dataset;
}

namespace qru::cli {

/// Split with `seed`, normalize on the train part, then train with the same seed.
TrainReport train_on(const RunConfig& cfg, const Dataset& raw, std::uint64_t seed);

struct VariabilityResult {
    std::vector<std::uint64_t> seeds;
    std::vector<TrainReport> runs;
    double mean_test_acc = 0.0;
    double std_test_acc = 0.0;
    double mean_test_loss = 0.0;
    double std_test_loss = 0.0;
};

/// n_runs trainings with reshuffled splits and Gaussian parameter init; run r
/// uses seed + r unless same_seed is set. Spreads are sample standard deviations.
VariabilityResult variability_study(const RunConfig& base, const Dataset& raw, int n_runs, std::uint64_t seed,
                                    bool same_seed = false, int threads = 1);

std::string variability_csv(const VariabilityResult& result);

/// Applies a sweep value to a named dimension: depth, lr, batch_size,
/// optimizer, loss, normalization, scheme, ppi or epochs.
void apply_dimension(RunConfig& cfg, const std::string& dim, const std::string& value);

} // namespace qru::cli
