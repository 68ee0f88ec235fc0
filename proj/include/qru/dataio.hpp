#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace qru {

inline constexpr std::string_view kCsvHeader = "label,ecal_energy,shower_length,hcal_std";
inline constexpr int kDefaultClassCount = 3;
inline constexpr std::size_t kCalorimeterFeatures = 3;

/// One labeled event. Labels: 0 electron, 1 muon, 2 pion. Calorimeter
/// features are ECAL total energy, shower length and HCAL deposit spread.
struct Record {
    int label = 0;
    std::vector<double> features;

    bool operator==(const Record&) const = default;
};

/// Per-feature min-max map onto [lo, hi], fitted on one dataset and reusable on others.
struct Normalization {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> feature_min;
    std::vector<double> feature_max;

    /// Maps a raw value; results outside [lo, hi] are clipped.
    double apply(std::size_t feature, double value) const;
};

struct Dataset {
    std::vector<Record> records;
    std::optional<Normalization> normalization;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::size_t n_features() const { return records.empty() ? 0 : records.front().features.size(); }
};

/// Parses the calorimeter CSV. Row order is preserved; errors name the line.
Dataset load_records(const std::filesystem::path& path, int n_classes = kDefaultClassCount);
Dataset read_records(std::istream& in, int n_classes = kDefaultClassCount);

/// Writes the CSV format with 17 significant digits.
void write_records(std::ostream& out, const Dataset& ds);
void write_records(const std::filesystem::path& path, const Dataset& ds);

/// Fits a min-max normalization on ds and applies it. Constant features map
/// to (lo + hi) / 2. Throws StateError if ds is already normalized.
Dataset normalize(const Dataset& ds, double lo, double hi);

/// Applies a previously fitted normalization (e.g. train statistics to test data).
Dataset apply_normalization(const Dataset& ds, const Normalization& norm);

/// Seeded Fisher-Yates shuffle, then the first floor(ratio * N) records go to train.
std::pair<Dataset, Dataset> split_shuffle(const Dataset& ds, double ratio, std::uint64_t seed);

struct SynthConfig {
    int n_per_class = 500;
    std::array<std::array<double, kCalorimeterFeatures>, kDefaultClassCount> class_means{};
    double spread = 1.0;
    double overlap = 0.0;

    static SynthConfig defaults();
};

/// Class-major synthetic calorimeter records: n_per_class Gaussian draws per class
/// around its feature means with standard deviation spread * (1 + overlap).
Dataset generate_synthetic(const SynthConfig& cfg, std::uint64_t seed);

} // namespace qru
