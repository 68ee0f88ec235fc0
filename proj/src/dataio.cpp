#include "qru/dataio.hpp"

#include "qru/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace qru {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void data_error(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view cell, std::size_t line, std::string_view column) {
    cell = trim(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        data_error(line, "column '" + std::string(column) + "' is not a finite number: '" + std::string(cell) + "'");
    }
    return v;
}

void format_real(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

} // namespace

double Normalization::apply(std::size_t feature, double value) const {
    const double fmin = feature_min.at(feature);
    const double fmax = feature_max.at(feature);
    if (fmax == fmin) {
        return 0.5 * (lo + hi);
    }
    const double t = (value - fmin) / (fmax - fmin);
    const double mapped = t == 1.0 ? hi : lo + t * (hi - lo);
    return std::clamp(mapped, lo, hi);
}

Dataset read_records(std::istream& in, int n_classes) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("line 1: missing header, expected '" + std::string(kCsvHeader) + "'");
    }
    std::string_view header = trim(line);
    if (header.substr(0, 3) == "\xEF\xBB\xBF") {
        header.remove_prefix(3);
    }
    if (header != kCsvHeader) {
        throw DataError("line 1: header must be '" + std::string(kCsvHeader) + "', got '" + std::string(header) + "'");
    }
    static constexpr std::array<std::string_view, 3> kColumns{"ecal_energy", "shower_length", "hcal_std"};

    Dataset ds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) {
            continue;
        }
        const auto fields = split_fields(row);
        if (fields.size() != 1 + kColumns.size()) {
            data_error(line_no, "expected " + std::to_string(1 + kColumns.size()) + " columns, found " +
                                    std::to_string(fields.size()));
        }
        const std::string_view label_cell = trim(fields[0]);
        int label = -1;
        const auto [ptr, ec] = std::from_chars(label_cell.data(), label_cell.data() + label_cell.size(), label);
        if (label_cell.empty() || ec != std::errc{} || ptr != label_cell.data() + label_cell.size()) {
            data_error(line_no, "label is not an integer: '" + std::string(label_cell) + "'");
        }
        if (label < 0 || label >= n_classes) {
            data_error(line_no, "unknown label " + std::to_string(label) + " (expected 0.." +
                                    std::to_string(n_classes - 1) + ")");
        }
        Record r{label, {}};
        r.features.reserve(kColumns.size());
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            r.features.push_back(parse_real(fields[c + 1], line_no, kColumns[c]));
        }
        ds.records.push_back(std::move(r));
    }
    return ds;
}

Dataset load_records(const std::filesystem::path& path, int n_classes) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return read_records(in, n_classes);
}

void write_records(std::ostream& out, const Dataset& ds) {
    out << kCsvHeader << '\n';
    for (const Record& r : ds.records) {
        if (r.features.size() != kCalorimeterFeatures) {
            throw DataError("write_records: record with " + std::to_string(r.features.size()) +
                            " features, CSV format holds " + std::to_string(kCalorimeterFeatures));
        }
        out << r.label;
        for (double v : r.features) {
            out << ',';
            format_real(out, v);
        }
        out << '\n';
    }
}

void write_records(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_records(out, ds);
}

Dataset normalize(const Dataset& ds, double lo, double hi) {
    if (ds.normalization) {
        throw StateError("dataset is already normalized");
    }
    if (!(lo < hi)) {
        throw InvalidInput("normalization range needs lo < hi");
    }
    if (ds.empty()) {
        throw InvalidInput("cannot fit a normalization on an empty dataset");
    }
    const std::size_t nf = ds.n_features();
    Normalization norm{lo, hi, std::vector<double>(nf, std::numeric_limits<double>::infinity()),
                       std::vector<double>(nf, -std::numeric_limits<double>::infinity())};
    for (const Record& r : ds.records) {
        if (r.features.size() != nf) {
            throw DataError("records disagree on feature count");
        }
        for (std::size_t j = 0; j < nf; ++j) {
            norm.feature_min[j] = std::min(norm.feature_min[j], r.features[j]);
            norm.feature_max[j] = std::max(norm.feature_max[j], r.features[j]);
        }
    }
    return apply_normalization(ds, norm);
}

Dataset apply_normalization(const Dataset& ds, const Normalization& norm) {
    if (ds.normalization) {
        throw StateError("dataset is already normalized");
    }
    Dataset out;
    out.normalization = norm;
    out.records.reserve(ds.size());
    for (const Record& r : ds.records) {
        if (r.features.size() != norm.feature_min.size()) {
            throw DataError("record feature count does not match the normalization");
        }
        Record m{r.label, std::vector<double>(r.features.size())};
        for (std::size_t j = 0; j < r.features.size(); ++j) {
            m.features[j] = norm.apply(j, r.features[j]);
        }
        out.records.push_back(std::move(m));
    }
    return out;
}

std::pair<Dataset, Dataset> split_shuffle(const Dataset& ds, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw InvalidInput("split ratio must lie in (0, 1)");
    }
    if (ds.empty()) {
        throw InvalidInput("cannot split an empty dataset");
    }
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(order[i], order[pick(rng)]);
    }
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ds.size())));
    Dataset train{{}, ds.normalization};
    Dataset test{{}, ds.normalization};
    train.records.reserve(n_train);
    test.records.reserve(ds.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? train : test).records.push_back(ds.records[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

SynthConfig SynthConfig::defaults() {
    SynthConfig cfg;
    // electron: high ECAL energy, short shower; muon: low energy, long shower;
    // pion: intermediate energy with a wide HCAL spread. The HCAL column keeps
    // electrons and muons off each other's mirror image on symmetric ranges.
    cfg.class_means = {{{55.0, 20.0, 4.0}, {10.0, 45.0, 4.0}, {30.0, 12.0, 40.0}}};
    cfg.spread = 4.0;
    cfg.overlap = 0.0;
    return cfg;
}

Dataset generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
    if (cfg.n_per_class < 1) {
        throw InvalidInput("n_per_class must be positive");
    }
    if (!(cfg.spread > 0.0) || !(cfg.overlap >= 0.0)) {
        throw InvalidInput("spread must be positive and overlap non-negative");
    }
    std::mt19937_64 rng(seed);
    const double sd = cfg.spread * (1.0 + cfg.overlap);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset ds;
    ds.records.reserve(static_cast<std::size_t>(cfg.n_per_class) * cfg.class_means.size());
    for (std::size_t c = 0; c < cfg.class_means.size(); ++c) {
        for (int i = 0; i < cfg.n_per_class; ++i) {
            Record r{static_cast<int>(c), std::vector<double>(kCalorimeterFeatures)};
            for (std::size_t j = 0; j < kCalorimeterFeatures; ++j) {
                r.features[j] = cfg.class_means[c][j] + sd * noise(rng);
            }
            ds.records.push_back(std::move(r));
        }
    }
    return ds;
}

} // namespace qru
