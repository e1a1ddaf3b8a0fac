#pragma once

#include "tsgan/series.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace tsgan {

struct Dataset {
    std::vector<Series> series;
    std::vector<int> labels;              // 1..C, parallel to series
    std::vector<std::string> label_names; // original label token of class k at index k-1
    int length = 0;                       // T
    int num_classes = 0;                  // C
    double norm_min = 0.0;                // raw-data bounds used by normalize_minmax
    double norm_max = 1.0;
    bool normalized = false;

    std::size_t size() const { return series.size(); }
    bool empty() const { return series.empty(); }

    std::vector<Series> class_members(int cls) const;
    std::vector<std::size_t> class_indices(int cls) const;
    std::size_t class_count(int cls) const;

    // Throws ArgumentError when lengths or labels are inconsistent.
    void validate() const;
};

// UCR convention: one row per series, label first, comma/tab/space separated.
// Labels are remapped to 1..C in ascending numeric order of the original codes.
Dataset load_ucr(const std::filesystem::path& path);
Dataset parse_ucr(const std::string& text, const std::string& source_name = "<memory>");

// Writes labels using `label_names` when present, values at full round-trip precision.
void write_ucr(const Dataset& dataset, const std::filesystem::path& path);
std::string format_ucr(const Dataset& dataset);

// Global min/max over every point of every series mapped to [0,1].
// A constant dataset maps to 0.5 (a warning is logged).
Dataset normalize_minmax(const Dataset& raw);
Series denormalize(const Series& x, double norm_min, double norm_max);

// Uniform subset without replacement, deterministic given the seed.
Dataset subsample_training(const Dataset& dataset, std::size_t total, std::uint64_t seed);
// `per_class[k]` samples from class k+1.
Dataset subsample_training(const Dataset& dataset, const std::vector<std::size_t>& per_class,
                           std::uint64_t seed);

// Writes `contents` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace tsgan
