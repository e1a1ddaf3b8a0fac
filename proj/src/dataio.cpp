#include "tsgan/dataset.hpp"
#include "tsgan/errors.hpp"
#include "tsgan/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace tsgan {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_field = false;
    for (char ch : line) {
        if (ch == ',' || ch == '\t' || ch == ' ' || ch == '\r') {
            // Commas delimit even empty fields; runs of whitespace do not.
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
                in_field = false;
            } else if (in_field) {
                out.push_back(cur);
                cur.clear();
                in_field = false;
            }
        } else {
            cur += ch;
            in_field = true;
        }
    }
    if (in_field || (!line.empty() && line.back() == ',')) out.push_back(cur);
    return out;
}

bool parse_double(const std::string& token, double& value) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(value);
}

std::string format_value(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::vector<Series> Dataset::class_members(int cls) const {
    std::vector<Series> out;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (labels[i] == cls) out.push_back(series[i]);
    return out;
}

std::vector<std::size_t> Dataset::class_indices(int cls) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (labels[i] == cls) out.push_back(i);
    return out;
}

std::size_t Dataset::class_count(int cls) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), cls));
}

void Dataset::validate() const {
    if (series.size() != labels.size()) throw ArgumentError("dataset: series/label count mismatch");
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (static_cast<int>(series[i].size()) != length)
            throw ArgumentError("dataset: series " + std::to_string(i + 1) + " has length " +
                                std::to_string(series[i].size()) + ", expected " +
                                std::to_string(length));
        if (labels[i] < 1 || labels[i] > num_classes)
            throw ArgumentError("dataset: label of series " + std::to_string(i + 1) + " outside 1.." +
                                std::to_string(num_classes));
    }
}

Dataset parse_ucr(const std::string& text, const std::string& source_name) {
    std::istringstream in(text);
    std::vector<double> raw_labels;
    std::vector<std::size_t> line_numbers;
    Dataset ds;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        const auto where = source_name + ":" + std::to_string(line_no) + ": ";
        if (fields.size() < 2) throw ParseError(where + "row has a label but no values");

        double label = 0.0;
        if (!parse_double(fields[0], label) || label != std::round(label))
            throw ParseError(where + "label '" + fields[0] + "' is not an integer");
        Series values(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            if (!parse_double(fields[k], values[k - 1]))
                throw ParseError(where + "field " + std::to_string(k + 1) + " ('" + fields[k] +
                                 "') is not a finite number");
        }
        if (ds.series.empty()) {
            ds.length = static_cast<int>(values.size());
        } else if (static_cast<int>(values.size()) != ds.length) {
            throw ParseError(where + "row " + std::to_string(ds.series.size() + 1) + " has " +
                             std::to_string(values.size()) + " values, expected " +
                             std::to_string(ds.length));
        }
        ds.series.push_back(std::move(values));
        raw_labels.push_back(label);
        line_numbers.push_back(line_no);
    }
    if (ds.series.empty()) throw ParseError(source_name + ": no data rows");

    std::vector<double> codes = raw_labels;
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    std::map<double, int> remap;
    for (std::size_t k = 0; k < codes.size(); ++k) {
        remap[codes[k]] = static_cast<int>(k + 1);
        ds.label_names.push_back(std::to_string(static_cast<long long>(codes[k])));
    }
    ds.num_classes = static_cast<int>(codes.size());
    ds.labels.reserve(raw_labels.size());
    for (double l : raw_labels) ds.labels.push_back(remap[l]);
    ds.norm_min = 0.0;
    ds.norm_max = 1.0;
    ds.normalized = false;
    return ds;
}

Dataset load_ucr(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ucr(buf.str(), path.string());
}

std::string format_ucr(const Dataset& dataset) {
    dataset.validate();
    std::string out;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const int cls = dataset.labels[i];
        out += static_cast<std::size_t>(cls) <= dataset.label_names.size()
                   ? dataset.label_names[static_cast<std::size_t>(cls - 1)]
                   : std::to_string(cls);
        for (double v : dataset.series[i]) {
            out += '\t';
            out += format_value(v);
        }
        out += '\n';
    }
    return out;
}

void write_ucr(const Dataset& dataset, const std::filesystem::path& path) {
    write_file_atomic(path, format_ucr(dataset));
}

Dataset normalize_minmax(const Dataset& raw) {
    if (raw.empty()) throw ArgumentError("normalize_minmax: dataset is empty");
    double lo = raw.series.front().front();
    double hi = lo;
    for (const auto& s : raw.series)
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    Dataset out = raw;
    out.norm_min = lo;
    out.norm_max = hi;
    out.normalized = true;
    if (hi == lo) {
        std::cerr << "warning: dataset is constant (" << lo << "); normalized values set to 0.5\n";
        for (auto& s : out.series) std::fill(s.begin(), s.end(), 0.5);
        return out;
    }
    const double span = hi - lo;
    for (auto& s : out.series)
        for (double& v : s) v = (v - lo) / span;
    return out;
}

Series denormalize(const Series& x, double norm_min, double norm_max) {
    Series out(x.size());
    const double span = norm_max - norm_min;
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t] * span + norm_min;
    return out;
}

namespace {

Dataset take(const Dataset& ds, std::vector<std::size_t> picks) {
    std::sort(picks.begin(), picks.end());
    Dataset out = ds;
    out.series.clear();
    out.labels.clear();
    for (auto i : picks) {
        out.series.push_back(ds.series[i]);
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

} // namespace

Dataset subsample_training(const Dataset& dataset, std::size_t total, std::uint64_t seed) {
    if (total > dataset.size())
        throw ArgumentError("subsample_training: requested " + std::to_string(total) +
                            " samples but only " + std::to_string(dataset.size()) + " exist");
    Rng rng(seed);
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(total);
    return take(dataset, std::move(idx));
}

Dataset subsample_training(const Dataset& dataset, const std::vector<std::size_t>& per_class,
                           std::uint64_t seed) {
    if (static_cast<int>(per_class.size()) != dataset.num_classes)
        throw ArgumentError("subsample_training: " + std::to_string(per_class.size()) +
                            " per-class counts given for " + std::to_string(dataset.num_classes) +
                            " classes");
    Rng rng(seed);
    std::vector<std::size_t> picks;
    for (int cls = 1; cls <= dataset.num_classes; ++cls) {
        auto idx = dataset.class_indices(cls);
        const auto want = per_class[static_cast<std::size_t>(cls - 1)];
        if (want > idx.size())
            throw ArgumentError("subsample_training: class " + std::to_string(cls) + " has " +
                                std::to_string(idx.size()) + " samples, " + std::to_string(want) +
                                " requested");
        std::shuffle(idx.begin(), idx.end(), rng);
        picks.insert(picks.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want));
    }
    return take(dataset, std::move(picks));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        os << contents;
        os.flush();
        if (!os) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace tsgan
