#include "tsgan/augment.hpp"
#include "tsgan/errors.hpp"
#include "tsgan/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace tsgan {

double pooled_sigma(const std::vector<Series>& training) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : training) {
        for (double v : s) sum += v;
        count += s.size();
    }
    if (count == 0) throw ArgumentError("pooled_sigma: no data");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& s : training)
        for (double v : s) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(count));
}

Series noise_augment(const Series& x, double gamma, double sigma, Rng& rng) {
    if (gamma < 0.0 || sigma < 0.0) throw ArgumentError("noise_augment: gamma and sigma must be >= 0");
    if (gamma == 0.0 || sigma == 0.0) return x;
    std::normal_distribution<double> noise(0.0, sigma);
    Series out(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t] + gamma * noise(rng);
    return out;
}

std::size_t nearest_neighbor(const std::vector<Series>& same_class, std::size_t index) {
    if (same_class.size() < 2)
        throw ArgumentError("neighbor-based augmentation needs at least 2 samples in the class");
    if (index >= same_class.size()) throw ArgumentError("nearest_neighbor: index out of range");
    std::size_t best = same_class.size();
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < same_class.size(); ++j) {
        if (j == index) continue;
        const double d = euclidean_distance(same_class[index], same_class[j]);
        if (d < best_distance) {
            best_distance = d;
            best = j;
        }
    }
    return best;
}

Series interpolate_augment(const std::vector<Series>& same_class, std::size_t index, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ArgumentError("interpolate_augment: lambda outside [0,1]");
    const auto& xi = same_class.at(index);
    const auto& xj = same_class[nearest_neighbor(same_class, index)];
    Series out(xi.size());
    for (std::size_t t = 0; t < xi.size(); ++t) out[t] = (1.0 - lambda) * xi[t] + lambda * xj[t];
    return out;
}

Series extrapolate_augment(const std::vector<Series>& same_class, std::size_t index, double lambda) {
    if (lambda < 0.0) throw ArgumentError("extrapolate_augment: lambda must be >= 0");
    const auto& xi = same_class.at(index);
    const auto& xj = same_class[nearest_neighbor(same_class, index)];
    Series out(xi.size());
    for (std::size_t t = 0; t < xi.size(); ++t) out[t] = (1.0 + lambda) * xi[t] - lambda * xj[t];
    return out;
}

double sample_lambda(Rng& rng) {
    std::uniform_int_distribution<int> step(1, 9);
    return step(rng) / 10.0;
}

} // namespace tsgan
