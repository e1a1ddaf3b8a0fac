#pragma once

#include "tsgan/dataset.hpp"
#include "tsgan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace tsgan::testing {

// Two classes of length-16 series: class 1 noisy sinusoids, class 2 noisy ramps.
inline Dataset make_toy_dataset(int per_class = 128, std::uint64_t seed = 11, int length = 16) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.03);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    Dataset raw;
    raw.length = length;
    raw.num_classes = 2;
    raw.label_names = {"1", "2"};
    for (int cls = 1; cls <= 2; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            Series s(static_cast<std::size_t>(length));
            const double phase = 0.25 * jitter(rng);
            const double amp = 1.0 + 0.1 * jitter(rng);
            const double offset = 0.1 * jitter(rng);
            for (int t = 0; t < length; ++t) {
                const double u = static_cast<double>(t) / (length - 1);
                const double clean = cls == 1
                    ? amp * std::sin(2.0 * std::numbers::pi * t / length + phase)
                    : amp * (2.0 * u - 1.0);
                s[static_cast<std::size_t>(t)] = clean + offset + noise(rng);
            }
            raw.series.push_back(std::move(s));
            raw.labels.push_back(cls);
        }
    }
    return normalize_minmax(raw);
}

struct GradientCheck {
    double max_rel_error = 0.0;
    std::string worst_block;
    std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor); the floor keeps entries that are zero up to
// finite-difference noise from dominating.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central differences of `loss` against every entry of `params`, compared with
// `analytic` (same block layout).
inline GradientCheck check_gradients(const std::vector<ParamBlock>& params,
                                     const std::vector<ParamBlock>& analytic,
                                     const std::function<double()>& loss, double step = 1e-5) {
    GradientCheck out;
    for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].values.size(); ++i) {
            double& w = params[b].values[i];
            const double saved = w;
            w = saved + step;
            const double up = loss();
            w = saved - step;
            const double down = loss();
            w = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double err = relative_error(analytic[b].values[i], numeric);
            if (err > out.max_rel_error) {
                out.max_rel_error = err;
                out.worst_block = params[b].name + "[" + std::to_string(i) + "]";
            }
            ++out.checked;
        }
    }
    return out;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

inline SequenceBatch random_sequence(int steps, Eigen::Index dim, Eigen::Index batch, Rng& rng) {
    SequenceBatch out;
    for (int t = 0; t < steps; ++t) out.push_back(random_matrix(dim, batch, rng));
    return out;
}

// Random parameters at a scale where every gate is far from saturation.
inline void randomize(LstmStack& stack, Rng& rng, double scale = 0.5) {
    for (auto& p : stack.layers) {
        p.input_weights = random_matrix(p.input_weights.rows(), p.input_weights.cols(), rng, scale);
        p.recurrent_weights =
            random_matrix(p.recurrent_weights.rows(), p.recurrent_weights.cols(), rng, scale);
        p.biases = random_matrix(p.biases.size(), 1, rng, scale);
    }
}

// Minimum over every monotone warping path, enumerated explicitly. The running
// sum is accumulated from (0,0) forward.
inline double brute_force_dtw(const Series& q, const Series& c) {
    const std::size_t n = q.size(), m = c.size();
    auto cost = [&](std::size_t i, std::size_t j) {
        const double d = q[i] - c[j];
        return d * d;
    };
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j,
                                                                     double sum) {
        if (i == n - 1 && j == m - 1) {
            best = std::min(best, sum);
            return;
        }
        if (i + 1 < n) walk(i + 1, j, sum + cost(i + 1, j));
        if (j + 1 < m) walk(i, j + 1, sum + cost(i, j + 1));
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, sum + cost(i + 1, j + 1));
    };
    walk(0, 0, cost(0, 0));
    return std::sqrt(best);
}

inline Series random_series(std::size_t length, Rng& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Series s(length);
    for (auto& v : s) v = dist(rng);
    return s;
}

} // namespace tsgan::testing
