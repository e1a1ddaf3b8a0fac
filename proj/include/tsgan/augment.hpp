#pragma once

#include "tsgan/numerics.hpp"
#include "tsgan/series.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace tsgan {

// Population standard deviation of every point of every series pooled together.
double pooled_sigma(const std::vector<Series>& training);

// x + gamma * xi, xi_t ~ N(0, sigma^2) i.i.d. Output is not clipped.
Series noise_augment(const Series& x, double gamma, double sigma, Rng& rng);

// Index of the Euclidean-nearest member of `same_class`, never `index` itself.
std::size_t nearest_neighbor(const std::vector<Series>& same_class, std::size_t index);

// (1 - lambda) x_i + lambda x_j, x_j the nearest same-class neighbor.
Series interpolate_augment(const std::vector<Series>& same_class, std::size_t index, double lambda);

// (1 + lambda) x_i - lambda x_j.
Series extrapolate_augment(const std::vector<Series>& same_class, std::size_t index, double lambda);

// Uniform draw from {0.1, 0.2, ..., 0.9}.
double sample_lambda(Rng& rng);

struct HmmModel {
    int num_states = 1;   // S
    int num_mixtures = 1; // M per state
    Vector initial;       // pi, S
    Matrix transition;    // A, S x S, rows sum to 1
    Matrix weights;       // S x M mixture weights
    Matrix means;         // S x M
    Matrix variances;     // S x M, > 0

    void validate() const;
    int free_parameters() const;
};

struct HmmFitOptions {
    std::vector<int> state_range = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int num_mixtures = 1;
    int max_iterations = 200;
    double tolerance = 1e-6; // stop when the log-likelihood gains less than this
};

struct HmmFitTrace {
    int num_states = 0;
    std::vector<double> log_likelihood; // one entry per Baum-Welch iteration
    double aic = 0.0;
    bool converged = false;
    bool failed = false; // variance collapse on both attempts
    std::string message;
};

struct HmmFitResult {
    HmmModel model;
    double log_likelihood = 0.0;
    double aic = 0.0;
    std::vector<HmmFitTrace> traces; // one per candidate state count
};

// Baum-Welch for a fixed state count. Throws NumericError if a variance collapses
// below 1e-8 twice (the second attempt starts from a re-jittered initialization).
HmmFitResult hmm_fit_states(const std::vector<Series>& training, int num_states, Rng& rng,
                            const HmmFitOptions& options = {});

// Fits every state count in `options.state_range` and keeps the lowest AIC.
HmmFitResult hmm_fit(const std::vector<Series>& training, Rng& rng,
                     const HmmFitOptions& options = {});

double hmm_log_likelihood(const HmmModel& model, const std::vector<Series>& data);

Series hmm_sample(const HmmModel& model, int length, Rng& rng);

} // namespace tsgan
