#pragma once

#include "tsgan/gan_model.hpp"
#include "tsgan/series.hpp"

#include <string>
#include <vector>

namespace tsgan {

enum class FeatureProfile { ecg, eeg };

FeatureProfile parse_profile(const std::string& name);
std::string to_string(FeatureProfile profile);

struct FeatureVector {
    FeatureProfile profile = FeatureProfile::ecg;
    std::vector<double> values; // ordered as feature_names(profile)

    double operator[](std::size_t k) const { return values[k]; }
};

// ecg: max, argmax, min, argmin, interval, mean_amplitude, mean_frequency (indices 1-based)
// eeg: mean_amplitude, std, median, mean_frequency
const std::vector<std::string>& feature_names(FeatureProfile profile);

FeatureVector extract_features(const Series& x, FeatureProfile profile);

// Spectral centroid sum_k (k/T)|X_k| / sum_k |X_k| over k = 1..floor(T/2) of the
// mean-removed DFT, in cycles per step. Zero when the spectrum is empty.
double mean_frequency(const Series& x);

struct CcaResult {
    Vector correlations;  // rho_k, descending
    Matrix input_weights; // p x K, columns w_x
    Matrix feature_weights; // q x K, columns w_y
    Matrix input_loadings;  // p x K, corr(X_col, u_k)
    Matrix feature_loadings; // q x K, corr(Y_col, v_k)
    Vector input_means;
    Vector feature_means;

    int components() const { return static_cast<int>(correlations.size()); }
    // Canonical variates of new data, N x K each.
    Matrix input_variates(const Matrix& X) const;
    Matrix feature_variates(const Matrix& Y) const;
};

inline constexpr double kCcaRidge = 1e-8;

// Linear CCA. Rows are observations. Columns are standardized, within-set
// correlation matrices get kCcaRidge on the diagonal, and the whitened
// cross-correlation is decomposed by SVD.
CcaResult cca_fit(const Matrix& X, const Matrix& Y);

struct SweepResult {
    Matrix values;              // steps x T
    std::vector<double> alphas; // label blend coefficient per row
    Matrix latent;              // the fixed z, T x d_z
};

// Row k generated with label (1 - a_k) onehot(1) + a_k onehot(2), a_k = k/(steps-1).
SweepResult label_sweep(const GanModel& model, const Matrix& latent, int steps = 100);

// Default grid: 11 points on [0, 2].
std::vector<double> default_scale_grid();

// clamp(s * first input-side loading, [-1, 1]) reshaped to T x d_z (row-major over t).
std::vector<Matrix> control_inputs(const CcaResult& cca, const std::vector<double>& scale_grid,
                                   int length, int latent_dim);

struct ControlRow {
    double scale = 0.0;
    std::vector<double> feature_means;
};

struct ControlTable {
    FeatureProfile profile = FeatureProfile::ecg;
    std::vector<ControlRow> rows;
    std::vector<Series> generated; // one per scale
};

ControlTable control_experiment(const GanModel& model, const CcaResult& cca,
                                const std::vector<double>& scale_grid, int class_label,
                                int samples_per_scale, FeatureProfile profile);

// (z, features) pairs for CCA: N random latents under a fixed class label.
struct LatentFeatureSample {
    Matrix latents;  // N x (T * d_z), flattened t-major
    Matrix features; // N x q
};

LatentFeatureSample sample_latent_features(const GanModel& model, int class_label, int count,
                                           FeatureProfile profile, Rng& rng);

std::string sweep_csv(const SweepResult& sweep);
std::string control_csv(const ControlTable& table);
// One (variable, component, loading) row per input and feature variable.
std::string loadings_csv(const CcaResult& cca, const std::vector<std::string>& input_names,
                         const std::vector<std::string>& feature_names);

} // namespace tsgan
