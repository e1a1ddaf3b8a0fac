#include "tsgan/analysis.hpp"
#include "tsgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace tsgan {

FeatureProfile parse_profile(const std::string& name) {
    if (name == "ecg") return FeatureProfile::ecg;
    if (name == "eeg") return FeatureProfile::eeg;
    throw ArgumentError("unknown feature profile '" + name + "' (expected ecg or eeg)");
}

std::string to_string(FeatureProfile profile) { return profile == FeatureProfile::ecg ? "ecg" : "eeg"; }

const std::vector<std::string>& feature_names(FeatureProfile profile) {
    static const std::vector<std::string> ecg = {"max",      "argmax",         "min",
                                                 "argmin",   "interval",       "mean_amplitude",
                                                 "mean_frequency"};
    static const std::vector<std::string> eeg = {"mean_amplitude", "std", "median", "mean_frequency"};
    return profile == FeatureProfile::ecg ? ecg : eeg;
}

double mean_frequency(const Series& x) {
    const std::size_t T = x.size();
    if (T < 2) throw ArgumentError("mean_frequency: series needs at least 2 points");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(T);
    double scale = 0.0;
    for (double v : x) scale += std::abs(v);

    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t k = 1; k <= T / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(k * t % T) / static_cast<double>(T);
            acc += (x[t] - mean) * std::polar(1.0, phase);
        }
        const double mag = std::abs(acc);
        weighted += static_cast<double>(k) / static_cast<double>(T) * mag;
        total += mag;
    }
    // Rounding residue of a constant series is not a spectrum.
    if (total <= 1e-10 * std::max(scale, 1e-300)) return 0.0;
    return weighted / total;
}

FeatureVector extract_features(const Series& x, FeatureProfile profile) {
    if (x.size() < 2) throw ArgumentError("extract_features: series needs at least 2 points");
    const auto n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    FeatureVector out;
    out.profile = profile;
    if (profile == FeatureProfile::ecg) {
        const auto max_it = std::max_element(x.begin(), x.end());
        const auto min_it = std::min_element(x.begin(), x.end());
        const auto argmax = static_cast<double>(max_it - x.begin() + 1);
        const auto argmin = static_cast<double>(min_it - x.begin() + 1);
        out.values = {*max_it, argmax, *min_it, argmin, std::abs(argmax - argmin), mean,
                      mean_frequency(x)};
    } else {
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        Series sorted = x;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        out.values = {mean, std::sqrt(ss / n), median, mean_frequency(x)};
    }
    return out;
}

namespace {

Matrix inverse_sqrt(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector inv = eig.eigenvalues().cwiseMax(kCcaRidge).cwiseSqrt().cwiseInverse();
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double pearson(const Vector& a, const Vector& b) {
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    const double den = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
    return den > 0.0 ? ac.dot(bc) / den : 0.0;
}

struct Standardized {
    Matrix data;  // centered and scaled, zero-variance columns left at 0
    Vector means;
    Vector scales; // sample standard deviation, 0 for constant columns
};

Standardized standardize(const Matrix& M, const char* side) {
    Standardized s;
    const auto N = static_cast<double>(M.rows());
    s.means = M.colwise().mean().transpose();
    s.data = M.rowwise() - s.means.transpose();
    s.scales.resize(M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double sd = std::sqrt(s.data.col(j).squaredNorm() / (N - 1.0));
        if (sd > 0.0 && std::isfinite(sd)) {
            s.scales[j] = sd;
            s.data.col(j) /= sd;
        } else {
            s.scales[j] = 0.0;
            s.data.col(j).setZero();
            std::cerr << "warning: cca: " << side << " column " << j + 1
                      << " has zero variance; its loading is reported as 0\n";
        }
    }
    return s;
}

} // namespace

Matrix CcaResult::input_variates(const Matrix& X) const {
    return (X.rowwise() - input_means.transpose()) * input_weights;
}

Matrix CcaResult::feature_variates(const Matrix& Y) const {
    return (Y.rowwise() - feature_means.transpose()) * feature_weights;
}

CcaResult cca_fit(const Matrix& X, const Matrix& Y) {
    if (X.rows() != Y.rows()) throw ShapeError("cca_fit: X and Y have different row counts");
    if (X.rows() < 2 || X.cols() < 1 || Y.cols() < 1) throw ShapeError("cca_fit: need >= 2 rows and >= 1 column");
    if (!X.allFinite() || !Y.allFinite()) throw NumericError("cca_fit: non-finite input");

    const auto N = static_cast<double>(X.rows());
    const auto p = X.cols();
    const auto q = Y.cols();
    const auto xs = standardize(X, "input");
    const auto ys = standardize(Y, "feature");

    const Matrix rxx = xs.data.transpose() * xs.data / (N - 1.0) + kCcaRidge * Matrix::Identity(p, p);
    const Matrix ryy = ys.data.transpose() * ys.data / (N - 1.0) + kCcaRidge * Matrix::Identity(q, q);
    const Matrix rxy = xs.data.transpose() * ys.data / (N - 1.0);
    const Matrix wx_half = inverse_sqrt(rxx);
    const Matrix wy_half = inverse_sqrt(ryy);

    Eigen::JacobiSVD<Matrix> svd(wx_half * rxy * wy_half, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index K = std::min(p, q);

    Matrix a = wx_half * svd.matrixU().leftCols(K);
    Matrix b = wy_half * svd.matrixV().leftCols(K);
    Matrix u = xs.data * a;
    Matrix v = ys.data * b;

    Vector rho(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double su = std::sqrt(u.col(k).squaredNorm() / (N - 1.0));
        const double sv = std::sqrt(v.col(k).squaredNorm() / (N - 1.0));
        if (su > 0.0) {
            a.col(k) /= su;
            u.col(k) /= su;
        }
        if (sv > 0.0) {
            b.col(k) /= sv;
            v.col(k) /= sv;
        }
        double r = pearson(u.col(k), v.col(k));
        if (r < 0.0) {
            b.col(k) = -b.col(k);
            v.col(k) = -v.col(k);
            r = -r;
        }
        rho[k] = std::clamp(r, 0.0, 1.0);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return rho[i] > rho[j]; });

    CcaResult out;
    out.correlations.resize(K);
    out.input_weights.resize(p, K);
    out.feature_weights.resize(q, K);
    out.input_loadings.resize(p, K);
    out.feature_loadings.resize(q, K);
    out.input_means = xs.means;
    out.feature_means = ys.means;
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.correlations[k] = rho[src];
        for (Eigen::Index i = 0; i < p; ++i) {
            out.input_weights(i, k) = xs.scales[i] > 0.0 ? a(i, src) / xs.scales[i] : 0.0;
            out.input_loadings(i, k) = xs.scales[i] > 0.0 ? std::clamp(pearson(xs.data.col(i), u.col(src)), -1.0, 1.0) : 0.0;
        }
        for (Eigen::Index j = 0; j < q; ++j) {
            out.feature_weights(j, k) = ys.scales[j] > 0.0 ? b(j, src) / ys.scales[j] : 0.0;
            out.feature_loadings(j, k) = ys.scales[j] > 0.0 ? std::clamp(pearson(ys.data.col(j), v.col(src)), -1.0, 1.0) : 0.0;
        }
    }
    return out;
}

SweepResult label_sweep(const GanModel& model, const Matrix& latent, int steps) {
    if (model.meta.num_classes != 2)
        throw ArgumentError("label_sweep supports exactly 2 classes, model has " +
                            std::to_string(model.meta.num_classes));
    if (steps < 2) throw ArgumentError("label_sweep: steps must be >= 2");
    const int T = model.meta.length;
    if (latent.rows() != T || latent.cols() != model.meta.latent_dim)
        throw ShapeError("label_sweep: latent must be T x d_z");

    SweepResult out;
    out.latent = latent;
    std::vector<Matrix> latents(static_cast<std::size_t>(steps), latent);
    std::vector<LabelSequence> labels;
    for (int k = 0; k < steps; ++k) {
        const double alpha = static_cast<double>(k) / static_cast<double>(steps - 1);
        out.alphas.push_back(alpha);
        labels.push_back(LabelSequence::blend(alpha, T));
    }
    const auto pass = generator_forward_batch(model.generator, to_sequence_batch(latents),
                                              labels_batch(labels));
    out.values = pass.outputs.transpose();
    return out;
}

std::vector<double> default_scale_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(0.2 * k);
    return grid;
}

std::vector<Matrix> control_inputs(const CcaResult& cca, const std::vector<double>& scale_grid,
                                   int length, int latent_dim) {
    if (cca.components() < 1) throw ArgumentError("control_inputs: CCA has no components");
    if (cca.input_loadings.rows() != static_cast<Eigen::Index>(length) * latent_dim)
        throw ShapeError("control_inputs: input loadings have " +
                         std::to_string(cca.input_loadings.rows()) + " entries, expected T*d_z = " +
                         std::to_string(length * latent_dim));
    std::vector<Matrix> out;
    for (double s : scale_grid) {
        if (!std::isfinite(s)) throw ArgumentError("control_inputs: non-finite scale");
        Matrix z(length, latent_dim);
        for (int t = 0; t < length; ++t)
            for (int k = 0; k < latent_dim; ++k)
                z(t, k) = std::clamp(s * cca.input_loadings(t * latent_dim + k, 0), -1.0, 1.0);
        out.push_back(std::move(z));
    }
    return out;
}

ControlTable control_experiment(const GanModel& model, const CcaResult& cca,
                                const std::vector<double>& scale_grid, int class_label,
                                int samples_per_scale, FeatureProfile profile) {
    if (samples_per_scale < 1) throw ArgumentError("control_experiment: samples_per_scale must be >= 1");
    const int T = model.meta.length;
    const auto inputs = control_inputs(cca, scale_grid, T, model.meta.latent_dim);
    const auto label = LabelSequence::one_hot(class_label, model.meta.num_classes, T);

    ControlTable table;
    table.profile = profile;
    const std::size_t q = feature_names(profile).size();
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        // The generator is deterministic given (z, c), so repeated samples coincide;
        // the mean is still taken to keep the table shape independent of that.
        ControlRow row;
        row.scale = scale_grid[k];
        row.feature_means.assign(q, 0.0);
        Series generated;
        for (int r = 0; r < samples_per_scale; ++r) {
            generated = generator_forward(model.generator, inputs[k], label);
            const auto f = extract_features(generated, profile);
            for (std::size_t j = 0; j < q; ++j) row.feature_means[j] += f[j] / samples_per_scale;
        }
        table.generated.push_back(std::move(generated));
        table.rows.push_back(std::move(row));
    }
    return table;
}

LatentFeatureSample sample_latent_features(const GanModel& model, int class_label, int count,
                                           FeatureProfile profile, Rng& rng) {
    if (count < 2) throw ArgumentError("sample_latent_features: count must be >= 2");
    const int T = model.meta.length;
    const int dz = model.meta.latent_dim;
    const auto label = LabelSequence::one_hot(class_label, model.meta.num_classes, T);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    LatentFeatureSample out;
    out.latents.resize(count, T * dz);
    out.features.resize(count, static_cast<Eigen::Index>(feature_names(profile).size()));
    constexpr int kChunk = 256;
    for (int start = 0; start < count; start += kChunk) {
        const int n = std::min(kChunk, count - start);
        std::vector<Matrix> latents;
        for (int i = 0; i < n; ++i) {
            Matrix z(T, dz);
            for (int t = 0; t < T; ++t)
                for (int k = 0; k < dz; ++k) {
                    z(t, k) = uniform(rng);
                    out.latents(start + i, t * dz + k) = z(t, k);
                }
            latents.push_back(std::move(z));
        }
        const auto pass = generator_forward_batch(
            model.generator, to_sequence_batch(latents),
            labels_batch(std::vector<LabelSequence>(static_cast<std::size_t>(n), label)));
        for (int i = 0; i < n; ++i) {
            const Vector col = pass.outputs.col(i);
            const auto f = extract_features(Series(col.data(), col.data() + col.size()), profile);
            for (std::size_t j = 0; j < f.values.size(); ++j)
                out.features(start + i, static_cast<Eigen::Index>(j)) = f[j];
        }
    }
    return out;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream os;
    os.precision(17);
    os << "alpha";
    for (Eigen::Index t = 0; t < sweep.values.cols(); ++t) os << ",t" << t + 1;
    os << '\n';
    for (Eigen::Index k = 0; k < sweep.values.rows(); ++k) {
        os << sweep.alphas[static_cast<std::size_t>(k)];
        for (Eigen::Index t = 0; t < sweep.values.cols(); ++t) os << ',' << sweep.values(k, t);
        os << '\n';
    }
    return os.str();
}

std::string control_csv(const ControlTable& table) {
    std::ostringstream os;
    os.precision(17);
    os << "scale";
    for (const auto& name : feature_names(table.profile)) os << ',' << name;
    os << '\n';
    for (const auto& row : table.rows) {
        os << row.scale;
        for (double v : row.feature_means) os << ',' << v;
        os << '\n';
    }
    return os.str();
}

std::string loadings_csv(const CcaResult& cca, const std::vector<std::string>& input_names,
                         const std::vector<std::string>& feature_names_) {
    if (static_cast<Eigen::Index>(input_names.size()) != cca.input_loadings.rows() ||
        static_cast<Eigen::Index>(feature_names_.size()) != cca.feature_loadings.rows())
        throw ShapeError("loadings_csv: name count does not match loadings");
    std::ostringstream os;
    os.precision(17);
    os << "variable,component,loading\n";
    for (int k = 0; k < cca.components(); ++k) {
        for (std::size_t i = 0; i < input_names.size(); ++i)
            os << input_names[i] << ',' << k + 1 << ',' << cca.input_loadings(static_cast<Eigen::Index>(i), k) << '\n';
        for (std::size_t j = 0; j < feature_names_.size(); ++j)
            os << feature_names_[j] << ',' << k + 1 << ',' << cca.feature_loadings(static_cast<Eigen::Index>(j), k) << '\n';
    }
    return os.str();
}

} // namespace tsgan
