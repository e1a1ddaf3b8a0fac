#include "tsgan/augment.hpp"
#include "tsgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

namespace tsgan {

namespace {

constexpr double kVarianceFloor = 1e-8;
constexpr double kTiny = 1e-300;

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

// Per-step emission terms, scaled so the largest state density per step is 1.
struct Emissions {
    Matrix state;                    // T x S, b_t(j) * exp(-shift_t)
    std::vector<Matrix> component;   // S entries of T x M, w_jm N_jm(o_t) * exp(-shift_t)
    Vector shift;                    // T
};

Emissions emissions(const HmmModel& hmm, const Series& obs) {
    const auto steps = static_cast<Eigen::Index>(obs.size());
    const int S = hmm.num_states;
    const int M = hmm.num_mixtures;
    Emissions e;
    e.state.resize(steps, S);
    e.shift.resize(steps);
    e.component.assign(static_cast<std::size_t>(S), Matrix(steps, M));
    Matrix logc(S, M);
    for (Eigen::Index t = 0; t < steps; ++t) {
        double peak = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < S; ++j)
            for (int m = 0; m < M; ++m) {
                logc(j, m) = std::log(std::max(hmm.weights(j, m), kTiny)) +
                             log_normal_pdf(obs[static_cast<std::size_t>(t)], hmm.means(j, m),
                                            hmm.variances(j, m));
                peak = std::max(peak, logc(j, m));
            }
        e.shift[t] = peak;
        for (int j = 0; j < S; ++j) {
            double total = 0.0;
            for (int m = 0; m < M; ++m) {
                const double v = std::exp(logc(j, m) - peak);
                e.component[static_cast<std::size_t>(j)](t, m) = v;
                total += v;
            }
            e.state(t, j) = total;
        }
    }
    return e;
}

struct ForwardBackward {
    Matrix alpha; // T x S, normalized per step
    Matrix beta;  // T x S
    Vector scale; // T
    double log_likelihood = 0.0;
};

ForwardBackward forward_backward(const HmmModel& hmm, const Emissions& e, bool need_beta) {
    const Eigen::Index steps = e.state.rows();
    const int S = hmm.num_states;
    ForwardBackward fb;
    fb.alpha.resize(steps, S);
    fb.scale.resize(steps);

    for (Eigen::Index t = 0; t < steps; ++t) {
        if (t == 0)
            fb.alpha.row(0) = hmm.initial.transpose().cwiseProduct(e.state.row(0));
        else
            fb.alpha.row(t) = (fb.alpha.row(t - 1) * hmm.transition).cwiseProduct(e.state.row(t));
        const double c = fb.alpha.row(t).sum();
        if (!(c > 0.0) || !std::isfinite(c))
            throw NumericError("HMM forward pass underflowed");
        fb.alpha.row(t) /= c;
        fb.scale[t] = c;
        fb.log_likelihood += std::log(c) + e.shift[t];
    }
    if (!need_beta) return fb;

    fb.beta.resize(steps, S);
    fb.beta.row(steps - 1).setOnes();
    for (Eigen::Index t = steps - 2; t >= 0; --t) {
        const Vector next = e.state.row(t + 1).transpose().cwiseProduct(fb.beta.row(t + 1).transpose());
        fb.beta.row(t) = (hmm.transition * next).transpose() / fb.scale[t + 1];
    }
    return fb;
}

HmmModel initial_model(const std::vector<Series>& data, int S, int M, Rng& rng) {
    std::vector<double> pooled;
    for (const auto& s : data) pooled.insert(pooled.end(), s.begin(), s.end());
    std::sort(pooled.begin(), pooled.end());
    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    double var = 0.0;
    for (double v : pooled) var += (v - mean) * (v - mean);
    var = std::max(var / static_cast<double>(pooled.size()), 1e-4);
    const double sd = std::sqrt(var);

    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    HmmModel h;
    h.num_states = S;
    h.num_mixtures = M;
    h.initial = Vector::Constant(S, 1.0 / S);
    h.transition.resize(S, S);
    for (int i = 0; i < S; ++i) {
        for (int j = 0; j < S; ++j) h.transition(i, j) = (i == j ? 1.0 : 1.0 / S) + 0.05 * (1.0 + jitter(rng));
        h.transition.row(i) /= h.transition.row(i).sum();
    }
    h.weights = Matrix::Constant(S, M, 1.0 / M);
    h.means.resize(S, M);
    h.variances = Matrix::Constant(S, M, var / S);
    for (int j = 0; j < S; ++j) {
        const double q = (j + 0.5) / S;
        const auto pos = std::min(pooled.size() - 1, static_cast<std::size_t>(q * static_cast<double>(pooled.size())));
        for (int m = 0; m < M; ++m)
            h.means(j, m) = pooled[pos] + 0.05 * sd * jitter(rng) + 0.25 * sd * (m - 0.5 * (M - 1)) / S;
    }
    return h;
}

// One Baum-Welch run. Returns false on variance collapse.
bool baum_welch(const std::vector<Series>& data, HmmModel& h, const HmmFitOptions& opt,
                HmmFitTrace& trace) {
    const int S = h.num_states;
    const int M = h.num_mixtures;
    double previous = -std::numeric_limits<double>::infinity();
    trace.log_likelihood.clear();
    trace.converged = false;

    for (int iter = 0; iter <= opt.max_iterations; ++iter) {
        Vector pi_acc = Vector::Zero(S);
        Matrix trans_num = Matrix::Zero(S, S);
        Vector trans_den = Vector::Zero(S);
        Matrix comp_occ = Matrix::Zero(S, M);
        Matrix comp_sum = Matrix::Zero(S, M);
        Matrix comp_sq = Matrix::Zero(S, M);
        double ll = 0.0;

        for (const auto& obs : data) {
            const auto e = emissions(h, obs);
            const auto fb = forward_backward(h, e, true);
            ll += fb.log_likelihood;
            const Eigen::Index steps = e.state.rows();
            const Matrix gamma = fb.alpha.cwiseProduct(fb.beta);
            pi_acc += gamma.row(0).transpose();
            for (Eigen::Index t = 0; t + 1 < steps; ++t) {
                const RowVector next = e.state.row(t + 1).cwiseProduct(fb.beta.row(t + 1)) / fb.scale[t + 1];
                trans_num += h.transition.cwiseProduct(fb.alpha.row(t).transpose() * next);
                trans_den += gamma.row(t).transpose();
            }
            for (Eigen::Index t = 0; t < steps; ++t) {
                const double o = obs[static_cast<std::size_t>(t)];
                for (int j = 0; j < S; ++j) {
                    const double denom = e.state(t, j);
                    if (!(denom > 0.0)) continue;
                    for (int m = 0; m < M; ++m) {
                        const double r = gamma(t, j) * e.component[static_cast<std::size_t>(j)](t, m) / denom;
                        // Moments about the current mean avoid cancellation in the variance.
                        const double d = o - h.means(j, m);
                        comp_occ(j, m) += r;
                        comp_sum(j, m) += r * d;
                        comp_sq(j, m) += r * d * d;
                    }
                }
            }
        }

        trace.log_likelihood.push_back(ll);
        if (!std::isfinite(ll)) throw NumericError("Baum-Welch produced a non-finite log-likelihood");
        const bool done = iter == opt.max_iterations || ll - previous < opt.tolerance;
        if (ll - previous < opt.tolerance) trace.converged = true;
        previous = ll;
        if (done) break;

        // M-step; states or components with no occupancy keep their parameters.
        h.initial = pi_acc / pi_acc.sum();
        for (int i = 0; i < S; ++i) {
            if (trans_den[i] > kTiny) {
                h.transition.row(i) = trans_num.row(i) / trans_den[i];
                h.transition.row(i) /= h.transition.row(i).sum();
            }
            const double occ = comp_occ.row(i).sum();
            if (occ <= kTiny) continue;
            for (int m = 0; m < M; ++m) {
                h.weights(i, m) = comp_occ(i, m) / occ;
                if (comp_occ(i, m) <= kTiny) continue;
                const double shift = comp_sum(i, m) / comp_occ(i, m);
                const double var = comp_sq(i, m) / comp_occ(i, m) - shift * shift;
                h.means(i, m) += shift;
                if (!(var >= kVarianceFloor)) return false;
                h.variances(i, m) = var;
            }
        }
    }
    return true;
}

} // namespace

void HmmModel::validate() const {
    if (num_states < 1 || num_mixtures < 1) throw ArgumentError("HMM needs S >= 1 and M >= 1");
    if (initial.size() != num_states || transition.rows() != num_states ||
        transition.cols() != num_states || weights.rows() != num_states ||
        weights.cols() != num_mixtures || means.rows() != num_states ||
        means.cols() != num_mixtures || variances.rows() != num_states ||
        variances.cols() != num_mixtures)
        throw ShapeError("HMM parameter shapes are inconsistent");
    auto prob_vector = [](const auto& v) {
        return (v.array() >= 0.0).all() && std::abs(v.sum() - 1.0) < 1e-9;
    };
    if (!prob_vector(initial)) throw ArgumentError("HMM initial distribution is not a probability vector");
    for (int i = 0; i < num_states; ++i) {
        if (!prob_vector(transition.row(i)))
            throw ArgumentError("HMM transition row " + std::to_string(i + 1) + " is not a probability vector");
        if (!prob_vector(weights.row(i)))
            throw ArgumentError("HMM mixture weights of state " + std::to_string(i + 1) + " do not sum to 1");
    }
    if (!(variances.array() > 0.0).all()) throw ArgumentError("HMM variances must be positive");
}

int HmmModel::free_parameters() const {
    const int S = num_states;
    const int M = num_mixtures;
    return (S - 1) + S * (S - 1) + S * (M - 1) + 2 * S * M;
}

double hmm_log_likelihood(const HmmModel& model, const std::vector<Series>& data) {
    double ll = 0.0;
    for (const auto& obs : data) {
        if (obs.empty()) throw ArgumentError("hmm_log_likelihood: empty sequence");
        ll += forward_backward(model, emissions(model, obs), false).log_likelihood;
    }
    return ll;
}

HmmFitResult hmm_fit_states(const std::vector<Series>& training, int num_states, Rng& rng,
                            const HmmFitOptions& options) {
    if (training.empty()) throw ArgumentError("hmm_fit: no training data");
    for (const auto& s : training)
        if (s.empty()) throw ArgumentError("hmm_fit: empty training sequence");
    if (num_states < 1 || options.num_mixtures < 1) throw ArgumentError("hmm_fit: S and M must be >= 1");

    HmmFitTrace trace;
    trace.num_states = num_states;
    for (int attempt = 0; attempt < 2; ++attempt) {
        HmmModel h = initial_model(training, num_states, options.num_mixtures, rng);
        if (!baum_welch(training, h, options, trace)) continue;
        HmmFitResult out;
        out.model = std::move(h);
        out.log_likelihood = trace.log_likelihood.back();
        out.aic = 2.0 * out.model.free_parameters() - 2.0 * out.log_likelihood;
        trace.aic = out.aic;
        out.traces.push_back(trace);
        return out;
    }
    throw NumericError("hmm_fit: variance collapsed below 1e-8 for S=" + std::to_string(num_states) +
                       " after re-jittering");
}

HmmFitResult hmm_fit(const std::vector<Series>& training, Rng& rng, const HmmFitOptions& options) {
    if (options.state_range.empty()) throw ArgumentError("hmm_fit: empty state range");
    HmmFitResult best;
    bool have_best = false;
    std::vector<HmmFitTrace> traces;
    for (int S : options.state_range) {
        try {
            auto fit = hmm_fit_states(training, S, rng, options);
            traces.push_back(fit.traces.front());
            if (!have_best || fit.aic < best.aic) {
                best = std::move(fit);
                have_best = true;
            }
        } catch (const NumericError& e) {
            HmmFitTrace failed;
            failed.num_states = S;
            failed.failed = true;
            failed.message = e.what();
            traces.push_back(failed);
            std::cerr << "warning: " << e.what() << "; skipping this state count\n";
        }
    }
    if (!have_best) throw NumericError("hmm_fit: every candidate state count failed to fit");
    best.traces = std::move(traces);
    return best;
}

Series hmm_sample(const HmmModel& model, int length, Rng& rng) {
    if (length < 1) throw ArgumentError("hmm_sample: length must be >= 1");
    model.validate();
    auto draw = [&rng](const auto& probs) {
        std::discrete_distribution<int> pick(probs.data(), probs.data() + probs.size());
        return pick(rng);
    };
    Series out(static_cast<std::size_t>(length));
    int state = draw(Vector(model.initial));
    for (int t = 0; t < length; ++t) {
        if (t > 0) state = draw(Vector(model.transition.row(state).transpose()));
        const int m = model.num_mixtures == 1 ? 0 : draw(Vector(model.weights.row(state).transpose()));
        std::normal_distribution<double> emit(model.means(state, m), std::sqrt(model.variances(state, m)));
        out[static_cast<std::size_t>(t)] = emit(rng);
    }
    return out;
}

} // namespace tsgan
