#include "tsgan/trainer.hpp"
#include "tsgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace tsgan {

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value))
        throw NumericError(std::string(what) + " produced a non-finite objective");
}

double clamped_log(double x) { return std::log(std::max(x, kLogClamp)); }

// d/dx of clamped_log.
double clamped_log_grad(double x) { return x > kLogClamp ? 1.0 / x : 0.0; }

SequenceBatch concat_columns(const SequenceBatch& a, const SequenceBatch& b) {
    if (a.size() != b.size()) throw ShapeError("label sequences differ in length");
    SequenceBatch out(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        out[t].resize(a[t].rows(), a[t].cols() + b[t].cols());
        out[t] << a[t], b[t];
    }
    return out;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("minibatch size must be >= 1");
    if (unroll < 0) throw ConfigError("unroll count must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning rate must be a positive number");
    if (latent_dim < 1) throw ConfigError("latent dimension must be >= 1");
    if (units < 1 || layers < 1) throw ConfigError("units and layers must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("checkpoint cadence must be >= 0");
    if (checkpoint_every > 0 && checkpoint_dir.empty())
        throw ConfigError("checkpoint cadence set without a checkpoint directory");
}

std::string TrainHistory::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "iteration,d_objective,g_objective,seconds\n";
    for (const auto& r : records)
        os << r.iteration << ',' << r.d_objective << ',' << r.g_objective << ',' << r.seconds << '\n';
    return os.str();
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
    write_file_atomic(path, to_csv());
}

LatentBatch sample_latent_batch(Rng& rng, int m, int length, int latent_dim, int num_classes) {
    if (m < 1 || length < 1 || latent_dim < 1 || num_classes < 1)
        throw ArgumentError("sample_latent_batch: dimensions must be >= 1");
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::uniform_int_distribution<int> pick_class(1, num_classes);

    LatentBatch out;
    out.classes.resize(static_cast<std::size_t>(m));
    for (auto& c : out.classes) c = pick_class(rng);
    out.latent.assign(static_cast<std::size_t>(length), Matrix(latent_dim, m));
    for (int b = 0; b < m; ++b)
        for (int t = 0; t < length; ++t)
            for (int k = 0; k < latent_dim; ++k) out.latent[static_cast<std::size_t>(t)](k, b) = uniform(rng);
    out.labels = constant_labels(out.classes, num_classes, length);
    return out;
}

MinibatchSource::MinibatchSource(const Dataset& dataset, Rng& rng) : dataset_(&dataset) {
    if (dataset.empty()) throw ConfigError("training dataset is empty");
    order_.resize(dataset.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::shuffle(order_.begin(), order_.end(), rng);
}

RealBatch MinibatchSource::next(int m, Rng& rng) {
    const auto& ds = *dataset_;
    std::vector<int> classes(static_cast<std::size_t>(m));
    RealBatch out;
    out.series.resize(ds.length, m);
    for (int b = 0; b < m; ++b) {
        if (cursor_ == order_.size()) {
            std::shuffle(order_.begin(), order_.end(), rng);
            cursor_ = 0;
        }
        const std::size_t idx = order_[cursor_++];
        const auto& s = ds.series[idx];
        for (int t = 0; t < ds.length; ++t) out.series(t, b) = s[static_cast<std::size_t>(t)];
        classes[static_cast<std::size_t>(b)] = ds.labels[idx];
    }
    out.labels = constant_labels(classes, ds.num_classes, ds.length);
    return out;
}

DiscriminatorObjective discriminator_objective(const DiscriminatorNet& d, const RealBatch& real,
                                               const Matrix& fake_series,
                                               const SequenceBatch& fake_labels) {
    const Eigen::Index m = real.series.cols();
    if (fake_series.cols() != m || fake_series.rows() != real.series.rows())
        throw ShapeError("discriminator step needs equal-sized real and generated minibatches");

    Matrix series(real.series.rows(), 2 * m);
    series << real.series, fake_series;
    const auto pass = discriminator_forward_batch(d, series, concat_columns(real.labels, fake_labels));

    const double inv_m = 1.0 / static_cast<double>(m);
    DiscriminatorObjective out;
    Vector prob_grads(2 * m);
    for (Eigen::Index b = 0; b < m; ++b) {
        const double p_real = pass.probs[b];
        const double p_fake = pass.probs[m + b];
        out.value += inv_m * (clamped_log(p_real) + clamped_log(1.0 - p_fake));
        prob_grads[b] = inv_m * clamped_log_grad(p_real);
        prob_grads[m + b] = -inv_m * clamped_log_grad(1.0 - p_fake);
    }
    require_finite(out.value, "discriminator step");
    out.ascent_grads = discriminator_backward(d, pass, prob_grads).params;
    return out;
}

GeneratorObjective generator_objective(const GanModel& model, const LatentBatch& batch,
                                       GeneratorLoss loss) {
    const auto gen = generator_forward_batch(model.generator, batch.latent, batch.labels);
    const auto pass = discriminator_forward_batch(model.discriminator, gen.outputs, batch.labels);

    const Eigen::Index m = gen.outputs.cols();
    const double inv_m = 1.0 / static_cast<double>(m);
    GeneratorObjective out;
    Vector prob_grads(m);
    for (Eigen::Index b = 0; b < m; ++b) {
        const double p = pass.probs[b];
        if (loss == GeneratorLoss::saturating) {
            out.value += inv_m * clamped_log(1.0 - p);
            prob_grads[b] = -inv_m * clamped_log_grad(1.0 - p);
        } else {
            out.value -= inv_m * clamped_log(p);
            prob_grads[b] = -inv_m * clamped_log_grad(p);
        }
    }
    require_finite(out.value, "generator step");
    const auto d_grads = discriminator_backward(model.discriminator, pass, prob_grads);
    out.grads = generator_backward(model.generator, gen, d_grads.series);
    return out;
}

double discriminator_step(GanModel& model, const RealBatch& real, const LatentBatch& fake,
                          AdamState& adam_d) {
    const auto gen = generator_forward_batch(model.generator, fake.latent, fake.labels);
    auto objective = discriminator_objective(model.discriminator, real, gen.outputs, fake.labels);

    // Adam descends, so feed it the negated ascent direction.
    auto grad_blocks = parameter_blocks(objective.ascent_grads);
    for (auto& b : grad_blocks)
        for (double& g : b.values) g = -g;
    const auto params = parameter_blocks(model.discriminator);
    adam_step(params, const_blocks(grad_blocks), adam_d);
    return objective.value;
}

double generator_step(GanModel& model, const LatentBatch& batch, AdamState& adam_g,
                      GeneratorLoss loss) {
    auto objective = generator_objective(model, batch, loss);
    const auto params = parameter_blocks(model.generator);
    adam_step(params, const_blocks(parameter_blocks(objective.grads)), adam_g);
    return objective.value;
}

UnrolledStepResult generator_step_unrolled(GanModel& model, AdamState& adam_d, AdamState& adam_g,
                                           int unroll, MinibatchSource& source, Rng& rng,
                                           int batch_size, GeneratorLoss loss) {
    if (unroll < 0) throw ArgumentError("unroll count must be >= 0");
    const auto& meta = model.meta;
    UnrolledStepResult result;
    DiscriminatorNet snapshot;
    AdamState adam_snapshot;
    for (int k = 0; k <= unroll; ++k) {
        const auto fake = sample_latent_batch(rng, batch_size, meta.length, meta.latent_dim,
                                              meta.num_classes);
        const auto real = source.next(batch_size, rng);
        const double objective = discriminator_step(model, real, fake, adam_d);
        if (k == 0) {
            result.d_objective = objective;
            snapshot = model.discriminator;
            adam_snapshot = adam_d;
        }
    }
    const auto latent = sample_latent_batch(rng, batch_size, meta.length, meta.latent_dim,
                                            meta.num_classes);
    result.g_objective = generator_step(model, latent, adam_g, loss);
    model.discriminator = std::move(snapshot);
    adam_d = std::move(adam_snapshot);
    return result;
}

namespace {

GanModel make_model(const Dataset& dataset, const TrainConfig& config, Rng& rng) {
    config.validate();
    if (dataset.empty()) throw ConfigError("training dataset is empty");
    dataset.validate();
    if (!dataset.normalized) throw ConfigError("training dataset must be normalized to [0,1]");
    if (static_cast<std::size_t>(config.batch_size) > dataset.size())
        throw ConfigError("minibatch size " + std::to_string(config.batch_size) +
                          " exceeds dataset size " + std::to_string(dataset.size()));
    ModelMeta meta;
    meta.length = dataset.length;
    meta.num_classes = dataset.num_classes;
    meta.latent_dim = config.latent_dim;
    meta.units = config.units;
    meta.layers = config.layers;
    meta.norm_min = dataset.norm_min;
    meta.norm_max = dataset.norm_max;
    meta.seed = config.seed;
    meta.epoch = 0;
    meta.label_names = dataset.label_names;
    return GanModel::create(meta, rng);
}

} // namespace

Trainer::Trainer(const Dataset& dataset, const TrainConfig& config)
    : dataset_(dataset), config_(config), rng_(config.seed), model_(make_model(dataset, config, rng_)),
      source_(dataset, rng_), started_(std::chrono::steady_clock::now()) {
    adam_d_.learning_rate = config.learning_rate;
    adam_g_.learning_rate = config.learning_rate;
    iterations_per_epoch_ =
        static_cast<int>((dataset.size() + static_cast<std::size_t>(config.batch_size) - 1) /
                         static_cast<std::size_t>(config.batch_size));
}

void Trainer::run_epoch() {
    for (int it = 0; it < iterations_per_epoch_; ++it) {
        const auto step = generator_step_unrolled(model_, adam_d_, adam_g_, config_.unroll, source_,
                                                  rng_, config_.batch_size, config_.loss);
        TrainRecord rec;
        rec.iteration = ++iteration_;
        rec.d_objective = step.d_objective;
        rec.g_objective = step.g_objective;
        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        history_.records.push_back(rec);
    }
    ++model_.meta.epoch;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
    Trainer trainer(dataset, config);
    if (config.checkpoint_every > 0) std::filesystem::create_directories(config.checkpoint_dir);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        trainer.run_epoch();
        if (config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0)
            save_checkpoint(trainer.model(),
                            config.checkpoint_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"));
        if (on_epoch) on_epoch(epoch, trainer);
    }
    return {trainer.model(), trainer.history()};
}

} // namespace tsgan
