#pragma once

#include "tsgan/dataset.hpp"
#include "tsgan/gan_model.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace tsgan {

enum class GeneratorLoss {
    saturating,    // minimize mean log(1 - D(G(z,c), c))
    non_saturating // minimize -mean log D(G(z,c), c)
};

// Log arguments are clamped here before evaluation.
inline constexpr double kLogClamp = 1e-12;

struct TrainConfig {
    int epochs = 10000;
    int batch_size = 32; // m
    int unroll = 5;      // K
    double learning_rate = 1e-4;
    int latent_dim = 1;  // d_z
    int units = 400;     // U
    int layers = 4;      // L
    std::uint64_t seed = 0;
    GeneratorLoss loss = GeneratorLoss::saturating;
    int checkpoint_every = 0; // epochs between checkpoints; 0 disables
    std::filesystem::path checkpoint_dir;

    void validate() const; // throws ConfigError
};

struct TrainRecord {
    std::int64_t iteration = 0;
    double d_objective = 0.0; // objective of the retained (first) discriminator update
    double g_objective = 0.0; // generator loss that was descended
    double seconds = 0.0;     // wall clock since training started
};

struct TrainHistory {
    std::vector<TrainRecord> records;

    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

struct LatentBatch {
    SequenceBatch latent; // T steps of d_z x m, entries in [-1, 1]
    SequenceBatch labels; // T steps of C x m, constant one-hot per sample
    std::vector<int> classes;
};

LatentBatch sample_latent_batch(Rng& rng, int m, int length, int latent_dim, int num_classes);

struct RealBatch {
    Matrix series;        // T x m
    SequenceBatch labels; // T steps of C x m
};

// Cycles through shuffled passes of the dataset.
class MinibatchSource {
public:
    MinibatchSource(const Dataset& dataset, Rng& rng);
    RealBatch next(int m, Rng& rng);

private:
    const Dataset* dataset_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

struct DiscriminatorObjective {
    double value = 0.0; // mean log D(x) + log(1 - D(G(z)))
    DiscriminatorNet ascent_grads;
};

// Objective and its gradient w.r.t. the discriminator parameters (the ascent direction).
DiscriminatorObjective discriminator_objective(const DiscriminatorNet& d, const RealBatch& real,
                                               const Matrix& fake_series,
                                               const SequenceBatch& fake_labels);

struct GeneratorObjective {
    double value = 0.0; // loss being minimized
    GeneratorNet grads;
};

GeneratorObjective generator_objective(const GanModel& model, const LatentBatch& batch,
                                       GeneratorLoss loss);

// One Adam ascent step on the discriminator objective; the generator is only read.
// Returns the objective evaluated before the update.
double discriminator_step(GanModel& model, const RealBatch& real, const LatentBatch& fake,
                          AdamState& adam_d);

// One Adam descent step on the generator loss against the current discriminator.
double generator_step(GanModel& model, const LatentBatch& batch, AdamState& adam_g,
                      GeneratorLoss loss);

struct UnrolledStepResult {
    double d_objective = 0.0;
    double g_objective = 0.0;
};

// K+1 discriminator updates, snapshot after the first, generator update against the
// K-times-advanced discriminator, then the discriminator (and its optimizer moments)
// are restored to the snapshot.
UnrolledStepResult generator_step_unrolled(GanModel& model, AdamState& adam_d, AdamState& adam_g,
                                           int unroll, MinibatchSource& source, Rng& rng,
                                           int batch_size, GeneratorLoss loss);

class Trainer {
public:
    Trainer(const Dataset& dataset, const TrainConfig& config);

    // ceil(N / m) unrolled generator updates.
    void run_epoch();
    int iterations_per_epoch() const { return iterations_per_epoch_; }

    const GanModel& model() const { return model_; }
    GanModel& model() { return model_; }
    const TrainHistory& history() const { return history_; }
    Rng& rng() { return rng_; }

private:
    const Dataset& dataset_;
    TrainConfig config_;
    Rng rng_;
    GanModel model_;
    AdamState adam_d_;
    AdamState adam_g_;
    MinibatchSource source_;
    TrainHistory history_;
    int iterations_per_epoch_ = 0;
    std::int64_t iteration_ = 0;
    std::chrono::steady_clock::time_point started_;
};

struct TrainResult {
    GanModel model;
    TrainHistory history;
};

using EpochCallback = std::function<void(int epoch, const Trainer&)>;

// Requires a normalized dataset with at least `batch_size` series.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

} // namespace tsgan
