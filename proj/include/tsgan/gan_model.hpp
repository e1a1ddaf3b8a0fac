#pragma once

#include "tsgan/numerics.hpp"
#include "tsgan/series.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tsgan {

// Per-step conditioning vectors, C x T. Each column is a convex combination
// of one-hot class vectors.
class LabelSequence {
public:
    LabelSequence() = default;
    explicit LabelSequence(Matrix values);

    // Constant one-hot label for class `cls` (1-based).
    static LabelSequence one_hot(int cls, int num_classes, int length);
    // Constant (1 - alpha) * onehot(1) + alpha * onehot(2).
    static LabelSequence blend(double alpha, int length);

    const Matrix& values() const { return values_; }
    int num_classes() const { return static_cast<int>(values_.rows()); }
    int length() const { return static_cast<int>(values_.cols()); }

private:
    Matrix values_;
};

struct GeneratorNet {
    LstmStack lstm; // input: [z_t; c_t]
    SigmoidHead head;
    int latent_dim = 1;
    int num_classes = 1;

    GeneratorNet() = default;
    GeneratorNet(int latent_dim, int num_classes, int units, int layers);
};

struct DiscriminatorNet {
    LstmStack lstm; // input: [x_t; c_t]
    SigmoidHead head;
    int num_classes = 1;

    DiscriminatorNet() = default;
    DiscriminatorNet(int num_classes, int units, int layers);
};

struct ModelMeta {
    int length = 1;      // T
    int num_classes = 1; // C
    int latent_dim = 1;  // d_z
    int units = 1;       // U
    int layers = 1;      // L
    double norm_min = 0.0;
    double norm_max = 1.0;
    std::uint64_t seed = 0;
    int epoch = 0;
    std::vector<std::string> label_names; // original class codes, may be empty
};

struct GanModel {
    ModelMeta meta;
    GeneratorNet generator;
    DiscriminatorNet discriminator;

    // Randomly initialized networks for the given architecture.
    static GanModel create(const ModelMeta& meta, Rng& rng);
    void validate() const;
};

std::vector<ParamBlock> parameter_blocks(GeneratorNet& g);
std::vector<ParamBlock> parameter_blocks(DiscriminatorNet& d);

void initialize(GeneratorNet& g, Rng& rng);
void initialize(DiscriminatorNet& d, Rng& rng);

// Batched passes: every SequenceBatch has T steps of (dim x B).

struct GeneratorPass {
    LstmCache cache;
    Matrix outputs; // T x B
};

GeneratorPass generator_forward_batch(const GeneratorNet& g, const SequenceBatch& latent,
                                      const SequenceBatch& labels);

// `output_grads` is dLoss/dG(z,c), T x B. Returns parameter gradients.
GeneratorNet generator_backward(const GeneratorNet& g, const GeneratorPass& pass,
                                const Matrix& output_grads);

struct DiscriminatorPass {
    LstmCache cache;
    Matrix step_probs; // T x B, sigmoid(FC(h_t))
    Vector probs;      // B, mean over t
};

// `series` is T x B.
DiscriminatorPass discriminator_forward_batch(const DiscriminatorNet& d, const Matrix& series,
                                              const SequenceBatch& labels);

struct DiscriminatorGradients {
    DiscriminatorNet params;
    Matrix series; // dLoss/dx, T x B
};

// `prob_grads` is dLoss/dD for each batch column.
DiscriminatorGradients discriminator_backward(const DiscriminatorNet& d,
                                              const DiscriminatorPass& pass,
                                              const Vector& prob_grads);

// Single-sample convenience wrappers.
// `latent` is T x d_z.
Series generator_forward(const GeneratorNet& g, const Matrix& latent, const LabelSequence& labels);
double discriminator_forward(const DiscriminatorNet& d, const Series& x, const LabelSequence& labels);
// Per-step sigmoid outputs whose mean is discriminator_forward.
Series discriminator_step_outputs(const DiscriminatorNet& d, const Series& x,
                                  const LabelSequence& labels);

// Helpers for assembling batches.
SequenceBatch to_sequence_batch(const std::vector<Matrix>& per_sample); // each T x dim
SequenceBatch constant_labels(const std::vector<int>& classes, int num_classes, int length);
SequenceBatch labels_batch(const std::vector<LabelSequence>& labels);

// Checkpoint container: "TSGAN\0", u32 format version, u64 header length,
// key=value text header, then little-endian float64 blocks.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const GanModel& model, const std::filesystem::path& path);
GanModel load_checkpoint(const std::filesystem::path& path);

} // namespace tsgan
