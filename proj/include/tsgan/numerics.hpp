#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tsgan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// One matrix per time step, each laid out (features x batch).
using SequenceBatch = std::vector<Matrix>;

using Rng = std::mt19937_64;

// Row-block order of the stacked gate pre-activations.
enum class Gate : int { input = 0, forget = 1, cell = 2, output = 3 };

struct LstmLayerParams {
    Matrix input_weights;     // 4U x d_in
    Matrix recurrent_weights; // 4U x U
    Vector biases;            // 4U

    int units() const { return static_cast<int>(recurrent_weights.cols()); }
    int input_dim() const { return static_cast<int>(input_weights.cols()); }
};

struct LstmStack {
    std::vector<LstmLayerParams> layers;

    LstmStack() = default;
    // All parameters zero.
    LstmStack(int input_dim, int units, int num_layers);

    int num_layers() const { return static_cast<int>(layers.size()); }
    int units() const { return layers.empty() ? 0 : layers.front().units(); }
    int input_dim() const { return layers.empty() ? 0 : layers.front().input_dim(); }

    // Throws ShapeError if the layer shapes do not chain or contain non-finite values.
    void validate() const;
    void set_zero();
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights with fan_in = d_in + U,
// forget-gate biases 1, all other biases 0.
void initialize_lstm(LstmStack& stack, Rng& rng);

struct LstmLayerCache {
    SequenceBatch gates;     // activated [i; f; g; o], 4U x B
    SequenceBatch cells;     // c_t
    SequenceBatch cell_tanh; // tanh(c_t)
    SequenceBatch hidden;    // h_t
};

struct LstmCache {
    SequenceBatch inputs; // layer-1 inputs
    std::vector<LstmLayerCache> layers;

    int steps() const { return static_cast<int>(inputs.size()); }
    int batch() const { return inputs.empty() ? 0 : static_cast<int>(inputs.front().cols()); }
    const SequenceBatch& top_hidden() const { return layers.back().hidden; }
};

// Runs every layer over the full sequence starting from h0 = c0 = 0.
LstmCache lstm_forward(const LstmStack& stack, const SequenceBatch& inputs);

struct LstmGradients {
    LstmStack params;     // same shapes as the stack, summed over the batch
    SequenceBatch inputs; // dLoss/d(layer-1 input) per step
};

// Backpropagation through time. `top_hidden_grads[t]` is dLoss/dh_t of the last layer.
LstmGradients lstm_backward(const LstmStack& stack, const LstmCache& cache,
                            const SequenceBatch& top_hidden_grads);

// Fully connected U -> 1 projection followed by a sigmoid, applied per time step.
struct SigmoidHead {
    RowVector weights; // 1 x U
    double bias = 0.0;

    SigmoidHead() = default;
    explicit SigmoidHead(int units) : weights(RowVector::Zero(units)) {}
};

void initialize_head(SigmoidHead& head, Rng& rng);

// Per-step probabilities, T x B. Values are clamped into the open interval (0,1).
Matrix head_forward(const SigmoidHead& head, const SequenceBatch& hidden);

struct HeadGradients {
    SigmoidHead params;
    SequenceBatch hidden; // dLoss/dh_t
};

// `prob_grads` is dLoss/dp, T x B, where p is the output of head_forward.
HeadGradients head_backward(const SigmoidHead& head, const SequenceBatch& hidden,
                            const Matrix& probs, const Matrix& prob_grads);

double sigmoid(double x);

// Named views over parameter storage; used by the optimizer and checkpoints.
struct ParamBlock {
    std::string name;
    std::span<double> values;
};

struct ConstParamBlock {
    std::string name;
    std::span<const double> values;
};

void append_blocks(LstmStack& stack, const std::string& prefix, std::vector<ParamBlock>& out);
void append_blocks(SigmoidHead& head, const std::string& prefix, std::vector<ParamBlock>& out);
std::vector<ConstParamBlock> const_blocks(const std::vector<ParamBlock>& blocks);

struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

// One bias-corrected Adam descent step. Moments are allocated on the first call
// and must keep matching the parameter layout afterwards.
void adam_step(std::span<const ParamBlock> params, std::span<const ConstParamBlock> grads,
               AdamState& state);

} // namespace tsgan
