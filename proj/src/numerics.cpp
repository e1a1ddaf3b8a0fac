#include "tsgan/numerics.hpp"
#include "tsgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsgan {

namespace {

constexpr double kProbFloor = std::numeric_limits<double>::min();
constexpr double kProbCeil = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

bool all_finite(const Matrix& m) { return m.allFinite(); }

Eigen::ArrayXXd sigmoid_array(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

// Eigen's tanh is far slower than its vectorized exp on small blocks.
Eigen::ArrayXXd tanh_array(const Eigen::ArrayXXd& x) { return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0); }

std::string shape_str(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmStack::LstmStack(int input_dim, int units, int num_layers) {
    if (input_dim < 1 || units < 1 || num_layers < 1)
        throw ShapeError("LstmStack requires input_dim, units and num_layers >= 1");
    layers.resize(num_layers);
    for (int l = 0; l < num_layers; ++l) {
        const int d = l == 0 ? input_dim : units;
        layers[l].input_weights = Matrix::Zero(4 * units, d);
        layers[l].recurrent_weights = Matrix::Zero(4 * units, units);
        layers[l].biases = Vector::Zero(4 * units);
    }
}

void LstmStack::validate() const {
    if (layers.empty()) throw ShapeError("LstmStack has no layers");
    const int u = units();
    if (u < 1) throw ShapeError("LstmStack has zero units");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& p = layers[l];
        const std::string where = "layer " + std::to_string(l + 1);
        if (p.recurrent_weights.rows() != 4 * u || p.recurrent_weights.cols() != u)
            throw ShapeError(where + ": recurrent weights are " +
                             shape_str(p.recurrent_weights.rows(), p.recurrent_weights.cols()));
        if (p.input_weights.rows() != 4 * u)
            throw ShapeError(where + ": input weights have " +
                             std::to_string(p.input_weights.rows()) + " rows");
        if (l > 0 && p.input_weights.cols() != u)
            throw ShapeError(where + ": input dimension must equal units");
        if (p.biases.size() != 4 * u) throw ShapeError(where + ": bias length mismatch");
        if (!all_finite(p.input_weights) || !all_finite(p.recurrent_weights) ||
            !p.biases.allFinite())
            throw ShapeError(where + ": non-finite parameter");
    }
}

void LstmStack::set_zero() {
    for (auto& p : layers) {
        p.input_weights.setZero();
        p.recurrent_weights.setZero();
        p.biases.setZero();
    }
}

void initialize_lstm(LstmStack& stack, Rng& rng) {
    for (auto& p : stack.layers) {
        const int u = p.units();
        const double bound = 1.0 / std::sqrt(static_cast<double>(p.input_dim() + u));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index i = 0; i < p.input_weights.size(); ++i) p.input_weights.data()[i] = dist(rng);
        for (Eigen::Index i = 0; i < p.recurrent_weights.size(); ++i)
            p.recurrent_weights.data()[i] = dist(rng);
        p.biases.setZero();
        p.biases.segment(static_cast<int>(Gate::forget) * u, u).setOnes();
    }
}

LstmCache lstm_forward(const LstmStack& stack, const SequenceBatch& inputs) {
    if (stack.layers.empty()) throw ShapeError("lstm_forward: empty stack");
    if (inputs.empty()) throw ShapeError("lstm_forward: sequence must have at least one step");
    const int u = stack.units();
    const Eigen::Index batch = inputs.front().cols();
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        if (inputs[t].rows() != stack.input_dim() || inputs[t].cols() != batch)
            throw ShapeError("lstm_forward: step " + std::to_string(t + 1) + " input is " +
                             shape_str(inputs[t].rows(), inputs[t].cols()) + ", expected " +
                             shape_str(stack.input_dim(), batch));
    }

    const std::size_t steps = inputs.size();
    LstmCache cache;
    cache.inputs = inputs;
    cache.layers.resize(stack.layers.size());

    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        const auto& p = stack.layers[l];
        auto& lc = cache.layers[l];
        const SequenceBatch& below = l == 0 ? cache.inputs : cache.layers[l - 1].hidden;
        lc.gates.resize(steps);
        lc.cells.resize(steps);
        lc.cell_tanh.resize(steps);
        lc.hidden.resize(steps);

        Matrix h_prev = Matrix::Zero(u, batch);
        Matrix c_prev = Matrix::Zero(u, batch);
        for (std::size_t t = 0; t < steps; ++t) {
            Matrix pre = p.input_weights * below[t];
            pre.noalias() += p.recurrent_weights * h_prev;
            pre.colwise() += p.biases;

            Matrix& gates = lc.gates[t];
            gates.resize(4 * u, batch);
            gates.topRows(2 * u) = sigmoid_array(pre.topRows(2 * u).array()).matrix();
            gates.middleRows(2 * u, u) = tanh_array(pre.middleRows(2 * u, u).array()).matrix();
            gates.bottomRows(u) = sigmoid_array(pre.bottomRows(u).array()).matrix();

            const auto i = gates.topRows(u).array();
            const auto f = gates.middleRows(u, u).array();
            const auto g = gates.middleRows(2 * u, u).array();
            const auto o = gates.bottomRows(u).array();

            lc.cells[t] = (f * c_prev.array() + i * g).matrix();
            lc.cell_tanh[t] = tanh_array(lc.cells[t].array()).matrix();
            lc.hidden[t] = (o * lc.cell_tanh[t].array()).matrix();
            h_prev = lc.hidden[t];
            c_prev = lc.cells[t];
        }
    }
    return cache;
}

LstmGradients lstm_backward(const LstmStack& stack, const LstmCache& cache,
                            const SequenceBatch& top_hidden_grads) {
    if (cache.layers.size() != stack.layers.size())
        throw ShapeError("lstm_backward: cache has " + std::to_string(cache.layers.size()) +
                         " layers, stack has " + std::to_string(stack.layers.size()));
    const int u = stack.units();
    const int steps = cache.steps();
    const Eigen::Index batch = cache.batch();
    if (static_cast<int>(top_hidden_grads.size()) != steps)
        throw ShapeError("lstm_backward: gradient sequence length mismatch");
    for (const auto& lc : cache.layers) {
        if (static_cast<int>(lc.hidden.size()) != steps || lc.hidden.front().rows() != u)
            throw ShapeError("lstm_backward: cache does not match stack");
    }
    if (cache.inputs.front().rows() != stack.input_dim())
        throw ShapeError("lstm_backward: cache input dimension does not match stack");
    for (const auto& g : top_hidden_grads) {
        if (g.rows() != u || g.cols() != batch)
            throw ShapeError("lstm_backward: hidden gradient is " + shape_str(g.rows(), g.cols()));
    }

    LstmGradients out;
    out.params = LstmStack(stack.input_dim(), u, stack.num_layers());

    SequenceBatch upstream = top_hidden_grads;
    for (int l = stack.num_layers() - 1; l >= 0; --l) {
        const auto& p = stack.layers[l];
        const auto& lc = cache.layers[l];
        auto& gp = out.params.layers[l];
        const SequenceBatch& below = l == 0 ? cache.inputs : cache.layers[l - 1].hidden;

        SequenceBatch below_grads(steps);
        Matrix dh_next = Matrix::Zero(u, batch);
        Matrix dc_next = Matrix::Zero(u, batch);
        Matrix dpre(4 * u, batch);
        for (int t = steps - 1; t >= 0; --t) {
            const auto i = lc.gates[t].topRows(u).array();
            const auto f = lc.gates[t].middleRows(u, u).array();
            const auto g = lc.gates[t].middleRows(2 * u, u).array();
            const auto o = lc.gates[t].bottomRows(u).array();
            const auto tc = lc.cell_tanh[t].array();

            const Eigen::ArrayXXd dh = upstream[t].array() + dh_next.array();
            const Eigen::ArrayXXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
            const Eigen::ArrayXXd c_prev =
                t > 0 ? Eigen::ArrayXXd(lc.cells[t - 1].array()) : Eigen::ArrayXXd::Zero(u, batch);

            dpre.topRows(u) = (dc * g * i * (1.0 - i)).matrix();
            dpre.middleRows(u, u) = (dc * c_prev * f * (1.0 - f)).matrix();
            dpre.middleRows(2 * u, u) = (dc * i * (1.0 - g.square())).matrix();
            dpre.bottomRows(u) = (dh * tc * o * (1.0 - o)).matrix();
            dc_next = (dc * f).matrix();

            gp.input_weights.noalias() += dpre * below[t].transpose();
            if (t > 0) gp.recurrent_weights.noalias() += dpre * lc.hidden[t - 1].transpose();
            gp.biases += dpre.rowwise().sum();

            below_grads[t].noalias() = p.input_weights.transpose() * dpre;
            dh_next.noalias() = p.recurrent_weights.transpose() * dpre;
        }
        upstream = std::move(below_grads);
    }
    out.inputs = std::move(upstream);
    return out;
}

void initialize_head(SigmoidHead& head, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(head.weights.size()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < head.weights.size(); ++i) head.weights[i] = dist(rng);
    head.bias = 0.0;
}

Matrix head_forward(const SigmoidHead& head, const SequenceBatch& hidden) {
    if (hidden.empty()) throw ShapeError("head_forward: empty sequence");
    const Eigen::Index batch = hidden.front().cols();
    Matrix probs(static_cast<Eigen::Index>(hidden.size()), batch);
    for (std::size_t t = 0; t < hidden.size(); ++t) {
        if (hidden[t].rows() != head.weights.size())
            throw ShapeError("head_forward: hidden size does not match head");
        RowVector logits = head.weights * hidden[t];
        for (Eigen::Index b = 0; b < batch; ++b)
            probs(static_cast<Eigen::Index>(t), b) =
                std::clamp(sigmoid(logits[b] + head.bias), kProbFloor, kProbCeil);
    }
    return probs;
}

HeadGradients head_backward(const SigmoidHead& head, const SequenceBatch& hidden,
                            const Matrix& probs, const Matrix& prob_grads) {
    const auto steps = static_cast<Eigen::Index>(hidden.size());
    if (probs.rows() != steps || prob_grads.rows() != steps || probs.cols() != prob_grads.cols())
        throw ShapeError("head_backward: probability/gradient shape mismatch");
    HeadGradients out;
    out.params = SigmoidHead(static_cast<int>(head.weights.size()));
    out.hidden.resize(hidden.size());
    const Matrix dlogit = (prob_grads.array() * probs.array() * (1.0 - probs.array())).matrix();
    for (Eigen::Index t = 0; t < steps; ++t) {
        const auto row = dlogit.row(t);
        out.params.weights.noalias() += row * hidden[t].transpose();
        out.params.bias += row.sum();
        out.hidden[t].noalias() = head.weights.transpose() * row;
    }
    return out;
}

namespace {

std::span<double> span_of(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> span_of(RowVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

} // namespace

void append_blocks(LstmStack& stack, const std::string& prefix, std::vector<ParamBlock>& out) {
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        auto& p = stack.layers[l];
        const std::string base = prefix + ".lstm" + std::to_string(l + 1);
        out.push_back({base + ".input_weights", span_of(p.input_weights)});
        out.push_back({base + ".recurrent_weights", span_of(p.recurrent_weights)});
        out.push_back({base + ".biases", span_of(p.biases)});
    }
}

void append_blocks(SigmoidHead& head, const std::string& prefix, std::vector<ParamBlock>& out) {
    out.push_back({prefix + ".head.weights", span_of(head.weights)});
    out.push_back({prefix + ".head.bias", std::span<double>(&head.bias, 1)});
}

std::vector<ConstParamBlock> const_blocks(const std::vector<ParamBlock>& blocks) {
    std::vector<ConstParamBlock> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.push_back({b.name, b.values});
    return out;
}

void adam_step(std::span<const ParamBlock> params, std::span<const ConstParamBlock> grads,
               AdamState& state) {
    if (!(state.learning_rate > 0.0)) throw ArgumentError("adam_step: learning rate must be > 0");
    if (params.size() != grads.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameter blocks but " +
                         std::to_string(grads.size()) + " gradient blocks");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].values.size() != grads[k].values.size())
            throw ShapeError("adam_step: block '" + params[k].name + "' size mismatch");
        for (double g : grads[k].values) {
            if (!std::isfinite(g))
                throw NumericError("adam_step: non-finite gradient in block '" + grads[k].name + "'");
        }
    }

    if (state.step_count == 0 && state.first_moment.empty()) {
        state.first_moment.resize(params.size());
        state.second_moment.resize(params.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            state.first_moment[k].assign(params[k].values.size(), 0.0);
            state.second_moment[k].assign(params[k].values.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size())
        throw ShapeError("adam_step: optimizer state does not match parameter layout");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (state.first_moment[k].size() != params[k].values.size())
            throw ShapeError("adam_step: optimizer state for '" + params[k].name +
                             "' has the wrong size");
    }

    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        const auto& g = grads[k].values;
        auto& theta = params[k].values;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            theta[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace tsgan
