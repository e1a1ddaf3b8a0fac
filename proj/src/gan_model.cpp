#include "tsgan/gan_model.hpp"
#include "tsgan/errors.hpp"

#include <cmath>
#include <string>

namespace tsgan {

namespace {

void check_labels(const SequenceBatch& labels, std::size_t steps, Eigen::Index batch,
                  int num_classes, const char* where) {
    if (labels.size() != steps)
        throw ShapeError(std::string(where) + ": label sequence has " +
                         std::to_string(labels.size()) + " steps, expected " +
                         std::to_string(steps));
    for (const auto& c : labels) {
        if (c.rows() != num_classes || c.cols() != batch)
            throw ShapeError(std::string(where) + ": label step shape mismatch");
    }
}

} // namespace

LabelSequence::LabelSequence(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) throw ShapeError("LabelSequence: empty");
    for (Eigen::Index t = 0; t < values_.cols(); ++t) {
        const auto col = values_.col(t);
        if ((col.array() < 0.0).any() || std::abs(col.sum() - 1.0) > 1e-9)
            throw ArgumentError("LabelSequence: column " + std::to_string(t + 1) +
                                " is not a probability vector");
    }
}

LabelSequence LabelSequence::one_hot(int cls, int num_classes, int length) {
    if (cls < 1 || cls > num_classes)
        throw ArgumentError("class " + std::to_string(cls) + " outside 1.." +
                            std::to_string(num_classes));
    Matrix m = Matrix::Zero(num_classes, length);
    m.row(cls - 1).setOnes();
    return LabelSequence(std::move(m));
}

LabelSequence LabelSequence::blend(double alpha, int length) {
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("label blend coefficient outside [0,1]");
    Matrix m(2, length);
    m.row(0).setConstant(1.0 - alpha);
    m.row(1).setConstant(alpha);
    return LabelSequence(std::move(m));
}

GeneratorNet::GeneratorNet(int latent_dim_, int num_classes_, int units, int layers)
    : lstm(latent_dim_ + num_classes_, units, layers), head(units), latent_dim(latent_dim_),
      num_classes(num_classes_) {}

DiscriminatorNet::DiscriminatorNet(int num_classes_, int units, int layers)
    : lstm(1 + num_classes_, units, layers), head(units), num_classes(num_classes_) {}

void initialize(GeneratorNet& g, Rng& rng) {
    initialize_lstm(g.lstm, rng);
    initialize_head(g.head, rng);
}

void initialize(DiscriminatorNet& d, Rng& rng) {
    initialize_lstm(d.lstm, rng);
    initialize_head(d.head, rng);
}

GanModel GanModel::create(const ModelMeta& meta, Rng& rng) {
    if (meta.length < 1 || meta.num_classes < 1 || meta.latent_dim < 1)
        throw ArgumentError("GanModel: T, C and d_z must be >= 1");
    GanModel m;
    m.meta = meta;
    m.generator = GeneratorNet(meta.latent_dim, meta.num_classes, meta.units, meta.layers);
    m.discriminator = DiscriminatorNet(meta.num_classes, meta.units, meta.layers);
    initialize(m.generator, rng);
    initialize(m.discriminator, rng);
    return m;
}

void GanModel::validate() const {
    if (meta.length < 1) throw ShapeError("model length must be >= 1");
    if (generator.num_classes != discriminator.num_classes || generator.num_classes != meta.num_classes)
        throw ShapeError("generator and discriminator disagree on the class count");
    generator.lstm.validate();
    discriminator.lstm.validate();
    if (generator.lstm.input_dim() != meta.latent_dim + meta.num_classes)
        throw ShapeError("generator input dimension does not match d_z + C");
    if (discriminator.lstm.input_dim() != 1 + meta.num_classes)
        throw ShapeError("discriminator input dimension does not match 1 + C");
    if (generator.lstm.units() != meta.units || discriminator.lstm.units() != meta.units ||
        generator.lstm.num_layers() != meta.layers || discriminator.lstm.num_layers() != meta.layers)
        throw ShapeError("network sizes do not match the model metadata");
    if (generator.head.weights.size() != meta.units || discriminator.head.weights.size() != meta.units)
        throw ShapeError("output layer size does not match units");
}

std::vector<ParamBlock> parameter_blocks(GeneratorNet& g) {
    std::vector<ParamBlock> out;
    append_blocks(g.lstm, "generator", out);
    append_blocks(g.head, "generator", out);
    return out;
}

std::vector<ParamBlock> parameter_blocks(DiscriminatorNet& d) {
    std::vector<ParamBlock> out;
    append_blocks(d.lstm, "discriminator", out);
    append_blocks(d.head, "discriminator", out);
    return out;
}

GeneratorPass generator_forward_batch(const GeneratorNet& g, const SequenceBatch& latent,
                                      const SequenceBatch& labels) {
    if (latent.empty()) throw ShapeError("generator_forward: empty latent sequence");
    const Eigen::Index batch = latent.front().cols();
    check_labels(labels, latent.size(), batch, g.num_classes, "generator_forward");
    SequenceBatch inputs(latent.size());
    for (std::size_t t = 0; t < latent.size(); ++t) {
        if (latent[t].rows() != g.latent_dim || latent[t].cols() != batch)
            throw ShapeError("generator_forward: latent step shape mismatch");
        inputs[t].resize(g.latent_dim + g.num_classes, batch);
        inputs[t] << latent[t], labels[t];
    }
    GeneratorPass pass;
    pass.cache = lstm_forward(g.lstm, inputs);
    pass.outputs = head_forward(g.head, pass.cache.top_hidden());
    return pass;
}

GeneratorNet generator_backward(const GeneratorNet& g, const GeneratorPass& pass,
                                const Matrix& output_grads) {
    if (output_grads.rows() != pass.outputs.rows() || output_grads.cols() != pass.outputs.cols())
        throw ShapeError("generator_backward: output gradient shape mismatch");
    auto head = head_backward(g.head, pass.cache.top_hidden(), pass.outputs, output_grads);
    auto lstm = lstm_backward(g.lstm, pass.cache, head.hidden);
    GeneratorNet grads;
    grads.lstm = std::move(lstm.params);
    grads.head = std::move(head.params);
    grads.latent_dim = g.latent_dim;
    grads.num_classes = g.num_classes;
    return grads;
}

DiscriminatorPass discriminator_forward_batch(const DiscriminatorNet& d, const Matrix& series,
                                              const SequenceBatch& labels) {
    if (series.rows() < 1) throw ShapeError("discriminator_forward: empty series");
    const auto steps = static_cast<std::size_t>(series.rows());
    const Eigen::Index batch = series.cols();
    check_labels(labels, steps, batch, d.num_classes, "discriminator_forward");
    SequenceBatch inputs(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        inputs[t].resize(1 + d.num_classes, batch);
        inputs[t] << series.row(static_cast<Eigen::Index>(t)), labels[t];
    }
    DiscriminatorPass pass;
    pass.cache = lstm_forward(d.lstm, inputs);
    pass.step_probs = head_forward(d.head, pass.cache.top_hidden());
    pass.probs = pass.step_probs.colwise().mean().transpose();
    return pass;
}

DiscriminatorGradients discriminator_backward(const DiscriminatorNet& d,
                                              const DiscriminatorPass& pass,
                                              const Vector& prob_grads) {
    const Eigen::Index steps = pass.step_probs.rows();
    if (prob_grads.size() != pass.step_probs.cols())
        throw ShapeError("discriminator_backward: gradient count does not match batch");
    // Mean pooling spreads dL/dD evenly over the steps.
    Matrix step_grads = (prob_grads / static_cast<double>(steps)).transpose().replicate(steps, 1);
    auto head = head_backward(d.head, pass.cache.top_hidden(), pass.step_probs, step_grads);
    auto lstm = lstm_backward(d.lstm, pass.cache, head.hidden);

    DiscriminatorGradients out;
    out.params.lstm = std::move(lstm.params);
    out.params.head = std::move(head.params);
    out.params.num_classes = d.num_classes;
    out.series.resize(steps, pass.step_probs.cols());
    for (Eigen::Index t = 0; t < steps; ++t) out.series.row(t) = lstm.inputs[t].row(0);
    return out;
}

SequenceBatch to_sequence_batch(const std::vector<Matrix>& per_sample) {
    if (per_sample.empty()) throw ShapeError("to_sequence_batch: empty batch");
    const Eigen::Index steps = per_sample.front().rows();
    const Eigen::Index dim = per_sample.front().cols();
    const auto batch = static_cast<Eigen::Index>(per_sample.size());
    SequenceBatch out(static_cast<std::size_t>(steps), Matrix(dim, batch));
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& m = per_sample[static_cast<std::size_t>(b)];
        if (m.rows() != steps || m.cols() != dim)
            throw ShapeError("to_sequence_batch: samples differ in shape");
        for (Eigen::Index t = 0; t < steps; ++t)
            out[static_cast<std::size_t>(t)].col(b) = m.row(t).transpose();
    }
    return out;
}

SequenceBatch constant_labels(const std::vector<int>& classes, int num_classes, int length) {
    const auto batch = static_cast<Eigen::Index>(classes.size());
    Matrix step = Matrix::Zero(num_classes, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const int cls = classes[static_cast<std::size_t>(b)];
        if (cls < 1 || cls > num_classes)
            throw ArgumentError("class " + std::to_string(cls) + " outside 1.." +
                                std::to_string(num_classes));
        step(cls - 1, b) = 1.0;
    }
    return SequenceBatch(static_cast<std::size_t>(length), step);
}

SequenceBatch labels_batch(const std::vector<LabelSequence>& labels) {
    std::vector<Matrix> per_sample;
    per_sample.reserve(labels.size());
    for (const auto& l : labels) per_sample.push_back(l.values().transpose());
    return to_sequence_batch(per_sample);
}

Series generator_forward(const GeneratorNet& g, const Matrix& latent, const LabelSequence& labels) {
    if (latent.rows() != labels.length())
        throw ShapeError("generator_forward: latent has " + std::to_string(latent.rows()) +
                         " steps but labels have " + std::to_string(labels.length()));
    const auto pass = generator_forward_batch(g, to_sequence_batch({latent}),
                                              labels_batch({labels}));
    return Series(pass.outputs.data(), pass.outputs.data() + pass.outputs.rows());
}

Series discriminator_step_outputs(const DiscriminatorNet& d, const Series& x,
                                  const LabelSequence& labels) {
    if (static_cast<int>(x.size()) != labels.length())
        throw ShapeError("discriminator_forward: series has " + std::to_string(x.size()) +
                         " steps but labels have " + std::to_string(labels.length()));
    const Matrix series = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    const auto pass = discriminator_forward_batch(d, series, labels_batch({labels}));
    return Series(pass.step_probs.data(), pass.step_probs.data() + pass.step_probs.rows());
}

double discriminator_forward(const DiscriminatorNet& d, const Series& x,
                             const LabelSequence& labels) {
    if (static_cast<int>(x.size()) != labels.length())
        throw ShapeError("discriminator_forward: series has " + std::to_string(x.size()) +
                         " steps but labels have " + std::to_string(labels.length()));
    const Matrix series = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    return discriminator_forward_batch(d, series, labels_batch({labels})).probs[0];
}

} // namespace tsgan
