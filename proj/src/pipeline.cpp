#include "tsgan/pipeline.hpp"
#include "tsgan/errors.hpp"

#include <algorithm>

namespace tsgan {

namespace {

Dataset empty_like(const GanModel& model) {
    Dataset ds;
    ds.length = model.meta.length;
    ds.num_classes = model.meta.num_classes;
    ds.label_names = model.meta.label_names;
    ds.norm_min = model.meta.norm_min;
    ds.norm_max = model.meta.norm_max;
    ds.normalized = true;
    return ds;
}

} // namespace

Dataset generate_dataset(const GanModel& model, int class_label, int count, Rng& rng) {
    if (count < 1) throw ArgumentError("generate: count must be >= 1");
    if (class_label < 1 || class_label > model.meta.num_classes)
        throw ArgumentError("generate: class " + std::to_string(class_label) + " outside 1.." +
                            std::to_string(model.meta.num_classes));
    const int T = model.meta.length;
    const int dz = model.meta.latent_dim;
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::vector<Matrix> latents;
    for (int i = 0; i < count; ++i) {
        Matrix z(T, dz);
        for (int t = 0; t < T; ++t)
            for (int k = 0; k < dz; ++k) z(t, k) = uniform(rng);
        latents.push_back(std::move(z));
    }
    const auto labels = constant_labels(std::vector<int>(static_cast<std::size_t>(count), class_label),
                                        model.meta.num_classes, T);
    const auto pass = generator_forward_batch(model.generator, to_sequence_batch(latents), labels);

    Dataset ds = empty_like(model);
    for (int i = 0; i < count; ++i) {
        const Vector col = pass.outputs.col(i);
        ds.series.emplace_back(col.data(), col.data() + col.size());
        ds.labels.push_back(class_label);
    }
    return ds;
}

Dataset generate_all_classes(const GanModel& model, int count_per_class, Rng& rng) {
    Dataset ds = empty_like(model);
    for (int cls = 1; cls <= model.meta.num_classes; ++cls) {
        auto part = generate_dataset(model, cls, count_per_class, rng);
        ds.series.insert(ds.series.end(), part.series.begin(), part.series.end());
        ds.labels.insert(ds.labels.end(), part.labels.begin(), part.labels.end());
    }
    return ds;
}

AugmentMethod parse_augment_method(const std::string& name) {
    if (name == "noise") return AugmentMethod::noise;
    if (name == "interp" || name == "interpolate") return AugmentMethod::interpolate;
    if (name == "extrap" || name == "extrapolate") return AugmentMethod::extrapolate;
    if (name == "hmm") return AugmentMethod::hmm;
    throw ArgumentError("unknown augmentation method '" + name + "' (noise, interp, extrap, hmm)");
}

std::string to_string(AugmentMethod method) {
    switch (method) {
    case AugmentMethod::noise: return "noise";
    case AugmentMethod::interpolate: return "interp";
    case AugmentMethod::extrapolate: return "extrap";
    case AugmentMethod::hmm: return "hmm";
    }
    return "unknown";
}

Dataset augment_dataset(const Dataset& training, AugmentMethod method, std::size_t per_class,
                        Rng& rng, const AugmentOptions& options) {
    training.validate();
    if (training.empty()) throw ArgumentError("augment: training set is empty");
    Dataset out = training;
    out.series.clear();
    out.labels.clear();
    const double sigma = pooled_sigma(training.series);

    for (int cls = 1; cls <= training.num_classes; ++cls) {
        const auto members = training.class_members(cls);
        if (members.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        HmmModel hmm;
        if (method == AugmentMethod::hmm) hmm = hmm_fit(members, rng, options.hmm).model;
        for (std::size_t k = 0; k < per_class; ++k) {
            Series s;
            switch (method) {
            case AugmentMethod::noise:
                s = noise_augment(members[pick(rng)], options.gamma, sigma, rng);
                break;
            case AugmentMethod::interpolate: {
                const auto i = pick(rng);
                s = interpolate_augment(members, i, sample_lambda(rng));
                break;
            }
            case AugmentMethod::extrapolate: {
                const auto i = pick(rng);
                s = extrapolate_augment(members, i, sample_lambda(rng));
                break;
            }
            case AugmentMethod::hmm:
                s = hmm_sample(hmm, training.length, rng);
                break;
            }
            out.series.push_back(std::move(s));
            out.labels.push_back(cls);
        }
    }
    return out;
}

std::vector<SimilarityReport> evaluate_protocol(const Dataset& original,
                                                const std::vector<NamedDataset>& targets,
                                                std::size_t n, Rng& rng) {
    original.validate();
    std::vector<SimilarityReport> reports;
    for (int cls = 1; cls <= original.num_classes; ++cls) {
        const auto base = original.class_members(cls);
        std::vector<std::vector<Series>> groups;
        for (const auto& t : targets) {
            if (t.data.length != original.length)
                throw ArgumentError("evaluate: target '" + t.name + "' has length " +
                                    std::to_string(t.data.length) + ", original has " +
                                    std::to_string(original.length));
            groups.push_back(t.data.class_members(cls));
        }
        std::size_t size = base.size();
        for (const auto& g : groups) size = std::min(size, g.size());
        if (base.size() < 2 || size == 0) continue;
        const std::size_t take = n == 0 ? size : n;

        const std::string tag = "/class" + std::to_string(cls);
        reports.push_back(average_similarity(base, nullptr, std::max<std::size_t>(take, 2), rng,
                                             "original" + tag, "original" + tag));
        for (std::size_t k = 0; k < targets.size(); ++k)
            reports.push_back(average_similarity(base, &groups[k], take, rng, "original" + tag,
                                                 targets[k].name + tag));
    }
    return reports;
}

} // namespace tsgan
