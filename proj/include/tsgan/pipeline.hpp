#pragma once

#include "tsgan/augment.hpp"
#include "tsgan/dataset.hpp"
#include "tsgan/gan_model.hpp"
#include "tsgan/metrics.hpp"

#include <string>
#include <vector>

namespace tsgan {

struct NamedDataset {
    std::string name;
    Dataset data;
};

// `count` generator samples for one class, z ~ U(-1,1) per step, in normalized units.
Dataset generate_dataset(const GanModel& model, int class_label, int count, Rng& rng);
// `count_per_class` samples for every class.
Dataset generate_all_classes(const GanModel& model, int count_per_class, Rng& rng);

enum class AugmentMethod { noise, interpolate, extrapolate, hmm };

AugmentMethod parse_augment_method(const std::string& name);
std::string to_string(AugmentMethod method);

struct AugmentOptions {
    double gamma = 0.5;
    HmmFitOptions hmm;
};

// `per_class` synthetic series for every class of `training`. Noise uses the
// sigma pooled over the whole training set; the neighbor methods and the HMM
// work within one class at a time.
Dataset augment_dataset(const Dataset& training, AugmentMethod method, std::size_t per_class,
                        Rng& rng, const AugmentOptions& options = {});

// For every class: the within-original baseline followed by original-vs-target
// reports. `n == 0` picks the smallest group size among the groups of that class.
std::vector<SimilarityReport> evaluate_protocol(const Dataset& original,
                                                const std::vector<NamedDataset>& targets,
                                                std::size_t n, Rng& rng);

} // namespace tsgan
