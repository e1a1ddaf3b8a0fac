#include "tsgan/cli.hpp"

#include "tsgan/analysis.hpp"
#include "tsgan/dataset.hpp"
#include "tsgan/errors.hpp"
#include "tsgan/gan_model.hpp"
#include "tsgan/metrics.hpp"
#include "tsgan/pipeline.hpp"
#include "tsgan/trainer.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace tsgan {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    fs::path dataset;
    fs::path original;
    fs::path checkpoint;
    fs::path out = "tsgan_out";
    std::uint64_t seed = 0;

    // training
    int epochs = 10000;
    int units = 400;
    int layers = 4;
    int unroll = 5;
    int batch = 32;
    int latent_dim = 1;
    double learning_rate = 1e-4;
    std::string loss = "saturating";
    int checkpoint_every = 0;
    int log_every = 0;
    std::size_t train_count = 0;
    std::vector<std::size_t> train_per_class;

    // generation and evaluation
    int class_label = 1;
    int count = 10;
    bool denormalize = false;
    std::vector<std::string> targets;
    std::size_t n = 0;
    std::size_t k = 0;
    bool baselines = false;

    // augmentation
    std::string method = "noise";
    double gamma = 0.5;
    int max_states = 10;
    int mixtures = 1;

    // analysis
    int steps = 100;
    int samples = 1000;
    std::string profile = "ecg";
    std::vector<double> scales;
    int samples_per_scale = 1;
};

const std::map<std::string, std::vector<std::string>>& required_options() {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"train", {"dataset"}},     {"generate", {"checkpoint"}}, {"evaluate", {"original"}},
        {"augment", {"dataset"}},   {"sweep", {"checkpoint"}},    {"cca", {"checkpoint"}},
        {"control", {"checkpoint"}},
    };
    return table;
}

void add_run_options(CLI::App* app, RunConfig& rc) {
    app->add_option("--config", "key=value file; command-line flags take precedence")
        ->check(CLI::ExistingFile);
    app->add_option("--dataset", rc.dataset, "UCR-format dataset (label first)")
        ->check(CLI::ExistingFile);
    app->add_option("--original", rc.original, "UCR-format reference set for evaluate")
        ->check(CLI::ExistingFile);
    app->add_option("--checkpoint", rc.checkpoint, "trained model checkpoint")
        ->check(CLI::ExistingFile);
    app->add_option("--out", rc.out, "output directory");
    app->add_option("--seed", rc.seed, "random seed");

    app->add_option("--epochs", rc.epochs)->check(CLI::PositiveNumber);
    app->add_option("--units", rc.units, "LSTM units per layer")->check(CLI::PositiveNumber);
    app->add_option("--layers", rc.layers, "stacked LSTM layers")->check(CLI::PositiveNumber);
    app->add_option("--unroll", rc.unroll, "extra discriminator steps per generator step")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--batch", rc.batch, "minibatch size")->check(CLI::PositiveNumber);
    app->add_option("--dz", rc.latent_dim, "latent values per time step")->check(CLI::PositiveNumber);
    app->add_option("--lr", rc.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    app->add_option("--loss", rc.loss, "generator loss")
        ->check(CLI::IsMember({"saturating", "non-saturating"}));
    app->add_option("--checkpoint-every", rc.checkpoint_every, "epochs between checkpoints, 0 = off")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--log-every", rc.log_every, "epochs between progress lines, 0 = auto")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--train-count", rc.train_count, "random training subset size, 0 = all");
    app->add_option("--train-per-class", rc.train_per_class, "training subset size per class")
        ->delimiter(',');

    app->add_option("--class", rc.class_label, "class index 1..C (generate: 0 = every class)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--count", rc.count, "series to produce per class")->check(CLI::PositiveNumber);
    app->add_flag("--denormalize", rc.denormalize, "map generated series back to raw units");
    app->add_option("--target", rc.targets, "name=path of a set to compare (repeatable)");
    app->add_option("--n", rc.n, "series drawn per group, 0 = smallest group");
    app->add_option("--k", rc.k, "medoids per class and target, 0 = skip clustering");
    app->add_flag("--baselines", rc.baselines,
                  "also compare noise, interp, extrap and hmm sets built from the original");

    app->add_option("--method", rc.method, "augmentation method")
        ->check(CLI::IsMember({"noise", "interp", "extrap", "hmm"}));
    app->add_option("--gamma", rc.gamma, "noise scale")->check(CLI::NonNegativeNumber);
    app->add_option("--states", rc.max_states, "largest HMM state count tried")
        ->check(CLI::PositiveNumber);
    app->add_option("--mixtures", rc.mixtures, "Gaussians per HMM state")->check(CLI::PositiveNumber);

    app->add_option("--steps", rc.steps, "label sweep rows")->check(CLI::Range(2, 100000));
    app->add_option("--samples", rc.samples, "latent samples for CCA")->check(CLI::PositiveNumber);
    app->add_option("--profile", rc.profile, "feature set")->check(CLI::IsMember({"ecg", "eeg"}));
    app->add_option("--scales", rc.scales, "comma-separated loading scale grid")->delimiter(',');
    app->add_option("--samples-per-scale", rc.samples_per_scale)->check(CLI::PositiveNumber);
}

std::string option_key(const std::string& arg) {
    if (arg.rfind("--", 0) != 0) return {};
    return arg.substr(2, arg.find('=') - 2);
}

// Subcommand first, then config-file arguments whose keys are not given on the
// command line, then the command line itself.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::optional<fs::path> config;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto key = option_key(args[i]);
        if (key.empty()) continue;
        given.insert(key);
        if (key != "config") continue;
        const auto eq = args[i].find('=');
        if (eq != std::string::npos)
            config = args[i].substr(eq + 1);
        else if (i + 1 < args.size())
            config = args[i + 1];
    }
    if (!config || args.empty()) return args;

    std::vector<std::string> out;
    std::size_t start = 0;
    if (args[0].rfind("-", 0) != 0) {
        out.push_back(args[0]);
        start = 1;
    }
    for (auto& a : read_config_args(*config)) {
        const auto key = option_key(a);
        if (key == "config") throw ConfigError("config files cannot include other config files");
        if (!given.count(key)) out.push_back(std::move(a));
    }
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(start), args.end());
    return out;
}

// key=value lines that reproduce the parsed configuration when fed back with --config.
std::string config_snapshot(const CLI::App& app) {
    std::ostringstream os;
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const auto& key = opt->get_lnames().front();
        if (key == "help" || key == "config") continue;
        if (opt->count() > 0) {
            const auto results = opt->results();
            if (key == "target") {
                for (const auto& r : results) os << key << '=' << r << '\n';
            } else {
                os << key << '=';
                for (std::size_t i = 0; i < results.size(); ++i) os << (i ? "," : "") << results[i];
                os << '\n';
            }
        } else {
            const auto def = opt->get_default_str();
            if (!def.empty() && def != "[]" && def != "{}") os << key << '=' << def << '\n';
        }
    }
    return os.str();
}

void write_manifest(const fs::path& out_dir, const std::string& command, const CLI::App& app,
                    const std::vector<std::string>& args, std::uint64_t seed) {
    std::ostringstream os;
    os << "# tsgan " << kVersion << '\n'
       << "# command: " << command << '\n'
       << "# argv:";
    for (const auto& a : args) os << ' ' << a;
    os << '\n'
       << "# seed: " << seed << '\n'
       << "# eigen: " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
       << EIGEN_MINOR_VERSION << '\n'
       << "# compiler: " << __VERSION__ << '\n'
       << "# normalization: global min/max over all points of the training set\n"
       << "# checkpoint format version: " << kCheckpointVersion << '\n'
       << "# rerun with: tsgan " << command << " --config <this file>\n"
       << config_snapshot(app);
    write_file_atomic(out_dir / "manifest.txt", os.str());
}

// Remaps `target` labels onto the classes of `reference` by original label token.
void align_labels(Dataset& target, const Dataset& reference, const std::string& name) {
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < reference.label_names.size(); ++k)
        index[reference.label_names[k]] = static_cast<int>(k) + 1;
    for (auto& label : target.labels) {
        const auto& token = target.label_names[static_cast<std::size_t>(label - 1)];
        auto it = index.find(token);
        if (it == index.end())
            throw ArgumentError("target '" + name + "' uses label '" + token +
                                "' which does not occur in the original set");
        label = it->second;
    }
    target.label_names = reference.label_names;
    target.num_classes = reference.num_classes;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
    Dataset raw = load_ucr(rc.dataset);
    if (!rc.train_per_class.empty())
        raw = subsample_training(raw, rc.train_per_class, rc.seed);
    else if (rc.train_count > 0)
        raw = subsample_training(raw, rc.train_count, rc.seed);
    const Dataset data = normalize_minmax(raw);

    TrainConfig tc;
    tc.epochs = rc.epochs;
    tc.batch_size = rc.batch;
    tc.unroll = rc.unroll;
    tc.learning_rate = rc.learning_rate;
    tc.latent_dim = rc.latent_dim;
    tc.units = rc.units;
    tc.layers = rc.layers;
    tc.seed = rc.seed;
    tc.loss = rc.loss == "non-saturating" ? GeneratorLoss::non_saturating : GeneratorLoss::saturating;
    tc.checkpoint_every = rc.checkpoint_every;
    tc.checkpoint_dir = rc.out / "checkpoints";

    const int log_every = rc.log_every > 0 ? rc.log_every : std::max(1, rc.epochs / 20);
    out << "training on " << data.size() << " series, T=" << data.length
        << ", C=" << data.num_classes << '\n';
    const auto result = train(data, tc, [&](int epoch, const Trainer& t) {
        if (epoch % log_every != 0 && epoch != rc.epochs) return;
        const auto& last = t.history().records.back();
        out << "epoch " << epoch << " d_objective " << last.d_objective << " g_objective "
            << last.g_objective << '\n';
    });

    save_checkpoint(result.model, rc.out / "model.ckpt");
    result.history.write_csv(rc.out / "history.csv");
    write_ucr(data, rc.out / "train.tsv");
    out << "wrote " << (rc.out / "model.ckpt").string() << '\n';
    return 0;
}

int cmd_generate(const RunConfig& rc, std::ostream& out) {
    const GanModel model = load_checkpoint(rc.checkpoint);
    Rng rng(rc.seed);
    Dataset generated = rc.class_label == 0 ? generate_all_classes(model, rc.count, rng)
                                            : generate_dataset(model, rc.class_label, rc.count, rng);
    if (rc.denormalize) {
        for (auto& s : generated.series) s = denormalize(s, model.meta.norm_min, model.meta.norm_max);
        generated.normalized = false;
    }
    write_ucr(generated, rc.out / "generated.tsv");
    out << "wrote " << generated.size() << " series to " << (rc.out / "generated.tsv").string()
        << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out) {
    const Dataset original = load_ucr(rc.original);
    Rng rng(rc.seed);

    std::vector<NamedDataset> targets;
    for (const auto& entry : rc.targets) {
        const auto eq = entry.find('=');
        const fs::path path = eq == std::string::npos ? fs::path(entry) : fs::path(entry.substr(eq + 1));
        const std::string name = eq == std::string::npos ? path.stem().string() : entry.substr(0, eq);
        if (!fs::exists(path)) throw ConfigError("target file '" + path.string() + "' does not exist");
        Dataset data = load_ucr(path);
        align_labels(data, original, name);
        targets.push_back({name, std::move(data)});
    }
    if (rc.baselines) {
        std::size_t per_class = 0;
        for (int c = 1; c <= original.num_classes; ++c)
            per_class = std::max(per_class, original.class_count(c));
        AugmentOptions options;
        options.gamma = rc.gamma;
        options.hmm.num_mixtures = rc.mixtures;
        options.hmm.state_range.clear();
        for (int s = 1; s <= rc.max_states; ++s) options.hmm.state_range.push_back(s);
        for (auto method : {AugmentMethod::noise, AugmentMethod::interpolate,
                            AugmentMethod::extrapolate, AugmentMethod::hmm})
            targets.push_back(
                {to_string(method), augment_dataset(original, method, per_class, rng, options)});
    }

    const auto reports = evaluate_protocol(original, targets, rc.n, rng);
    const auto csv = similarity_csv(reports);
    write_file_atomic(rc.out / "similarity.csv", csv);
    out << csv;

    if (rc.k > 0) {
        std::ostringstream os;
        os << "target,class,medoid,index,cost\n";
        for (const auto& t : targets) {
            for (int c = 1; c <= original.num_classes; ++c) {
                const auto idx = t.data.class_indices(c);
                if (idx.size() < rc.k) continue;
                const auto members = t.data.class_members(c);
                const auto km = k_medoids(members, rc.k);
                for (std::size_t j = 0; j < km.medoids.size(); ++j)
                    os << t.name << ',' << c << ',' << j + 1 << ',' << idx[km.medoids[j]] << ','
                       << format_double(km.cost) << '\n';
            }
        }
        write_file_atomic(rc.out / "medoids.csv", os.str());
    }
    return 0;
}

int cmd_augment(const RunConfig& rc, std::ostream& out) {
    const Dataset data = load_ucr(rc.dataset);
    Rng rng(rc.seed);
    AugmentOptions options;
    options.gamma = rc.gamma;
    options.hmm.num_mixtures = rc.mixtures;
    options.hmm.state_range.clear();
    for (int s = 1; s <= rc.max_states; ++s) options.hmm.state_range.push_back(s);
    const auto method = parse_augment_method(rc.method);
    const auto augmented =
        augment_dataset(data, method, static_cast<std::size_t>(rc.count), rng, options);
    const auto path = rc.out / ("augment_" + to_string(method) + ".tsv");
    write_ucr(augmented, path);
    out << "wrote " << augmented.size() << " series to " << path.string() << '\n';
    return 0;
}

Matrix random_latent(int length, int latent_dim, Rng& rng) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Matrix z(length, latent_dim);
    for (Eigen::Index t = 0; t < z.rows(); ++t)
        for (Eigen::Index k = 0; k < z.cols(); ++k) z(t, k) = uniform(rng);
    return z;
}

int cmd_sweep(const RunConfig& rc, std::ostream& out) {
    const GanModel model = load_checkpoint(rc.checkpoint);
    Rng rng(rc.seed);
    const auto sweep =
        label_sweep(model, random_latent(model.meta.length, model.meta.latent_dim, rng), rc.steps);
    write_file_atomic(rc.out / "sweep.csv", sweep_csv(sweep));
    out << "wrote " << sweep.values.rows() << " rows to " << (rc.out / "sweep.csv").string() << '\n';
    return 0;
}

std::vector<std::string> latent_names(int length, int latent_dim) {
    std::vector<std::string> names;
    for (int t = 1; t <= length; ++t)
        for (int k = 1; k <= latent_dim; ++k)
            names.push_back(latent_dim == 1 ? "z" + std::to_string(t)
                                            : "z" + std::to_string(t) + "_" + std::to_string(k));
    return names;
}

int check_class(const GanModel& model, int class_label) {
    if (class_label < 1 || class_label > model.meta.num_classes)
        throw ArgumentError("--class must be within 1.." + std::to_string(model.meta.num_classes));
    return class_label;
}

CcaResult fit_cca(const RunConfig& rc, const GanModel& model, FeatureProfile profile, Rng& rng) {
    const auto sample =
        sample_latent_features(model, check_class(model, rc.class_label), rc.samples, profile, rng);
    return cca_fit(sample.latents, sample.features);
}

int cmd_cca(const RunConfig& rc, std::ostream& out) {
    const GanModel model = load_checkpoint(rc.checkpoint);
    const auto profile = parse_profile(rc.profile);
    Rng rng(rc.seed);
    const auto cca = fit_cca(rc, model, profile, rng);
    write_file_atomic(rc.out / "loadings.csv",
                      loadings_csv(cca, latent_names(model.meta.length, model.meta.latent_dim),
                                   feature_names(profile)));
    std::ostringstream os;
    os << "component,correlation\n";
    for (int k = 0; k < cca.components(); ++k)
        os << k + 1 << ',' << format_double(cca.correlations[k]) << '\n';
    write_file_atomic(rc.out / "correlations.csv", os.str());
    out << os.str();
    return 0;
}

int cmd_control(const RunConfig& rc, std::ostream& out) {
    const GanModel model = load_checkpoint(rc.checkpoint);
    const auto profile = parse_profile(rc.profile);
    Rng rng(rc.seed);
    const auto cca = fit_cca(rc, model, profile, rng);
    const auto grid = rc.scales.empty() ? default_scale_grid() : rc.scales;
    const auto table =
        control_experiment(model, cca, grid, rc.class_label, rc.samples_per_scale, profile);
    const auto csv = control_csv(table);
    write_file_atomic(rc.out / "control.csv", csv);

    Dataset generated;
    generated.length = model.meta.length;
    generated.num_classes = model.meta.num_classes;
    generated.label_names = model.meta.label_names;
    generated.normalized = true;
    generated.norm_min = model.meta.norm_min;
    generated.norm_max = model.meta.norm_max;
    generated.series = table.generated;
    generated.labels.assign(table.generated.size(), rc.class_label);
    write_ucr(generated, rc.out / "control_generated.tsv");
    out << csv;
    return 0;
}

} // namespace

std::vector<std::string> read_config_args(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::vector<std::string> args;
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key=value, got '" + line + "'");
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Conditional recurrent GAN for biosignal time series", "tsgan"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    using Handler = int (*)(const RunConfig&, std::ostream&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"train", "train a conditional GAN on a UCR dataset", cmd_train},
        {"generate", "sample series from a checkpoint", cmd_generate},
        {"evaluate", "average DTW similarity of sets against an original set", cmd_evaluate},
        {"augment", "build a conventional augmentation set", cmd_augment},
        {"sweep", "interpolate the label between two classes", cmd_sweep},
        {"cca", "canonical correlation between latent inputs and features", cmd_cca},
        {"control", "generate from scaled canonical loadings", cmd_control},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, description, handler] : commands) {
        auto* sub = app.add_subcommand(name, description);
        add_run_options(sub, rc);
        subs[name] = sub;
    }

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(args);
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << "\n";
        err << "run 'tsgan --help' for usage\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    for (const auto& [name, description, handler] : commands) {
        const auto* sub = subs.at(name);
        if (!sub->parsed()) continue;
        for (const auto& key : required_options().at(name)) {
            if (sub->get_option("--" + key)->count() == 0) {
                err << "error: " << name << " requires --" << key << '\n';
                return 2;
            }
        }
        try {
            fs::create_directories(rc.out);
            write_manifest(rc.out, name, *sub, args, rc.seed);
            return handler(rc, out);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const ArgumentError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        }
    }
    err << "error: no subcommand given\n";
    return 2;
}

} // namespace tsgan
