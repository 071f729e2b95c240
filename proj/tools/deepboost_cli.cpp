// deepboost: train, evaluate and inspect layer-wise boosted filter-bank models.
//
//   deepboost synth --name synth-bars --n-per-class 100 --seed 7 --out data/bars
//   deepboost train --dataset synth-bars --layers 2 --rounds 50 --seed 7 --out run
//   deepboost evaluate --model run/model.dpb --dataset synth-bars --split test --out run/eval
//   deepboost predict --model run/model.dpb --image some.png
//   deepboost inspect-filters --model run/model.dpb --out run/filters
//   deepboost render-template --model run/model.dpb --class 0 --layer 1 --out run/t.png
//
// Exit codes: 0 ok, 1 usage/config, 2 data error, 3 training failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "deepboost/deepmodel.hpp"
#include "deepboost/evalkit.hpp"
#include "deepboost/imagekit.hpp"
#include "deepboost/kernels.hpp"
#include "deepboost/model_io.hpp"
#include "deepboost/render.hpp"
#include "deepboost/synth.hpp"

namespace fs = std::filesystem;
using namespace deepboost;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;

// Offset between the synthetic train split and the test split seeds.
constexpr std::uint64_t kTestSeedOffset = 1000003;

struct DatasetArgs {
    std::string kind = "synth-bars";
    std::string path;
    std::string split = "train";
    int n_per_class = 100;
    int target_size = 32;
    double distractor = 0.0;
};

struct RunConfig {
    DatasetArgs data;
    DeepBoostConfig model;
    std::string out = "deepboost-out";
    int jobs = 0;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& d) {
    cmd->add_option("--dataset", d.kind, "dataset kind: synth-bars, synth-bars-distract, dir, cifar10")
        ->check(CLI::IsMember({"synth-bars", "synth-bars-distract", "dir", "cifar10"}));
    cmd->add_option("--data", d.path, "dataset path (dir: <root>/<class>/*.png; cifar10: batch file or directory)");
    cmd->add_option("--split", d.split, "synthetic split (train or test)")->check(CLI::IsMember({"train", "test"}));
    cmd->add_option("--synth-n", d.n_per_class, "synthetic images per class")->check(CLI::PositiveNumber);
    cmd->add_option("--target-size", d.target_size, "images are resized to this square size (dir datasets)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--distractor", d.distractor, "fraction of synthetic images with distractor texture")
        ->check(CLI::Range(0.0, 1.0));
}

LabeledDataset load_dataset(const DatasetArgs& d, std::uint64_t seed) {
    if (d.kind == "dir") {
        if (d.path.empty()) throw ConfigError("--data is required for --dataset dir");
        auto ds = load_image_dir(d.path, d.target_size);
        if (ds.skipped_files) std::cerr << "warning: skipped " << ds.skipped_files << " unreadable file(s)\n";
        return ds;
    }
    if (d.kind == "cifar10") {
        if (d.path.empty()) throw ConfigError("--data is required for --dataset cifar10");
        return load_cifar10(d.path);
    }
    SynthOptions so;
    so.n_per_class = d.n_per_class;
    so.seed = d.split == "test" ? seed + kTestSeedOffset : seed;
    so.size = d.target_size;
    so.distractor_fraction = d.distractor;
    return make_synthetic(d.kind, so);
}

int dataset_side(const LabeledDataset& ds) {
    if (ds.images.empty()) throw DataError("dataset is empty");
    const int side = ds.images.front().width();
    for (const auto& img : ds.images)
        if (img.width() != side || img.height() != side)
            throw DataError("dataset images must all be square and the same size");
    return side;
}

void write_train_artifacts(const fs::path& out, const DeepBoostModel& model, const TrainingLog& log) {
    for (const auto& cm : model.class_models) {
        const std::string cname = model.class_names[cm.class_id];
        for (std::size_t l = 0; l < cm.layers.size(); ++l) {
            const auto& lm = cm.layers[l];
            const fs::path dir = out / "classes" / cname / ("layer" + std::to_string(l + 1));
            write_trace_csv(dir / "objective.csv", lm.trace);
            write_round_csv(dir / "rounds.csv", lm.rounds);
            write_png(dir / "filters.png", render_filter_grid(lm.dictionary.filters));
            write_png(dir / "template.png",
                      render_template(cm, static_cast<int>(l + 1), model.config.target_size * 4,
                                      model.config.target_size)
                          .canvas);
        }
    }
    const DeepBoostConfig& c = model.config;
    nlohmann::json j;
    j["config"] = {{"layers", c.layers},
                   {"rounds", c.rounds},
                   {"lambda", c.joint.lambda},
                   {"eta", c.joint.eta},
                   {"grad_steps", c.joint.grad_steps},
                   {"outer_iters", c.joint.outer_iters},
                   {"tol", c.joint.tol},
                   {"bins", c.joint.bins},
                   {"orientations", c.gabor.orientations},
                   {"compression_threshold", c.compression_threshold},
                   {"compress", c.compress},
                   {"raw_compose", c.compose_mode == ComposeMode::raw},
                   {"seed", c.seed},
                   {"target_size", c.target_size}};
    j["classes"] = model.class_names;
    j["warnings"] = log.warnings;
    for (const auto& t : log.layers)
        j["layers"].push_back({{"class", model.class_names[t.class_id]},
                               {"layer", t.layer},
                               {"dictionary_size", t.dictionary_size},
                               {"composed_before_compression", t.composed_before_compression},
                               {"seconds", t.seconds}});
    for (const auto& cm : model.class_models)
        for (std::size_t l = 0; l < cm.layers.size(); ++l) {
            const auto& lm = cm.layers[l];
            j["selected"][model.class_names[cm.class_id]].push_back(
                {{"layer", l + 1}, {"selected_filters", lm.selected_ids.size()}, {"stumps", lm.classifier.stumps.size()},
                 {"stalled", lm.stalled}});
        }
    std::ofstream(out / "training_report.json") << j.dump(2) << "\n";
}

int run_train(RunConfig& rc) {
    kernels::set_num_threads(rc.jobs);
    LabeledDataset ds = load_dataset(rc.data, rc.model.seed);
    ds.validate_for_multiclass();
    rc.model.target_size = dataset_side(ds);
    rc.model.validate();
    const fs::path out(rc.out);
    fs::create_directories(out);

    const auto t0 = std::chrono::steady_clock::now();
    TrainingLog log;
    DeepBoostModel model = train_multiclass(ds, rc.model, &log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& w : log.warnings) std::cerr << "warning: " << w << "\n";

    save_model(model, out / "model.dpb");
    write_train_artifacts(out, model, log);

    int correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (predict(model, ds.images[i]).label == ds.labels[i]) ++correct;
    std::printf("trained %d classes x %d layer(s) on %zu images in %.1fs; training accuracy %.4f\n",
                model.num_classes(), rc.model.layers, ds.size(), secs,
                static_cast<double>(correct) / static_cast<double>(ds.size()));
    std::printf("model written to %s\n", (out / "model.dpb").string().c_str());
    return 0;
}

// Keys are long option names ("lambda", "grad-steps" or "grad_steps").
// Options already given on the command line win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (item.name == "++" || item.name == "--") continue;  // section markers
        std::string key = item.name;
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config") throw ConfigError("config files cannot include other config files");
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (!opt) throw ConfigError("unknown key '" + item.name + "' in " + path);
        if (opt->count() > 0) continue;
        try {
            opt->add_result(item.inputs);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("bad value for '" + item.name + "' in " + path + ": " + e.what());
        }
    }
}

DeepBoostModel open_model(const std::string& path) {
    if (!fs::exists(path)) throw DataError("model file not found: " + path);
    return load_model(path);
}

int run_evaluate(const std::string& model_path, RunConfig& rc, bool ages) {
    kernels::set_num_threads(rc.jobs);
    const DeepBoostModel model = open_model(model_path);
    rc.data.target_size = model.config.target_size;
    LabeledDataset ds = load_dataset(rc.data, rc.model.seed);
    ds.validate();
    const int side = dataset_side(ds);
    if (side != model.config.target_size)
        throw DimensionError("dataset images are " + std::to_string(side) + "x" + std::to_string(side) +
                             " but the model expects " + std::to_string(model.config.target_size) + "x" +
                             std::to_string(model.config.target_size));
    if (ds.class_names != model.class_names)
        throw DataError("dataset classes (" + std::to_string(ds.num_classes()) +
                        ") do not match the model's classes (" + std::to_string(model.num_classes()) + ")");

    std::vector<int> predicted(ds.size());
    const int n = static_cast<int>(ds.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < n; ++i) predicted[i] = predict(model, ds.images[i]).label;

    const EvalReport rep = evaluate_predictions(ds.labels, predicted, model.class_names, ages);
    write_report(rc.out, rep);
    std::printf("accuracy %.4f on %zu images\n", rep.accuracy, ds.size());
    if (rep.mae) std::printf("MAE %.4f\n", *rep.mae);
    std::printf("report written to %s\n", (fs::path(rc.out) / "report.json").string().c_str());
    return 0;
}

int run_predict(const std::string& model_path, const std::vector<std::string>& images) {
    const DeepBoostModel model = open_model(model_path);
    for (const auto& f : images) {
        const Image img = load_image_file(f, model.config.target_size);
        const Prediction p = predict(model, img);
        std::printf("%s\t%s", f.c_str(), model.class_names[p.label].c_str());
        for (double s : p.scores) std::printf("\t%.6f", s);
        std::printf("\n");
    }
    return 0;
}

int run_inspect(const std::string& model_path, const std::string& out_dir) {
    const DeepBoostModel model = open_model(model_path);
    const fs::path out(out_dir);
    for (const auto& cm : model.class_models) {
        const std::string cname = model.class_names[cm.class_id];
        for (std::size_t l = 0; l < cm.layers.size(); ++l) {
            const auto& lm = cm.layers[l];
            const fs::path base = out / cname;
            write_png(base / ("layer" + std::to_string(l + 1) + "_filters.png"), render_filter_grid(lm.dictionary.filters));
            write_png(base / ("layer" + std::to_string(l + 1) + "_similarity.png"),
                      render_similarity(lm.dictionary.filters));
            std::vector<Filter> sel;
            for (int id : lm.selected_ids) sel.push_back(lm.dictionary.filters[lm.dictionary.index_of(id)]);
            if (!sel.empty())
                write_png(base / ("layer" + std::to_string(l + 1) + "_selected.png"), render_filter_grid(sel));
            std::printf("%s layer %zu: %zu filters, %zu selected, %zu stumps\n", cname.c_str(), l + 1,
                        lm.dictionary.size(), lm.selected_ids.size(), lm.classifier.stumps.size());
        }
    }
    return 0;
}

int run_render(const std::string& model_path, const std::string& cls, int layer, int canvas, const std::string& out) {
    const DeepBoostModel model = open_model(model_path);
    int class_id = -1;
    for (int c = 0; c < model.num_classes(); ++c)
        if (model.class_names[c] == cls || std::to_string(c) == cls) class_id = c;
    if (class_id < 0) throw DataError("unknown class '" + cls + "'");
    const TemplateRender t = render_template(model.class_models[class_id], layer, canvas, model.config.target_size);
    if (t.blank) std::cerr << "warning: layer " << layer << " has no selected features; template is blank\n";
    write_png(out, t.canvas);
    std::printf("template written to %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layer-wise boosted analysis-dictionary image classifier"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    RunConfig rc;
    auto& mc = rc.model;

    auto* train = app.add_subcommand("train", "train a one-vs-all model");
    std::string config_path;
    train->add_option("--config", config_path, "flat key = value config file; command-line flags override it");
    add_dataset_options(train, rc.data);
    train->add_option("--layers", mc.layers, "number of layers L")->check(CLI::PositiveNumber);
    train->add_option("--rounds", mc.rounds, "boosting rounds per layer (one value, or one per layer)")
        ->delimiter(',');
    train->add_option("--lambda", mc.joint.lambda, "regularizer weight")->check(CLI::NonNegativeNumber);
    train->add_option("--eta", mc.joint.eta, "initial gradient step")->check(CLI::PositiveNumber);
    train->add_option("--grad-steps", mc.joint.grad_steps, "gradient steps per dictionary update");
    train->add_option("--outer-iters", mc.joint.outer_iters, "max boosting/dictionary alternations per layer");
    train->add_option("--tol", mc.joint.tol, "relative objective decrease treated as converged");
    train->add_option("--bins", mc.joint.bins, "histogram bins C")->check(CLI::PositiveNumber);
    train->add_option("--orientations", mc.gabor.orientations, "Gabor orientations at layer 1")
        ->check(CLI::PositiveNumber);
    train->add_option("--threshold", mc.compression_threshold, "compression distance threshold");
    bool no_compress = false, raw_compose = false;
    train->add_flag("--no-compress", no_compress, "keep every composed filter");
    train->add_flag("--raw-compose", raw_compose, "skip zero-mean/unit-norm after composition");
    train->add_option("--seed", mc.seed, "random seed")->envname("DEEPBOOST_SEED");
    train->add_option("--out", rc.out, "output directory");
    train->add_option("--jobs", rc.jobs, "worker threads (0 = all)");

    std::string model_path;
    bool ages = false;
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a model on a labelled dataset");
    evaluate->add_option("--model", model_path, "model file")->required();
    add_dataset_options(evaluate, rc.data);
    evaluate->add_option("--seed", mc.seed, "seed of the synthetic dataset")->envname("DEEPBOOST_SEED");
    evaluate->add_flag("--ages", ages, "class names are ages: also report MAE and cumulative scores");
    evaluate->add_option("--out", rc.out, "report directory");
    evaluate->add_option("--jobs", rc.jobs, "worker threads (0 = all)");

    std::vector<std::string> images;
    auto* predict_cmd = app.add_subcommand("predict", "classify image files");
    predict_cmd->add_option("--model", model_path, "model file")->required();
    predict_cmd->add_option("--image", images, "image file(s)")->required();

    std::string synth_name = "synth-bars";
    SynthOptions so;
    std::string synth_out = "synth-data";
    auto* synth = app.add_subcommand("synth", "write a synthetic image-directory dataset");
    synth->add_option("--name", synth_name, "generator: synth-bars or synth-bars-distract");
    synth->add_option("--n-per-class", so.n_per_class, "images per class")->check(CLI::PositiveNumber);
    synth->add_option("--seed", so.seed, "random seed")->envname("DEEPBOOST_SEED");
    synth->add_option("--size", so.size, "image side in pixels");
    synth->add_option("--distractor", so.distractor_fraction, "fraction with distractor texture");
    synth->add_option("--out", synth_out, "output directory");

    std::string inspect_out = "filters";
    auto* inspect = app.add_subcommand("inspect-filters", "export filter grids and similarity matrices");
    inspect->add_option("--model", model_path, "model file")->required();
    inspect->add_option("--out", inspect_out, "output directory");

    std::string cls = "0";
    int layer = 1, canvas = 128;
    std::string template_out = "template.png";
    auto* render = app.add_subcommand("render-template", "render a class template for one layer");
    render->add_option("--model", model_path, "model file")->required();
    render->add_option("--class", cls, "class name or index");
    render->add_option("--layer", layer, "layer (1-based)");
    render->add_option("--canvas", canvas, "canvas side in pixels");
    render->add_option("--out", template_out, "output PNG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*train) {
            if (!config_path.empty()) apply_config_file(train, config_path);
            mc.compress = !no_compress;
            mc.compose_mode = raw_compose ? ComposeMode::raw : ComposeMode::normalized;
            return run_train(rc);
        }
        if (*evaluate) return run_evaluate(model_path, rc, ages);
        if (*predict_cmd) return run_predict(model_path, images);
        if (*synth) {
            write_dataset_dir(make_synthetic(synth_name, so), synth_out);
            std::printf("wrote %d images per class to %s\n", so.n_per_class, synth_out.c_str());
            return 0;
        }
        if (*inspect) return run_inspect(model_path, inspect_out);
        if (*render) return run_render(model_path, cls, layer, canvas, template_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TrainingError& e) {
        std::cerr << "training failed: " << e.what() << "\n";
        return kExitTraining;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
