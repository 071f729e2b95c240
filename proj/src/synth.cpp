#include "deepboost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "deepboost/error.hpp"

namespace deepboost {

namespace {

Image bars_image(bool horizontal, const SynthOptions& opts, bool distract, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, opts.noise_sigma);
    const int n = opts.size;
    const double background = 0.3 + 0.2 * unit(rng);
    Matrix m(n, n, background);
    const int bars = 2 + static_cast<int>(rng() % 3);
    for (int b = 0; b < bars; ++b) {
        const int thickness = 2 + static_cast<int>(rng() % 2);
        const int pos = static_cast<int>(rng() % static_cast<std::uint64_t>(n - thickness));
        const double contrast = 0.25 + 0.35 * unit(rng);
        for (int t = 0; t < thickness; ++t)
            for (int i = 0; i < n; ++i) {
                if (horizontal)
                    m(pos + t, i) = background + contrast;
                else
                    m(i, pos + t) = background + contrast;
            }
    }
    if (distract) {
        const double phase = unit(rng) * 6.0;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) m(y, x) += 0.2 * std::sin((x + y + phase) * 2.0 * M_PI / 6.0);
    }
    for (double& v : m.values()) v = std::clamp(v + noise(rng), 0.0, 1.0);
    return Image(std::move(m));
}

}  // namespace

LabeledDataset synth_bars(const SynthOptions& opts) {
    if (opts.n_per_class < 1) throw ConfigError("n_per_class must be >= 1");
    if (opts.size < 8) throw ConfigError("synthetic images must be at least 8 pixels");
    if (opts.distractor_fraction < 0.0 || opts.distractor_fraction > 1.0)
        throw ConfigError("distractor fraction must lie in [0, 1]");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LabeledDataset ds;
    ds.class_names = {"horizontal", "vertical"};
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < opts.n_per_class; ++i) {
            const bool distract = unit(rng) < opts.distractor_fraction;
            ds.images.push_back(bars_image(c == 0, opts, distract, rng));
            ds.labels.push_back(c);
        }
    return ds;
}

LabeledDataset make_synthetic(const std::string& name, const SynthOptions& opts) {
    if (name == "synth-bars") return synth_bars(opts);
    if (name == "synth-bars-distract") {
        SynthOptions o = opts;
        if (o.distractor_fraction == 0.0) o.distractor_fraction = 0.2;
        return synth_bars(o);
    }
    throw ConfigError("unknown synthetic generator '" + name + "' (known: synth-bars, synth-bars-distract)");
}

void write_dataset_dir(const LabeledDataset& ds, const std::filesystem::path& root) {
    ds.validate();
    std::vector<int> counter(ds.class_names.size(), 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int c = ds.labels[i];
        char name[32];
        std::snprintf(name, sizeof(name), "%05d.png", counter[c]++);
        write_png(root / ds.class_names[c] / name, ds.images[i].pixels());
    }
}

}  // namespace deepboost
