#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "spw/envelope.hpp"
#include "spw/image_io.hpp"
#include "spw/parallel.hpp"
#include "spw/pyramid.hpp"

namespace spw::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool has_extension(const fs::path& p, const char* ext) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

}  // namespace

// ---------------------------------------------------------------------------
// Record

Record::Record(std::string schema) { entries_.emplace_back("schema", std::move(schema)); }

void Record::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = value;
            return;
        }
    entries_.emplace_back(key, value);
}

void Record::set(const std::string& key, double value) { set(key, format_double(value)); }

void Record::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }

void Record::set_time(const std::string& stage, double milliseconds) {
    set("time_ms." + stage, milliseconds);
}

void Record::echo(const SpwConfig& cfg) {
    set("config.lambda", cfg.lambda);
    set("config.beta", cfg.beta);
    set("config.levels", cfg.levels);
    set("config.orientations", cfg.orientations);
    set("config.class_weights", std::string(to_string(cfg.class_weights)));
    set("config.reduction", std::string(to_string(cfg.reduction)));
    set("config.prediction_map", std::string(cfg.use_prediction_map ? "on" : "off"));
}

const std::string& Record::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw Error("record has no key '" + key + "'");
}

bool Record::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

std::string Record::str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
}

void Record::write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << str();
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

const char* to_string(ClassWeightMode m) {
    return m == ClassWeightMode::uniform ? "uniform" : "invfreq";
}

const char* to_string(Reduction r) { return r == Reduction::sum ? "sum" : "mean"; }

// ---------------------------------------------------------------------------
// Inputs

LabelInput load_labels(const fs::path& path, int classes) {
    LabelInput in{io::read_label_png(path), classes};
    const int max_id = *std::max_element(in.ids.values().begin(), in.ids.values().end());
    if (in.classes <= 0) in.classes = std::max(2, max_id + 1);
    if (max_id >= in.classes)
        throw DomainError("label '" + path.string() + "' contains class id " + std::to_string(max_id) +
                          " but only " + std::to_string(in.classes) + " classes were requested");
    return in;
}

ProbabilityField load_prediction(const fs::path& path, int classes) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && has_extension(entry.path(), ".pfm")) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (static_cast<int>(files.size()) != classes)
            throw ShapeError("prediction directory '" + path.string() + "' holds " +
                             std::to_string(files.size()) + " class maps, label has " +
                             std::to_string(classes) + " classes");
        std::vector<RealGrid> channels;
        for (const auto& f : files) channels.push_back(io::read_pfm(f));
        return ProbabilityField(std::move(channels));
    }
    if (classes != 2)
        throw ShapeError("prediction '" + path.string() +
                         "' is a single foreground map but the label has " + std::to_string(classes) +
                         " classes");
    RealGrid fg;
    if (has_extension(path, ".pfm")) {
        fg = io::read_pfm(path);
    } else {
        const io::GrayImage img = io::read_png(path);
        fg = img.pixels;
        for (double& x : fg.values()) x /= img.max_value();
    }
    return ProbabilityField::from_foreground(fg);
}

// ---------------------------------------------------------------------------
// decompose

Record cmd_decompose(const DecomposeOptions& opt) {
    Record rec("spw-decompose/1");
    auto t0 = Clock::now();
    RealGrid image;
    if (has_extension(opt.image, ".pfm")) {
        image = io::read_pfm(opt.image);
    } else {
        const io::GrayImage img = io::read_png(opt.image);
        image = img.pixels;
        for (double& x : image.values()) x /= img.max_value();
    }
    rec.set_time("read", elapsed_ms(t0));

    validate(opt.spec);
    t0 = Clock::now();
    const PaddedGrid padded = pad_to_multiple(image, size_multiple(opt.spec));
    const PyramidDecomposition pyr = decompose(padded.grid, opt.spec);
    rec.set_time("decompose", elapsed_ms(t0));

    rec.set("input", opt.image.string());
    rec.set("size", to_string(image.size()));
    rec.set("padded_size", to_string(pyr.size));
    rec.set("levels", opt.spec.levels);
    rec.set("orientations", opt.spec.orientations);

    t0 = Clock::now();
    fs::create_directories(opt.out_dir);
    int written = 0;
    auto emit = [&](const std::string& name, const RealGrid& grid, int level) {
        const Size crop{(image.height() + (1 << level) - 1) >> level,
                        (image.width() + (1 << level) - 1) >> level};
        const RealGrid out = crop_to(grid, crop);
        io::write_pfm(opt.out_dir / (name + ".pfm"), out);
        io::write_preview_png(opt.out_dir / (name + ".png"), out);
        rec.set("output." + name, to_string(out.size()));
        ++written;
    };
    emit("high_pass", pyr.high_pass, 0);
    for (int i = 0; i < opt.spec.levels; ++i)
        for (int k = 0; k < opt.spec.orientations; ++k)
            emit("band_L" + std::to_string(i + 1) + "_O" + std::to_string(k + 1),
                 amplitude(pyr.subbands[i][k], i + 1).grid, i);
    emit("low_pass", pyr.low_pass, opt.spec.levels - 1);
    rec.set("outputs", written);
    rec.set_time("write", elapsed_ms(t0));
    rec.write(opt.out_dir / "manifest.txt");
    return rec;
}

// ---------------------------------------------------------------------------
// weightmap

Record cmd_weightmap(const WeightmapOptions& opt) {
    Record rec("spw-weightmap/1");
    validate(opt.cfg);
    auto t0 = Clock::now();
    const LabelInput in = load_labels(opt.label, opt.classes);
    const LabelField label = LabelField::from_class_ids(in.ids, in.classes);
    std::optional<ProbabilityField> pred;
    if (opt.pred) pred = load_prediction(*opt.pred, in.classes);
    rec.set_time("read", elapsed_ms(t0));

    t0 = Clock::now();
    const WeightMap w = pred ? pixel_weights(label, *pred, opt.cfg) : pixel_weights(label, opt.cfg);
    rec.set_time("weights", elapsed_ms(t0));

    io::write_pfm(opt.out, w.grid);
    fs::path preview = opt.out;
    preview.replace_extension(".png");
    io::write_preview_png(preview, w.grid);

    const auto [lo, hi] = std::minmax_element(w.grid.values().begin(), w.grid.values().end());
    double mean = 0.0;
    for (double x : w.grid.values()) mean += x;
    mean /= static_cast<double>(w.grid.area());

    rec.echo(opt.cfg);
    rec.set("label", opt.label.string());
    rec.set("pred", opt.pred ? opt.pred->string() : std::string("none"));
    rec.set("mode", std::string(pred && opt.cfg.use_prediction_map ? "label+prediction" : "label-only"));
    rec.set("classes", in.classes);
    rec.set("size", to_string(w.grid.size()));
    rec.set("output", opt.out.string());
    rec.set("weight.min", *lo);
    rec.set("weight.max", *hi);
    rec.set("weight.mean", mean);
    return rec;
}

// ---------------------------------------------------------------------------
// loss

Record cmd_loss(const LossOptions& opt) {
    Record rec("spw-loss/1");
    validate(opt.cfg);
    auto t0 = Clock::now();
    const LabelInput in = load_labels(opt.label, opt.classes);
    const LabelField label = LabelField::from_class_ids(in.ids, in.classes);
    const ProbabilityField pred = load_prediction(opt.pred, in.classes);
    rec.set_time("read", elapsed_ms(t0));

    t0 = Clock::now();
    WeightMap w;
    if (opt.weights) {
        w.grid = io::read_pfm(*opt.weights);
        require_same_size(w.grid.size(), label.size(), "weight map '" + opt.weights->string() + "' and label");
        for (double x : w.grid.values())
            if (x < 0.0) throw DomainError("weight map '" + opt.weights->string() + "' has negative weights");
    } else {
        w = pixel_weights(label, pred, opt.cfg);
    }
    rec.set_time("weights", elapsed_ms(t0));
    t0 = Clock::now();
    const double loss = weighted_ce_loss(label, pred, w, opt.cfg.reduction);
    rec.set_time("loss", elapsed_ms(t0));

    rec.echo(opt.cfg);
    rec.set("label", opt.label.string());
    rec.set("pred", opt.pred.string());
    rec.set("weights", opt.weights ? opt.weights->string() : std::string("computed"));
    rec.set("classes", in.classes);
    rec.set("pixels", static_cast<std::int64_t>(label.size().area()));
    rec.set("loss", loss);
    return rec;
}

// ---------------------------------------------------------------------------
// metrics

Record cmd_metrics(const MetricsCmdOptions& opt) {
    Record rec("spw-metrics/1");
    const LabelGrid gt = io::read_label_png(opt.gt);
    const LabelGrid pred = io::read_label_png(opt.pred);
    require_same_size(gt.size(), pred.size(), "ground truth and prediction images");
    int classes = opt.classes;
    if (classes <= 0) {
        const int a = *std::max_element(gt.values().begin(), gt.values().end());
        const int b = *std::max_element(pred.values().begin(), pred.values().end());
        classes = std::max({2, a + 1, b + 1});
    }
    const SegmentationMetrics m = evaluate_all(gt, pred, classes, {opt.exclude_background});
    rec.set("gt", opt.gt.string());
    rec.set("pred", opt.pred.string());
    rec.set("classes", classes);
    rec.set("connectivity", 4);
    rec.set("components", std::string("on"));
    rec.set("exclude_background", std::string(opt.exclude_background ? "on" : "off"));
    rec.set("miou", m.miou);
    rec.set("mdice", m.mdice);
    rec.set("vi", m.vi);
    rec.set("ari", m.ari);
    return rec;
}

// ---------------------------------------------------------------------------
// bench

double median(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("median of an empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double fit_scaling_exponent(const std::vector<BenchRow>& rows) {
    if (rows.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const BenchRow& r : rows) {
        const double hw = static_cast<double>(r.size) * r.size;
        const double x = std::log(hw * std::log(hw));
        const double y = std::log(r.spw_ms);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(rows.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchResult run_bench(const BenchOptions& opt) {
    validate(opt.cfg);
    if (opt.reps < 1) throw DomainError("repetitions must be >= 1");
    BenchResult result;
    const FftPlanning previous = fft_planning();
    set_fft_planning(opt.planning);
    struct Restore {
        FftPlanning mode;
        ~Restore() { set_fft_planning(mode); }
    } restore{previous};
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Case {
        int size;
        LabelField label;
        ProbabilityField pred;
        std::vector<double> spw_times, ce_times;
    };
    std::vector<Case> cases;
    for (int size : opt.sizes) {
        if (size < 1) throw DomainError("benchmark sizes must be positive");
        RealGrid fg(Size{size, size});
        RealGrid prob(Size{size, size});
        for (std::size_t i = 0; i < fg.area(); ++i) {
            fg[i] = unit(rng) < 0.5 ? 1.0 : 0.0;
            prob[i] = unit(rng);
        }
        cases.push_back({size, LabelField::from_foreground(fg), ProbabilityField::from_foreground(prob), {}, {}});
    }

    // Untimed warm-up builds the filter banks and FFT plans. Repetitions then
    // cycle through the sizes so that slow spells on a shared machine hit
    // every size alike instead of one size's whole sample.
    volatile double sink = 0.0;
    for (const Case& c : cases) sink = pixel_weights(c.label, c.pred, opt.cfg).grid[0];
    for (int r = 0; r < opt.reps; ++r) {
        for (Case& c : cases) {
            auto t0 = Clock::now();
            const WeightMap w = pixel_weights(c.label, c.pred, opt.cfg);
            c.spw_times.push_back(elapsed_ms(t0));
            sink = w.grid[0];

            t0 = Clock::now();
            sink = cross_entropy_loss(c.label, c.pred, opt.cfg.reduction);
            c.ce_times.push_back(elapsed_ms(t0));
        }
    }
    (void)sink;
    for (const Case& c : cases) result.rows.push_back({c.size, median(c.spw_times), median(c.ce_times)});
    for (std::size_t i = 1; i < result.rows.size(); ++i)
        result.growth.push_back(result.rows[i].spw_ms / result.rows[i - 1].spw_ms);
    result.exponent = fit_scaling_exponent(result.rows);
    return result;
}

Record cmd_bench(const BenchOptions& opt, std::ostream& table) {
    const BenchResult result = run_bench(opt);
    Record rec("spw-bench/1");
    rec.echo(opt.cfg);
    rec.set("reps", opt.reps);
    rec.set("seed", static_cast<std::int64_t>(opt.seed));
    rec.set("statistic", std::string("median"));
    rec.set("threads", thread_count());
    rec.set("fft_planning", std::string(opt.planning == FftPlanning::measure ? "measure" : "estimate"));

    table << std::left << std::setw(12) << "size" << std::right << std::setw(14) << "SPW map (ms)"
          << std::setw(12) << "CE (ms)" << std::setw(16) << "dt to CE (ms)" << std::setw(10) << "ratio"
          << std::setw(10) << "growth" << '\n';
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const BenchRow& r = result.rows[i];
        const std::string key = std::to_string(r.size);
        rec.set_time("spw." + key, r.spw_ms);
        rec.set_time("ce." + key, r.ce_ms);
        rec.set_time("delta." + key, r.delta_ms());
        table << std::left << std::setw(12) << (key + "x" + key) << std::right << std::fixed
              << std::setprecision(3) << std::setw(14) << r.spw_ms << std::setw(12) << r.ce_ms
              << std::setw(16) << r.delta_ms() << std::setw(10) << std::setprecision(1)
              << r.spw_ms / r.ce_ms << std::setw(10);
        if (i > 0) {
            rec.set("timing.growth." + key, result.growth[i - 1]);
            table << std::setprecision(2) << result.growth[i - 1];
        } else {
            table << "-";
        }
        table << '\n';
    }
    rec.set("timing.exponent", result.exponent);
    table << "fitted exponent vs HW log HW: " << std::setprecision(3) << result.exponent << '\n';
    return rec;
}

// ---------------------------------------------------------------------------
// demo-train

namespace {

constexpr int kPatch = 5;
constexpr int kFeatures = kPatch * kPatch + 1;  // patch + bias
constexpr int kClasses = 2;

struct Sample {
    RealGrid image;
    RealGrid features;  // filled in by feature_image once the dataset exists
    LabelField label;
    LabelGrid ids;
};

// Thin sinusoidal curves, one pixel wide, on a noisy background.
Sample make_sample(int size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.15);
    RealGrid fg(Size{size, size});
    const int curves = 2 + static_cast<int>(unit(rng) * 2.0);
    for (int c = 0; c < curves; ++c) {
        const bool vertical = unit(rng) < 0.5;
        const double base = 8.0 + unit(rng) * (size - 16.0);
        const double amp = 2.0 + unit(rng) * 8.0;
        const double freq = 0.5 + unit(rng) * 1.5;
        const double phase = unit(rng) * 2.0 * std::numbers::pi;
        for (int t = 0; t < 4 * size; ++t) {
            const double s = t / 4.0;
            const double pos = base + amp * std::sin(2.0 * std::numbers::pi * freq * s / size + phase);
            const int a = static_cast<int>(std::lround(s));
            const int b = static_cast<int>(std::lround(pos));
            if (a < 0 || a >= size || b < 0 || b >= size) continue;
            if (vertical)
                fg(a, b) = 1.0;
            else
                fg(b, a) = 1.0;
        }
    }
    RealGrid image(fg.size());
    for (std::size_t i = 0; i < image.area(); ++i) image[i] = 0.3 + 0.4 * fg[i] + noise(rng);
    LabelField label = LabelField::from_foreground(fg);
    LabelGrid ids = label.class_ids();
    return {std::move(image), RealGrid(Size{1, 1}), std::move(label), std::move(ids)};
}

// Image standardized over the whole dataset and mirror-padded by the patch
// radius, so patch features are plain lookups.
RealGrid feature_image(const RealGrid& img, double mean, double stddev) {
    constexpr int r = kPatch / 2;
    RealGrid out(Size{img.height() + 2 * r, img.width() + 2 * r});
    for (int u = 0; u < out.height(); ++u)
        for (int v = 0; v < out.width(); ++v)
            out(u, v) = (img(mirror_index(u - r, img.height()), mirror_index(v - r, img.width())) - mean) /
                        stddev;
    return out;
}

// Patch feature j of pixel (u, v); j == kPatch^2 is the bias.
double feature(const RealGrid& features, int u, int v, int j) {
    if (j == kPatch * kPatch) return 1.0;
    return features(u + j / kPatch, v + j % kPatch);
}

std::vector<RealGrid> logits_of(const Sample& d, const std::vector<double>& params) {
    std::vector<RealGrid> logits(kClasses, RealGrid(d.ids.size()));
    for (int u = 0; u < d.ids.height(); ++u)
        for (int v = 0; v < d.ids.width(); ++v)
            for (int j = 0; j < kFeatures; ++j) {
                const double f = feature(d.features, u, v, j);
                for (int c = 0; c < kClasses; ++c) logits[c](u, v) += params[c * kFeatures + j] * f;
            }
    return logits;
}

}  // namespace

DemoTrainResult run_demo_train(const DemoTrainOptions& opt) {
    if (opt.steps < 1) throw DomainError("steps must be >= 1");
    if (opt.samples < 1) throw DomainError("samples must be >= 1");
    if (!(opt.learning_rate > 0.0)) throw DomainError("learning rate must be > 0");
    validate(opt.cfg);

    std::mt19937_64 rng(opt.seed);
    std::vector<Sample> data;
    data.reserve(opt.samples);
    for (int s = 0; s < opt.samples; ++s) data.push_back(make_sample(opt.size, rng));
    double sum = 0.0, sum_sq = 0.0, count = 0.0;
    for (const Sample& d : data)
        for (double x : d.image.values()) {
            sum += x;
            sum_sq += x * x;
            count += 1.0;
        }
    const double mean = sum / count;
    const double stddev = std::sqrt(std::max(sum_sq / count - mean * mean, 1e-12));
    for (Sample& d : data) d.features = feature_image(d.image, mean, stddev);

    DemoTrainResult result;
    std::vector<double> params(kClasses * kFeatures, 0.0);
    std::vector<double> sample_loss(opt.samples);
    std::vector<std::vector<double>> sample_grad(opt.samples);

    for (int step = 0; step < opt.steps; ++step) {
        parallel_for(data.size(), [&](std::size_t s) {
            const Sample& d = data[s];
            const std::vector<RealGrid> logits = logits_of(d, params);
            const ProbabilityField probs = softmax(logits);
            WeightMap weights{RealGrid(d.image.size(), 1.0)};
            if (opt.loss == TrainLoss::ce) {
                sample_loss[s] = cross_entropy_loss(d.label, probs, Reduction::mean);
            } else {
                // Recomputed from the current prediction every step.
                weights = pixel_weights(d.label, probs, opt.cfg);
                sample_loss[s] = weighted_ce_loss(d.label, probs, weights, Reduction::mean);
            }
            const std::vector<RealGrid> g = weighted_ce_gradient(d.label, logits, weights, Reduction::mean);
            // Weighted losses run on a larger scale than plain CE. Dividing the
            // step by the sample's mean weight keeps one learning rate stable for
            // both; with unit weights the divisor is exactly 1.
            double mean_weight = 0.0;
            for (double w : weights.grid.values()) mean_weight += w;
            mean_weight /= static_cast<double>(weights.grid.area());
            std::vector<double> grad(params.size(), 0.0);
            for (int u = 0; u < d.image.height(); ++u)
                for (int v = 0; v < d.image.width(); ++v)
                    for (int j = 0; j < kFeatures; ++j) {
                        const double f = feature(d.features, u, v, j);
                        for (int c = 0; c < kClasses; ++c) grad[c * kFeatures + j] += g[c](u, v) * f;
                    }
            for (double& x : grad) x /= mean_weight;
            sample_grad[s] = std::move(grad);
        });

        double loss = 0.0;
        std::vector<double> grad(params.size(), 0.0);
        for (int s = 0; s < opt.samples; ++s) {
            loss += sample_loss[s];
            for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += sample_grad[s][p];
        }
        result.losses.push_back(loss / opt.samples);
        for (std::size_t p = 0; p < params.size(); ++p)
            params[p] -= opt.learning_rate * grad[p] / opt.samples;
    }

    std::vector<SegmentationMetrics> per_sample(data.size());
    parallel_for(data.size(), [&](std::size_t s) {
        const LabelGrid pred = softmax(logits_of(data[s], params)).argmax();
        per_sample[s] = evaluate_all(data[s].ids, pred, kClasses);
    });
    for (const SegmentationMetrics& m : per_sample) {
        result.metrics.miou += m.miou / opt.samples;
        result.metrics.mdice += m.mdice / opt.samples;
        result.metrics.vi += m.vi / opt.samples;
        result.metrics.ari += m.ari / opt.samples;
    }
    result.weights = params;
    return result;
}

Record cmd_demo_train(const DemoTrainOptions& opt) {
    const auto t0 = Clock::now();
    const DemoTrainResult result = run_demo_train(opt);
    Record rec("spw-demo-train/1");
    rec.set("loss_function", std::string(opt.loss == TrainLoss::ce ? "ce" : "spw"));
    rec.echo(opt.cfg);
    rec.set("seed", static_cast<std::int64_t>(opt.seed));
    rec.set("steps", opt.steps);
    rec.set("samples", opt.samples);
    rec.set("size", opt.size);
    rec.set("learning_rate", opt.learning_rate);
    for (std::size_t i = 0; i < result.losses.size(); ++i)
        rec.set("loss.step." + std::to_string(i + 1), result.losses[i]);
    rec.set("final.miou", result.metrics.miou);
    rec.set("final.mdice", result.metrics.mdice);
    rec.set("final.vi", result.metrics.vi);
    rec.set("final.ari", result.metrics.ari);
    rec.set_time("total", elapsed_ms(t0));
    return rec;
}

}  // namespace spw::cli
