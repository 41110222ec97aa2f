// spw: command-line front end for the steerable-pyramid weighted loss library.
//
// Every subcommand prints a key=value record on stdout and a short human
// summary on stderr. Exit codes: 0 success, 2 bad input, 1 internal failure.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace spw;
using namespace spw::cli;

void add_config_flags(CLI::App& cmd, SpwConfig& cfg, bool with_pred_flag) {
    cmd.add_option("--lambda", cfg.lambda, "weight of the pyramid term")->capture_default_str();
    cmd.add_option("--beta", cfg.beta, "per-level decay")->capture_default_str();
    cmd.add_option("--levels", cfg.levels, "pyramid levels")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--orients", cfg.orientations, "orientations per level")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--class-weights", cfg.class_weights, "uniform | invfreq")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, ClassWeightMode>{{"uniform", ClassWeightMode::uniform},
                                                   {"invfreq", ClassWeightMode::inverse_frequency}},
            CLI::ignore_case));
    cmd.add_option("--reduction", cfg.reduction, "sum | mean")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Reduction>{{"sum", Reduction::sum}, {"mean", Reduction::mean}},
            CLI::ignore_case));
    if (with_pred_flag) {
        cmd.add_flag_callback(
            "--no-pred-map", [&cfg] { cfg.use_prediction_map = false; },
            "drop the prediction-derived term (label-only ablation)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steerable-pyramid weighted cross-entropy: decomposition, weight maps, loss, metrics"};
    app.require_subcommand(1);

    DecomposeOptions dec;
    auto* decompose = app.add_subcommand("decompose", "write pyramid envelopes and residuals as float maps");
    decompose->add_option("image", dec.image, "8/16-bit PNG or float map")->required();
    decompose->add_option("-o,--out", dec.out_dir, "output directory")->required();
    decompose->add_option("--levels", dec.spec.levels)->capture_default_str()->check(CLI::PositiveNumber);
    decompose->add_option("--orients", dec.spec.orientations)->capture_default_str()->check(CLI::PositiveNumber);

    WeightmapOptions wm;
    std::string wm_pred;
    auto* weightmap = app.add_subcommand("weightmap", "compute the per-pixel weight map w(x)");
    weightmap->add_option("label", wm.label, "class-id PNG")->required();
    weightmap->add_option("--pred", wm_pred, "prediction: class-map directory, float map, or PNG");
    weightmap->add_option("-o,--out", wm.out, "output float map")->required();
    weightmap->add_option("--classes", wm.classes, "class count (default: max id + 1)");
    add_config_flags(*weightmap, wm.cfg, true);

    LossOptions lo;
    auto* loss = app.add_subcommand("loss", "evaluate the weighted cross-entropy");
    loss->add_option("label", lo.label, "class-id PNG")->required();
    loss->add_option("pred", lo.pred, "prediction: class-map directory, float map, or PNG")->required();
    loss->add_option("--classes", lo.classes, "class count (default: max id + 1)");
    std::string lo_weights;
    loss->add_option("--weights", lo_weights, "precomputed weight map (float map) instead of computing w(x)");
    add_config_flags(*loss, lo.cfg, true);

    MetricsCmdOptions me;
    auto* metrics = app.add_subcommand("metrics", "mIoU, mDice, VI and ARI between two class images");
    metrics->add_option("gt", me.gt, "ground-truth class-id PNG")->required();
    metrics->add_option("pred", me.pred, "predicted class-id PNG")->required();
    metrics->add_option("--classes", me.classes, "class count (default: max id + 1)");
    metrics->add_flag("--exclude-background", me.exclude_background,
                      "drop ground-truth background pixels from VI/ARI");

    BenchOptions be;
    auto* bench = app.add_subcommand("bench", "time weight-map computation against plain CE");
    bench->add_option("--sizes", be.sizes, "square image sides")->delimiter(',')->capture_default_str();
    bench->add_option("--reps", be.reps, "repetitions per size (median reported)")->capture_default_str();
    bench->add_option("--seed", be.seed)->capture_default_str();
    bench->add_flag_callback(
        "--fft-estimate", [&be] { be.planning = FftPlanning::estimate; },
        "skip FFTW measurement planning (faster start, slower transforms)");
    bool bench_parallel = false;
    bench->add_flag("--parallel", bench_parallel,
                    "parallelize across channels (SPW_THREADS, else all cores); default is one worker");
    add_config_flags(*bench, be.cfg, false);

    DemoTrainOptions tr;
    auto* train = app.add_subcommand("demo-train", "train a patch classifier on synthetic thin curves");
    train->add_option("--seed", tr.seed)->capture_default_str();
    train->add_option("--steps", tr.steps)->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--samples", tr.samples)->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--lr", tr.learning_rate)->capture_default_str();
    train->add_option("--loss", tr.loss, "ce | spw")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, TrainLoss>{{"ce", TrainLoss::ce}, {"spw", TrainLoss::spw}},
            CLI::ignore_case));
    add_config_flags(*train, tr.cfg, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Record rec("none");
        if (*decompose) {
            rec = cmd_decompose(dec);
            std::cerr << "wrote " << rec.get("outputs") << " maps to " << dec.out_dir.string() << '\n';
        } else if (*weightmap) {
            if (!wm_pred.empty()) wm.pred = wm_pred;
            rec = cmd_weightmap(wm);
            std::cerr << "weight map " << rec.get("size") << " (" << rec.get("mode") << ") -> "
                      << wm.out.string() << '\n';
        } else if (*loss) {
            if (!lo_weights.empty()) lo.weights = lo_weights;
            rec = cmd_loss(lo);
            std::cerr << "loss " << rec.get("loss") << " (" << rec.get("config.reduction") << ")\n";
        } else if (*metrics) {
            rec = cmd_metrics(me);
            std::cerr << "mIoU " << rec.get("miou") << "  mDice " << rec.get("mdice") << "  VI "
                      << rec.get("vi") << "  ARI " << rec.get("ari") << '\n';
        } else if (*bench) {
            if (!bench_parallel)
                setenv("SPW_THREADS", "1", 1);
            else if (std::getenv("SPW_THREADS") == nullptr)
                setenv("SPW_THREADS", std::to_string(std::thread::hardware_concurrency()).c_str(), 1);
            rec = cmd_bench(be, std::cerr);
        } else if (*train) {
            rec = cmd_demo_train(tr);
            std::cerr << "final mIoU " << rec.get("final.miou") << "  VI " << rec.get("final.vi") << '\n';
        }
        std::cout << rec.str();
        return 0;
    } catch (const spw::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
