#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spw/metrics.hpp"
#include "spw/spwloss.hpp"

namespace spw::cli {

// Line-delimited key=value record, first line "schema=<name>". Keys keep
// insertion order. Timing entries all live under the "time_ms." prefix so
// callers can strip them when checking determinism.
class Record {
public:
    explicit Record(std::string schema);

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
    void set_time(const std::string& stage, double milliseconds);
    void echo(const SpwConfig& cfg);

    [[nodiscard]] const std::string& get(const std::string& key) const;
    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest decimal that round-trips the double.
[[nodiscard]] std::string format_double(double x);

[[nodiscard]] const char* to_string(ClassWeightMode m);
[[nodiscard]] const char* to_string(Reduction r);

// Reading of label and prediction inputs shared by the subcommands.
struct LabelInput {
    LabelGrid ids;
    int classes = 2;
};
// `classes` <= 0 means max id + 1 (at least 2).
[[nodiscard]] LabelInput load_labels(const std::filesystem::path& path, int classes);

// A directory holds one float map per class (sorted by file name); a single
// float map or PNG holds binary foreground probabilities (PNG scaled by its
// maximum sample value).
[[nodiscard]] ProbabilityField load_prediction(const std::filesystem::path& path, int classes);

// ---------------------------------------------------------------------------

struct DecomposeOptions {
    std::filesystem::path image;
    std::filesystem::path out_dir;
    FilterBankSpec spec;
};
Record cmd_decompose(const DecomposeOptions& opt);

struct WeightmapOptions {
    std::filesystem::path label;
    std::optional<std::filesystem::path> pred;
    std::filesystem::path out;
    int classes = 0;
    SpwConfig cfg;
};
Record cmd_weightmap(const WeightmapOptions& opt);

struct LossOptions {
    std::filesystem::path label;
    std::filesystem::path pred;
    // Precomputed w(x) as a float map; replaces the computed weights.
    std::optional<std::filesystem::path> weights;
    int classes = 0;
    SpwConfig cfg;
};
Record cmd_loss(const LossOptions& opt);

struct MetricsCmdOptions {
    std::filesystem::path gt;
    std::filesystem::path pred;
    int classes = 0;
    bool exclude_background = false;
};
Record cmd_metrics(const MetricsCmdOptions& opt);

struct BenchOptions {
    std::vector<int> sizes{256, 512, 1024};
    int reps = 5;
    std::uint64_t seed = 0;
    FftPlanning planning = FftPlanning::measure;
    SpwConfig cfg;
};

struct BenchRow {
    int size = 0;
    double spw_ms = 0.0;  // median
    double ce_ms = 0.0;   // median
    [[nodiscard]] double delta_ms() const { return spw_ms - ce_ms; }
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<double> growth;  // spw time ratio between consecutive sizes
    double exponent = 0.0;       // fitted p in t ~ (HW log HW)^p
};

[[nodiscard]] double median(std::vector<double> xs);
[[nodiscard]] double fit_scaling_exponent(const std::vector<BenchRow>& rows);
BenchResult run_bench(const BenchOptions& opt);
Record cmd_bench(const BenchOptions& opt, std::ostream& table);

enum class TrainLoss { ce, spw };

struct DemoTrainOptions {
    std::uint64_t seed = 0;
    int steps = 100;
    int samples = 200;
    int size = 64;
    double learning_rate = 0.5;
    TrainLoss loss = TrainLoss::spw;
    SpwConfig cfg;
};

struct DemoTrainResult {
    std::vector<double> losses;  // one per step, before the update
    SegmentationMetrics metrics;  // averaged over samples, after training
    std::vector<double> weights;  // final model parameters
};

DemoTrainResult run_demo_train(const DemoTrainOptions& opt);
Record cmd_demo_train(const DemoTrainOptions& opt);

}  // namespace spw::cli
