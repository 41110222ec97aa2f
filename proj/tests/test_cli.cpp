#include "doctest.h"
#include "support.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "commands.hpp"
#include "spw/image_io.hpp"

using namespace spw;
using namespace spw::cli;
using namespace spw::test;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, removed on scope exit.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) {
        dir = fs::temp_directory_path() / ("spw_test_" + name + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path operator/(const std::string& f) const { return dir / f; }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_tool(const std::string& args, const Scratch& s) {
    const fs::path out = s / "stdout.txt", err = s / "stderr.txt";
    const std::string cmd = std::string(SPW_TOOL_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

std::string without_timings(const std::string& record) {
    std::istringstream in(record);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("time_ms.", 0) != 0) out += line + "\n";
    return out;
}

LabelGrid disk_label(int n) { return disk(Size{n, n}, n / 2.0 - 0.5, n / 2.0 - 0.5, n / 4.0); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("float map round trip") {
    Scratch s("pfm");
    std::mt19937_64 rng(1);
    const RealGrid g = random_grid(Size{7, 13}, rng, -100.0, 100.0);
    io::write_pfm(s / "g.pfm", g);
    const RealGrid back = io::read_pfm(s / "g.pfm");
    REQUIRE(back.size() == g.size());
    for (std::size_t i = 0; i < g.area(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(g[i])));

    // Header and bottom-up row order of the written file.
    std::ifstream in(s / "g.pfm", std::ios::binary);
    std::string magic, scale;
    int w = 0, h = 0;
    in >> magic >> w >> h >> scale;
    CHECK(magic == "Pf");
    CHECK(w == 13);
    CHECK(h == 7);
    CHECK(std::stod(scale) < 0.0);
    in.get();
    float first = 0.0f;
    in.read(reinterpret_cast<char*>(&first), sizeof first);
    CHECK(first == static_cast<float>(g(6, 0)));
}

TEST_CASE("float map reader handles big-endian and rejects colour") {
    Scratch s("pfm_be");
    {
        std::ofstream out(s / "be.pfm", std::ios::binary);
        out << "Pf\n2 1\n1.0\n";
        const unsigned char one[] = {0x3f, 0x80, 0x00, 0x00}, two[] = {0x40, 0x00, 0x00, 0x00};
        out.write(reinterpret_cast<const char*>(one), 4);
        out.write(reinterpret_cast<const char*>(two), 4);
    }
    const RealGrid g = io::read_pfm(s / "be.pfm");
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == 2.0);
    {
        std::ofstream out(s / "rgb.pfm", std::ios::binary);
        out << "PF\n1 1\n-1.0\n";
        out.write("\0\0\0\0\0\0\0\0\0\0\0\0", 12);
    }
    CHECK_THROWS_AS((void)io::read_pfm(s / "rgb.pfm"), IoError);
    CHECK_THROWS_AS((void)io::read_pfm(s / "missing.pfm"), IoError);
}

TEST_CASE("label png round trip and class inference") {
    Scratch s("labels");
    LabelGrid ids(Size{3, 4}, std::vector<int>{0, 1, 2, 3, 3, 2, 1, 0, 0, 0, 5, 0});
    io::write_label_png(s / "l.png", ids);
    const LabelInput in = load_labels(s / "l.png", 0);
    CHECK(in.classes == 6);
    for (std::size_t i = 0; i < ids.area(); ++i) CHECK(in.ids[i] == ids[i]);
    CHECK_THROWS_AS((void)load_labels(s / "l.png", 4), DomainError);
    io::write_label_png(s / "zero.png", LabelGrid(Size{2, 2}));
    CHECK(load_labels(s / "zero.png", 0).classes == 2);
}

TEST_CASE("record formatting") {
    Record r("demo/1");
    r.set("a", 0.1);
    r.set("b", 3);
    r.set("a", 2.5);
    CHECK(r.str() == "schema=demo/1\na=2.5\nb=3\n");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
    CHECK(r.has("b"));
    CHECK_THROWS_AS((void)r.get("missing"), Error);
}

TEST_CASE("decompose writes the full ladder") {
    Scratch s("decompose");
    std::mt19937_64 rng(2);
    Grid<std::uint8_t> img(Size{512, 512});
    for (auto& p : img.values()) p = static_cast<std::uint8_t>(rng() % 256);
    io::write_png(s / "in.png", img);
    const Record rec = cmd_decompose({s / "in.png", s / "out", FilterBankSpec{4, 4}});
    CHECK(rec.get("outputs") == "18");
    int pfm = 0;
    for (const auto& e : fs::directory_iterator(s / "out")) pfm += e.path().extension() == ".pfm";
    CHECK(pfm == 18);
    CHECK(fs::exists(s / "out" / "manifest.txt"));
    CHECK(io::read_pfm(s / "out" / "band_L4_O2.pfm").size() == Size{64, 64});
    CHECK(io::read_pfm(s / "out" / "low_pass.pfm").size() == Size{64, 64});
}

TEST_CASE("decompose pads odd sizes and crops back") {
    Scratch s("decompose_pad");
    Grid<std::uint8_t> img(Size{100, 100}, 10);
    io::write_png(s / "in.png", img);
    const Record rec = cmd_decompose({s / "in.png", s / "out", FilterBankSpec{4, 4}});
    CHECK(rec.get("padded_size") == "104x104");
    CHECK(io::read_pfm(s / "out" / "high_pass.pfm").size() == Size{100, 100});
    CHECK(io::read_pfm(s / "out" / "band_L1_O3.pfm").size() == Size{100, 100});
    CHECK(io::read_pfm(s / "out" / "band_L2_O1.pfm").size() == Size{50, 50});
    CHECK(io::read_pfm(s / "out" / "band_L4_O1.pfm").size() == Size{13, 13});
}

TEST_CASE("exit codes") {
    Scratch s("exit");
    {
        std::ofstream(s / "notes.png") << "this is not an image";
    }
    const Run bad = run_tool("decompose " + (s / "notes.png").string() + " -o " + (s / "o").string(), s);
    CHECK(bad.code == 2);
    CHECK(bad.err.find((s / "notes.png").string()) != std::string::npos);

    io::write_label_png(s / "a.png", LabelGrid(Size{4, 4}));
    io::write_label_png(s / "b.png", LabelGrid(Size{4, 5}));
    CHECK(run_tool("metrics " + (s / "a.png").string() + " " + (s / "b.png").string(), s).code == 2);
    CHECK(run_tool("metrics", s).code == 2);
    CHECK(run_tool("loss " + (s / "a.png").string() + " " + (s / "missing").string(), s).code == 2);

    const Run ok = run_tool("metrics " + (s / "a.png").string() + " " + (s / "a.png").string(), s);
    CHECK(ok.code == 0);
    CHECK(ok.out.rfind("schema=spw-metrics/1\n", 0) == 0);
}

TEST_CASE("metrics subcommand on the 2x2 hand case") {
    Scratch s("metrics");
    io::write_label_png(s / "gt.png", LabelGrid(Size{2, 2}, std::vector<int>{0, 0, 1, 1}));
    io::write_label_png(s / "pred.png", LabelGrid(Size{2, 2}, std::vector<int>{0, 1, 1, 1}));
    const Record r = cmd_metrics({s / "gt.png", s / "pred.png", 0, false});
    CHECK(std::stod(r.get("miou")) == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    CHECK(std::stod(r.get("mdice")) == doctest::Approx(11.0 / 15.0).epsilon(1e-15));
    CHECK(r.get("exclude_background") == "off");
    const Record same = cmd_metrics({s / "gt.png", s / "gt.png", 0, true});
    CHECK(same.get("miou") == "1");
    CHECK(same.get("mdice") == "1");
    CHECK(same.get("vi") == "0");
    CHECK(same.get("ari") == "1");
    CHECK(same.get("exclude_background") == "on");
}

TEST_CASE("weightmap subcommand") {
    Scratch s("weightmap");
    io::write_label_png(s / "flat.png", LabelGrid(Size{32, 32}, 1));
    WeightmapOptions opt;
    opt.label = s / "flat.png";
    opt.out = s / "w.pfm";
    cmd_weightmap(opt);
    for (const auto tmp = io::read_pfm(opt.out); double x : tmp.values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fs::exists(s / "w.png"));

    const LabelGrid ids = disk_label(128);
    io::write_label_png(s / "disk.png", ids);
    opt.label = s / "disk.png";
    opt.cfg.lambda = 0.0;
    cmd_weightmap(opt);
    for (const auto tmp = io::read_pfm(opt.out); double x : tmp.values()) CHECK(x == 1.0);

    opt.cfg.lambda = 10.0;
    const Record rec = cmd_weightmap(opt);
    CHECK(rec.get("mode") == "label-only");
    const RealGrid w = io::read_pfm(opt.out);
    const RealGrid dist = boundary_distance(ids);
    double near = 0, far = 0, n_near = 0, n_far = 0;
    for (std::size_t i = 0; i < w.area(); ++i) {
        if (dist[i] <= 2.0) near += w[i], n_near += 1;
        if (dist[i] > 10.0) far += w[i], n_far += 1;
    }
    CHECK(near / n_near >= 3.0 * (far / n_far));

    // Class-count mismatch between label and prediction directory.
    fs::create_directories(s / "pred");
    for (int c = 0; c < 3; ++c) io::write_pfm(s / "pred" / ("c" + std::to_string(c) + ".pfm"), RealGrid(Size{128, 128}, 1.0 / 3));
    opt.pred = s / "pred";
    CHECK_THROWS_AS((void)cmd_weightmap(opt), ShapeError);
}

TEST_CASE("loss subcommand") {
    Scratch s("loss");
    io::write_label_png(s / "l.png", LabelGrid(Size{1, 2}, std::vector<int>{0, 1}));
    fs::create_directories(s / "p");
    io::write_pfm(s / "p" / "class0.pfm", RealGrid(Size{1, 2}, std::vector<double>{0.5, 0.75}));
    io::write_pfm(s / "p" / "class1.pfm", RealGrid(Size{1, 2}, std::vector<double>{0.5, 0.25}));
    io::write_pfm(s / "w.pfm", RealGrid(Size{1, 2}, std::vector<double>{1.0, 2.0}));

    LossOptions opt;
    opt.label = s / "l.png";
    opt.pred = s / "p";
    opt.weights = s / "w.pfm";
    opt.cfg.reduction = Reduction::sum;
    const Record hand = cmd_loss(opt);
    CHECK(std::stod(hand.get("loss")) == doctest::Approx(3.465736).epsilon(1e-6 / 3.465736));
    CHECK(hand.get("config.reduction") == "sum");

    opt.weights.reset();
    opt.cfg.lambda = 0.0;
    CHECK(std::stod(cmd_loss(opt).get("loss")) == doctest::Approx(-(std::log(0.5) + std::log(0.25))).epsilon(1e-15));

    // One-hot prediction gives zero loss whatever the weights.
    io::write_pfm(s / "p" / "class0.pfm", RealGrid(Size{1, 2}, std::vector<double>{1.0, 0.0}));
    io::write_pfm(s / "p" / "class1.pfm", RealGrid(Size{1, 2}, std::vector<double>{0.0, 1.0}));
    opt.cfg.lambda = 10.0;
    CHECK(std::stod(cmd_loss(opt).get("loss")) == 0.0);
}

TEST_CASE("identical invocations give identical records") {
    Scratch s("determinism");
    io::write_label_png(s / "l.png", disk_label(40));
    Grid<std::uint8_t> fg(Size{40, 40}, 77);
    io::write_png(s / "p.png", fg);
    WeightmapOptions opt;
    opt.label = s / "l.png";
    opt.pred = s / "p.png";
    opt.out = s / "w.pfm";
    const std::string a = without_timings(cmd_weightmap(opt).str());
    const std::string b = without_timings(cmd_weightmap(opt).str());
    CHECK(a == b);
    CHECK(a.find("mode=label+prediction") != std::string::npos);

    DemoTrainOptions tr;
    tr.samples = 4;
    tr.steps = 3;
    tr.seed = 9;
    CHECK(without_timings(cmd_demo_train(tr).str()) == without_timings(cmd_demo_train(tr).str()));
    tr.seed = 10;
    const std::string other = without_timings(cmd_demo_train(tr).str());
    tr.seed = 9;
    CHECK(other != without_timings(cmd_demo_train(tr).str()));
}

TEST_CASE("bench reports medians and the CE delta") {
    CHECK(median({5.0, 1.0, 100.0}) == 5.0);
    CHECK(median({4.0, 1.0, 100.0, 2.0}) == 3.0);
    CHECK_THROWS_AS((void)median({}), DomainError);

    BenchOptions opt;
    opt.sizes = {16, 32};
    opt.reps = 3;
    opt.planning = FftPlanning::estimate;
    std::ostringstream table;
    const Record r = cmd_bench(opt, table);
    CHECK(r.get("statistic") == "median");
    CHECK(r.has("time_ms.delta.16"));
    CHECK(r.has("timing.growth.32"));
    CHECK(table.str().find("dt to CE") != std::string::npos);
    CHECK(fft_planning() == FftPlanning::estimate);
}

TEST_CASE("demo-train degenerates to CE at lambda zero") {
    DemoTrainOptions ce;
    ce.samples = 6;
    ce.steps = 20;
    ce.loss = TrainLoss::ce;
    DemoTrainOptions spw = ce;
    spw.loss = TrainLoss::spw;
    spw.cfg.lambda = 0.0;
    const DemoTrainResult a = run_demo_train(ce), b = run_demo_train(spw);
    REQUIRE(a.losses.size() == 20);
    for (std::size_t i = 0; i < a.losses.size(); ++i) CHECK(a.losses[i] == b.losses[i]);
    CHECK(a.weights == b.weights);
    CHECK(a.metrics.vi == b.metrics.vi);
}

TEST_CASE("demo-train CE loss keeps falling") {
    DemoTrainOptions opt;
    opt.samples = 30;
    opt.steps = 60;
    opt.loss = TrainLoss::ce;
    const DemoTrainResult r = run_demo_train(opt);
    for (std::size_t i = 0; i + 20 < r.losses.size(); ++i) CHECK(r.losses[i + 20] <= r.losses[i]);

    opt.loss = TrainLoss::spw;
    opt.steps = 10;
    const Record rec = cmd_demo_train(opt);
    for (const char* key : {"final.miou", "final.mdice", "final.vi", "final.ari"}) CHECK(std::isfinite(std::stod(rec.get(key))));
}

}
