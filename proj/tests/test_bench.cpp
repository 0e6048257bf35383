#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "gmotv/bench.hpp"
#include "support/synthetic.hpp"

using namespace gmotv;
using Catch::Approx;
using testsupport::Rng;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("gmotv_bench_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Signal noisy_test_signal(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    Signal f = testsupport::piecewise_linear(rng, n, static_cast<int>(n / 24), 0.4);
    return f;
}

}  // namespace

TEST_CASE("method table: names parse both ways, banks have the right shape") {
    for (const auto& [method, name] : method_names()) {
        REQUIRE(parse_method(name) == method);
        REQUIRE(method_name(method) == name);
    }
    REQUIRE_THROWS_AS(parse_method("TV9"), std::invalid_argument);

    REQUIRE(method_bank(Method::tv3).rows() == 1);
    REQUIRE(method_bank(Method::tv3).filter(0).size() == 4);
    REQUIRE(method_bank(Method::gmo_tv4).rows() == 4);
    REQUIRE(method_bank(Method::igmo_tv2).rows() == 2);
    REQUIRE(method_needs_training(Method::gmo_tv2));
    REQUIRE_FALSE(method_needs_training(Method::tv1));
    REQUIRE(method_is_joint(Method::igmo_tv4));
}

TEST_CASE("restore_with_method: TV1 equals a single-order S=[1] restoration") {
    Rng rng(81);
    Signal f = testsupport::piecewise_constant(rng, 48, 5, 1.0);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += 0.1 * rng.gauss();

    const Signal via_method = restore_with_method(Method::tv1, f, DegradationModel{}, 0.4);
    RestoreConfig cfg;
    cfg.lambda = 0.4;
    const Signal direct = mm_gmotv(f, DegradationModel{}, StructureMatrix::scalar(1.0),
                                   DerivativeBank::single(1), cfg)
                              .first;
    for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(via_method[i] == direct[i]);

    REQUIRE_THROWS_AS(restore_with_method(Method::gmo_tv2, f, DegradationModel{}, 0.4),
                      std::invalid_argument);
}

TEST_CASE("tune_lambda: degenerate grid, argmax, duplicates, failures") {
    const TuneResult one = tune_lambda({0.5}, [](double) { return 3.0; });
    REQUIRE(one.lambda == 0.5);

    auto peaked = [](double lambda) { return lambda == 0.1 ? 5.0 : 2.0; };
    REQUIRE(tune_lambda({0.1, 1.0}, peaked).lambda == 0.1);
    REQUIRE(tune_lambda({1.0, 0.1}, peaked).lambda == 0.1);

    const TuneResult dup = tune_lambda({0.1, 0.1, 1.0, 1.0}, peaked);
    const TuneResult dedup = tune_lambda({0.1, 1.0}, peaked);
    REQUIRE(dup.lambda == dedup.lambda);
    REQUIRE(dup.isnr_db == dedup.isnr_db);

    // ties break toward the smaller lambda
    REQUIRE(tune_lambda({2.0, 1.0, 3.0}, [](double) { return 1.0; }).lambda == 1.0);

    const TuneResult skipped = tune_lambda({0.1, 0.2}, [](double lambda) -> double {
        if (lambda < 0.15) throw std::runtime_error("diverged");
        return 1.0;
    });
    REQUIRE(skipped.lambda == 0.2);
    REQUIRE(skipped.warnings.size() == 1);

    REQUIRE_THROWS_AS(
        tune_lambda({0.1}, [](double) -> double { throw std::runtime_error("boom"); }),
        std::runtime_error);
    REQUIRE_THROWS_AS(tune_lambda({}, [](double) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("train_structure: scalar fixed point, stack augmentation, degenerate data") {
    // first differences of [0,1] are {-1, +1}: sum |v| = 2, S = [1/2]
    const StructureMatrix s = train_structure({Signal({std::vector<double>{0.0, 1.0}})}, 1);
    REQUIRE(s(0, 0) == Approx(0.5).margin(1e-10));

    // two signals equal one mm_kl run over the column-concatenated stacks
    Rng rng(82);
    const Signal a = testsupport::random_signal(rng, 20);
    const Signal b = testsupport::random_signal(rng, 28);
    const StructureMatrix two = train_structure({a, b}, 2);

    const DerivativeBank bank = DerivativeBank::up_to(2);
    const DerivativeStack sa = derivative_stack(a, bank);
    const DerivativeStack sb = derivative_stack(b, bank);
    DerivativeStack cat(2, sa.cols() + sb.cols());
    for (int r = 0; r < 2; ++r) {
        for (std::size_t x = 0; x < sa.cols(); ++x) cat(r, x) = sa(r, x);
        for (std::size_t x = 0; x < sb.cols(); ++x) cat(r, sa.cols() + x) = sb(r, x);
    }
    MmKlConfig kcfg;
    kcfg.eps_grad = 1e-6;
    const StructureMatrix direct = mm_kl(cat, StructureMatrix::identity(2), kcfg).structure;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) REQUIRE(two(i, j) == direct(i, j));

    REQUIRE_THROWS_WITH(train_structure({Signal::constant(32, 1.0)}, 2),
                        Catch::Matchers::ContainsSubstring("lambda_f"));
}

TEST_CASE("run_experiment: determinism, shared degradation, method columns") {
    TempDir tmp;
    const std::string test_path = (tmp.path / "test.txt").string();
    save_signal(test_path, noisy_test_signal(7, 128));
    const std::string train_path = (tmp.path / "train.txt").string();
    save_signal(train_path, noisy_test_signal(8, 160));

    ExperimentSpec spec;
    spec.test_path = test_path;
    spec.train_path = train_path;
    spec.mode = ExperimentSpec::Mode::denoise;
    spec.segment_length = 64;
    spec.num_segments = 2;
    spec.level_db = {15.0};
    spec.methods = {Method::tv1, Method::gmo_tv2, Method::igmo_tv2};
    spec.lambda_grid = {0.05, 0.2};
    spec.seed = 1234;
    spec.emit_plots = false;

    const ResultTable t1 = run_experiment(spec);
    const ResultTable t2 = run_experiment(spec);
    REQUIRE(t1.cells.size() == 3);
    for (std::size_t i = 0; i < t1.cells.size(); ++i) {
        REQUIRE(t1.cells[i].second.ok);
        REQUIRE(t1.cells[i].second.isnr_db == t2.cells[i].second.isnr_db);
        REQUIRE(t1.cells[i].second.lambda == t2.cells[i].second.lambda);
        REQUIRE(t1.cells[i].second.segments == 2);
    }
    REQUIRE(t1.cells[0].first.method == Method::tv1);
    REQUIRE(t1.cells[1].first.method == Method::gmo_tv2);
    REQUIRE(t1.cells[2].first.method == Method::igmo_tv2);
}

TEST_CASE("run_experiment: deblur grid shape and blur-then-noise order") {
    TempDir tmp;
    const std::string test_path = (tmp.path / "test.txt").string();
    const Signal test = noisy_test_signal(9, 128);
    save_signal(test_path, test);

    ExperimentSpec spec;
    spec.test_path = test_path;
    spec.mode = ExperimentSpec::Mode::deblur;
    spec.segment_length = 64;
    spec.num_segments = 1;
    spec.level_db = {25.0, 20.0, 15.0, 10.0};
    spec.blur_variance = {1.0, 2.0, 4.0, 6.0};
    spec.methods = {Method::tv1};
    spec.lambda_grid = {0.1};
    spec.seed = 5;
    spec.emit_plots = false;

    const ResultTable table = run_experiment(spec);
    REQUIRE(table.cells.size() == 16);  // 4 levels x 4 variances x 1 method
    for (const auto& [key, cell] : table.cells) REQUIRE(cell.ok);

    // degradation is blur first, then exact-dB noise on the blurred signal
    const double level = 25.0, bv = 4.0;
    std::vector<double> seg(test.samples().begin(), test.samples().begin() + 64);
    const Signal blurred = convolve(Signal(seg), gaussian_kernel(bv));
    const Signal expect = add_noise(blurred, level, NoiseReference::blurred_variance,
                                    detail::cell_seed(spec.seed, level, bv, 0));
    const Signal eta = expect - blurred;
    REQUIRE(10.0 * std::log10(variance(blurred) / variance(eta)) == Approx(level).margin(1e-9));
}

TEST_CASE("run_experiment: missing training path and short signals are errors") {
    TempDir tmp;
    const std::string test_path = (tmp.path / "test.txt").string();
    save_signal(test_path, noisy_test_signal(10, 96));

    ExperimentSpec spec;
    spec.test_path = test_path;
    spec.mode = ExperimentSpec::Mode::denoise;
    spec.segment_length = 64;
    spec.num_segments = 1;
    spec.level_db = {15.0};
    spec.methods = {Method::gmo_tv2};
    REQUIRE_THROWS_WITH(run_experiment(spec), Catch::Matchers::ContainsSubstring("train_path"));

    spec.methods = {Method::tv1};
    spec.num_segments = 4;  // 256 > 96 samples
    REQUIRE_THROWS_WITH(run_experiment(spec), Catch::Matchers::ContainsSubstring("need"));
}

TEST_CASE("results csv: round-trip and byte-identical re-emission") {
    TempDir tmp;
    ResultTable table;
    CellKey k1{15.0, 0.0, Method::tv1};
    CellResult c1{true, detail::round9(0.07543219876), detail::round9(4.321987654321), 4, ""};
    CellKey k2{10.0, 2.0, Method::igmo_tv4};
    CellResult c2{true, detail::round9(1.25e-3), detail::round9(-0.5), 4, ""};
    table.cells = {{k1, c1}, {k2, c2}};

    const std::string csv1 = (tmp.path / "results.csv").string();
    write_results_csv(table, csv1);
    const ResultTable parsed = parse_results_csv(csv1);
    REQUIRE(parsed.cells.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(parsed.cells[i].first.level_db == table.cells[i].first.level_db);
        REQUIRE(parsed.cells[i].first.blur_variance == table.cells[i].first.blur_variance);
        REQUIRE(parsed.cells[i].first.method == table.cells[i].first.method);
        REQUIRE(parsed.cells[i].second.lambda == table.cells[i].second.lambda);
        REQUIRE(parsed.cells[i].second.isnr_db == table.cells[i].second.isnr_db);
        REQUIRE(parsed.cells[i].second.segments == table.cells[i].second.segments);
    }

    const std::string csv2 = (tmp.path / "again.csv").string();
    write_results_csv(parsed, csv2);
    REQUIRE(read_file(csv1) == read_file(csv2));
}

TEST_CASE("emit_outputs: empty table, plot naming, markdown") {
    TempDir tmp;
    const ResultTable empty;
    const std::string dir = (tmp.path / "out_empty").string();
    emit_outputs(empty, dir);
    REQUIRE(read_file(dir + "/results.csv") ==
            "level_db,blur_variance,method,lambda,isnr_db,segments\n");

    ResultTable one;
    CellKey key{10.0, 4.0, Method::tv2};
    one.cells = {{key, CellResult{true, 0.1, 2.5, 1, ""}}};
    Rng rng(83);
    const Signal orig = testsupport::random_signal(rng, 32);
    one.plots.push_back(CellPlot{key, orig, orig + testsupport::random_signal(rng, 32), orig});
    const std::string dir2 = (tmp.path / "out_one").string();
    emit_outputs(one, dir2);
    REQUIRE(std::filesystem::exists(dir2 + "/overlay_TV2_level10_var4.svg"));
    REQUIRE(std::filesystem::exists(dir2 + "/results.md"));

    plot_results(one, dir2);
    REQUIRE(std::filesystem::exists(dir2 + "/isnr_vs_level_var4.svg"));
}

TEST_CASE("experiment specs load from JSON with relative paths") {
    TempDir tmp;
    save_signal((tmp.path / "sig.txt").string(), noisy_test_signal(11, 96));
    const std::string spec_path = (tmp.path / "spec.json").string();
    {
        std::ofstream out(spec_path);
        out << R"({
            "mode": "deblur",
            "test_path": "sig.txt",
            "segment_length": 48,
            "num_segments": 2,
            "bsnr_db": [20, 10],
            "blur_variance": [1, 2],
            "methods": ["TV1", "IGMO-TV2"],
            "lambda_grid": [0.1, 0.5],
            "seed": 99,
            "emit_plots": false
        })";
    }
    const ExperimentSpec spec = load_experiment_spec(spec_path);
    REQUIRE(spec.mode == ExperimentSpec::Mode::deblur);
    REQUIRE(spec.test_path == (tmp.path / "sig.txt").string());
    REQUIRE(spec.level_db == std::vector<double>{20.0, 10.0});
    REQUIRE(spec.blur_variance == std::vector<double>{1.0, 2.0});
    REQUIRE(spec.methods == std::vector<Method>{Method::tv1, Method::igmo_tv2});
    REQUIRE(spec.lambda_grid == std::vector<double>{0.1, 0.5});
    REQUIRE(spec.seed == 99);
    REQUIRE_FALSE(spec.emit_plots);

    const std::string bad = (tmp.path / "bad.json").string();
    {
        std::ofstream out(bad);
        out << R"({"mode": "sharpen", "test_path": "sig.txt"})";
    }
    REQUIRE_THROWS_WITH(load_experiment_spec(bad),
                        Catch::Matchers::ContainsSubstring("denoise"));
}
