// Command-line front end: structure-matrix training, single-signal
// denoising/deblurring with synthesized degradation, the benchmark runner,
// and chart generation from saved results.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmotv/gmotv.hpp"

namespace {

double parse_lambda_or_auto(const std::string& text, bool& is_auto) {
    if (text == "auto") {
        is_auto = true;
        return 0.0;
    }
    is_auto = false;
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !(v > 0.0))
        throw CLI::ValidationError("--lambda must be a positive number or 'auto'");
    return v;
}

struct RestoreArgs {
    std::string input;
    std::string structure_path;
    std::string method_name = "TV1";
    std::string lambda_text = "auto";
    double snr_db = 0.0;
    double bsnr_db = 0.0;
    double blur_variance = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string degraded_out;
    bool index_column = false;
};

void add_restore_options(CLI::App* cmd, RestoreArgs& args, bool deblur) {
    cmd->add_option("--input", args.input, "clean signal file (text or CSV)")->required();
    cmd->add_option("--structure", args.structure_path,
                    "structure-matrix file (required for GMO-TV methods)");
    cmd->add_option("--method", args.method_name,
                    "TV1..TV4, GMO-TV2, GMO-TV4, IGMO-TV2 or IGMO-TV4")
        ->required();
    cmd->add_option("--lambda", args.lambda_text, "regularization weight, or 'auto' to tune");
    if (deblur) {
        cmd->add_option("--bsnr", args.bsnr_db, "blurred-signal-to-noise ratio in dB")
            ->required();
        cmd->add_option("--blur-variance", args.blur_variance, "Gaussian blur variance")
            ->required();
    } else {
        cmd->add_option("--snr", args.snr_db, "signal-to-noise ratio in dB")->required();
    }
    cmd->add_option("--seed", args.seed, "noise seed");
    cmd->add_option("--out", args.out, "restored signal output path")->required();
    cmd->add_option("--degraded-out", args.degraded_out, "also save the degraded signal");
    cmd->add_flag("--index-column", args.index_column, "first CSV column is a sample index");
}

int run_restore(const RestoreArgs& args, bool deblur) {
    using namespace gmotv;
    const Method method = parse_method(args.method_name);
    const Signal clean = load_signal(args.input, args.index_column);

    DegradationModel model;
    if (deblur) model.blur = gaussian_kernel(args.blur_variance);
    const Signal blurred = deblur ? convolve(clean, model.blur) : clean;
    const Signal degraded = add_noise(
        blurred, deblur ? args.bsnr_db : args.snr_db,
        deblur ? NoiseReference::blurred_variance : NoiseReference::signal_power, args.seed);
    if (!args.degraded_out.empty()) save_signal(args.degraded_out, degraded);

    StructureMatrix trained = StructureMatrix::identity(1);
    const StructureMatrix* trained_ptr = nullptr;
    if (method_needs_training(method)) {
        if (args.structure_path.empty())
            throw std::runtime_error(args.method_name + " needs --structure <file>");
        trained = load_structure(args.structure_path);
        trained_ptr = &trained;
    }

    bool is_auto = false;
    double lambda = parse_lambda_or_auto(args.lambda_text, is_auto);
    Signal restored = Signal::zeros(clean.size());
    if (is_auto) {
        const TuneResult tuned = tune_lambda(default_lambda_grid(), [&](double l) {
            const Signal r = restore_with_method(method, degraded, model, l, trained_ptr);
            return isnr_db(clean, degraded, r);
        });
        for (const std::string& w : tuned.warnings) std::cerr << "warning: " << w << "\n";
        lambda = tuned.lambda;
        restored = restore_with_method(method, degraded, model, lambda, trained_ptr);
    } else {
        restored = restore_with_method(method, degraded, model, lambda, trained_ptr);
    }
    save_signal(args.out, restored);

    std::printf("method   %s\n", args.method_name.c_str());
    std::printf("lambda   %.6g%s\n", lambda, is_auto ? " (tuned)" : "");
    std::printf("isnr_db  %.4f\n", isnr_db(clean, degraded, restored));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-order total-variation signal restoration"};
    app.require_subcommand(1);

    // train
    std::vector<std::string> train_inputs;
    int train_order = 2;
    std::string train_out;
    bool train_index_column = false;
    CLI::App* train = app.add_subcommand("train", "estimate a structure matrix from clean signals");
    train->add_option("--input", train_inputs, "training signal file(s)")->required();
    train->add_option("--order", train_order, "highest derivative order (1-4)")->required();
    train->add_option("--out", train_out, "structure-matrix output path")->required();
    train->add_flag("--index-column", train_index_column, "first CSV column is a sample index");

    RestoreArgs denoise_args, deblur_args;
    CLI::App* denoise = app.add_subcommand("denoise", "synthesize noise on a clean signal and restore it");
    add_restore_options(denoise, denoise_args, false);
    CLI::App* deblur = app.add_subcommand("deblur", "synthesize blur+noise on a clean signal and restore it");
    add_restore_options(deblur, deblur_args, true);

    // bench
    std::string bench_spec, bench_out;
    CLI::App* bench = app.add_subcommand("bench", "run a benchmark grid from a JSON spec");
    bench->add_option("--spec", bench_spec, "experiment spec (JSON)")->required();
    bench->add_option("--out", bench_out, "output directory")->required();

    // plot
    std::string plot_results_path, plot_out;
    CLI::App* plot = app.add_subcommand("plot", "draw ISNR charts from a results.csv");
    plot->add_option("--results", plot_results_path, "results.csv path")->required();
    plot->add_option("--out", plot_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const gmotv::StructureMatrix s =
                gmotv::train_structure(train_inputs, train_order, train_index_column);
            gmotv::save_structure(train_out, s);
            std::printf("wrote %dx%d structure matrix to %s\n", s.order(), s.order(),
                        train_out.c_str());
        } else if (denoise->parsed()) {
            return run_restore(denoise_args, false);
        } else if (deblur->parsed()) {
            return run_restore(deblur_args, true);
        } else if (bench->parsed()) {
            const gmotv::ExperimentSpec spec = gmotv::load_experiment_spec(bench_spec);
            const gmotv::ResultTable table = gmotv::run_experiment(spec);
            gmotv::emit_outputs(table, bench_out);
            int ok = 0, failed = 0;
            for (const auto& [key, cell] : table.cells) (cell.ok ? ok : failed) += 1;
            std::printf("wrote %s (%d cells, %d failed)\n",
                        (std::filesystem::path(bench_out) / "results.csv").string().c_str(), ok,
                        failed);
            if (failed > 0)
                std::printf("see %s for the missing-cell reasons\n",
                            (std::filesystem::path(bench_out) / "results.md").string().c_str());
        } else if (plot->parsed()) {
            gmotv::plot_results(gmotv::parse_results_csv(plot_results_path), plot_out);
            std::printf("wrote charts to %s\n", plot_out.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
