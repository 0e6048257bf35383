#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmotv/io.hpp"
#include "gmotv/joint.hpp"
#include "gmotv/metrics.hpp"
#include "gmotv/mm_kl.hpp"
#include "gmotv/plot.hpp"
#include "gmotv/restore.hpp"

namespace gmotv {

// ---------------------------------------------------------------- methods

enum class Method { tv1, tv2, tv3, tv4, gmo_tv2, gmo_tv4, igmo_tv2, igmo_tv4 };

inline const std::vector<std::pair<Method, std::string>>& method_names() {
    static const std::vector<std::pair<Method, std::string>> table = {
        {Method::tv1, "TV1"},           {Method::tv2, "TV2"},
        {Method::tv3, "TV3"},           {Method::tv4, "TV4"},
        {Method::gmo_tv2, "GMO-TV2"},   {Method::gmo_tv4, "GMO-TV4"},
        {Method::igmo_tv2, "IGMO-TV2"}, {Method::igmo_tv4, "IGMO-TV4"},
    };
    return table;
}

inline std::string method_name(Method m) {
    for (const auto& [method, name] : method_names())
        if (method == m) return name;
    throw std::logic_error("method_name: unknown method");
}

inline Method parse_method(const std::string& name) {
    for (const auto& [method, n] : method_names())
        if (n == name) return method;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected TV1..TV4, GMO-TV2/4, IGMO-TV2/4)");
}

inline bool method_needs_training(Method m) {
    return m == Method::gmo_tv2 || m == Method::gmo_tv4;
}

inline bool method_is_joint(Method m) {
    return m == Method::igmo_tv2 || m == Method::igmo_tv4;
}

inline DerivativeBank method_bank(Method m) {
    switch (m) {
        case Method::tv1: return DerivativeBank::single(1);
        case Method::tv2: return DerivativeBank::single(2);
        case Method::tv3: return DerivativeBank::single(3);
        case Method::tv4: return DerivativeBank::single(4);
        case Method::gmo_tv2:
        case Method::igmo_tv2: return DerivativeBank::up_to(2);
        case Method::gmo_tv4:
        case Method::igmo_tv4: return DerivativeBank::up_to(4);
    }
    throw std::logic_error("method_bank: unknown method");
}

/// Restore one measurement with a named method. `trained` supplies the
/// structure matrix for the training-based methods and is ignored otherwise.
inline Signal restore_with_method(Method m, const Signal& f, const DegradationModel& model,
                                  double lambda, const StructureMatrix* trained = nullptr) {
    const DerivativeBank bank = method_bank(m);
    if (method_is_joint(m)) {
        JointConfig jcfg;
        jcfg.lambda = lambda;
        return igmotv(f, model, bank, jcfg).signal;
    }
    RestoreConfig rcfg;
    rcfg.lambda = lambda;
    if (method_needs_training(m)) {
        if (trained == nullptr)
            throw std::invalid_argument(method_name(m) + " needs a trained structure matrix");
        if (trained->order() != bank.rows())
            throw std::invalid_argument(method_name(m) + ": structure matrix order " +
                                        std::to_string(trained->order()) + ", expected " +
                                        std::to_string(bank.rows()));
        return mm_gmotv(f, model, *trained, bank, rcfg).first;
    }
    return mm_gmotv(f, model, StructureMatrix::identity(1), bank, rcfg).first;
}

// --------------------------------------------------------------- training

/// Estimate the structure matrix from clean training signals: derivative
/// stacks are concatenated sample-wise across signals, then mm_kl runs from
/// the identity with no ridge.
inline StructureMatrix train_structure(const std::vector<Signal>& training, int order) {
    if (training.empty()) throw std::invalid_argument("train_structure: no training signals");
    const DerivativeBank bank = DerivativeBank::up_to(order);

    std::size_t total = 0;
    for (const Signal& g : training) total += g.size();
    DerivativeStack stack(bank.rows(), total);
    std::size_t at = 0;
    for (const Signal& g : training) {
        const DerivativeStack s = derivative_stack(g, bank);
        for (int r = 0; r < s.rows(); ++r)
            for (std::size_t x = 0; x < s.cols(); ++x) stack(r, at + x) = s(r, x);
        at += g.size();
    }

    MmKlConfig cfg;
    cfg.lambda_f = 0.0;
    cfg.eps_grad = 1e-6;
    try {
        return mm_kl(stack, StructureMatrix::identity(order), cfg).structure;
    } catch (const rank_deficiency_error& e) {
        throw std::runtime_error(std::string("train_structure: degenerate training data (") +
                                 e.what() +
                                 "); use longer or more varied training signals, or a "
                                 "regularized fit with lambda_f > 0");
    }
}

inline StructureMatrix train_structure(const std::vector<std::string>& paths, int order,
                                       bool first_column_is_index = false) {
    std::vector<Signal> training;
    training.reserve(paths.size());
    for (const std::string& p : paths) training.push_back(load_signal(p, first_column_is_index));
    return train_structure(training, order);
}

// ----------------------------------------------------------------- tuning

struct TuneResult {
    double lambda = 0.0;
    double isnr_db = 0.0;
    std::vector<std::string> warnings;  // one per skipped grid cell
};

inline std::vector<double> default_lambda_grid() {
    std::vector<double> grid(24);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
        grid[i] = std::pow(10.0, -4.0 + 6.0 * t);  // log-spaced in [1e-4, 1e2]
    }
    return grid;
}

/// Evaluate `isnr_at(lambda)` over the grid, return the argmax. Ties go to
/// the smaller lambda; failed evaluations are skipped with a warning and an
/// all-failed grid is an error.
template <class F>
TuneResult tune_lambda(const std::vector<double>& grid, F&& isnr_at) {
    if (grid.empty()) throw std::invalid_argument("tune_lambda: empty lambda grid");
    TuneResult best;
    bool found = false;
    for (double lambda : grid) {
        double value = 0.0;
        try {
            value = isnr_at(lambda);
        } catch (const std::exception& e) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6g", lambda);
            best.warnings.push_back("lambda=" + std::string(buf) + ": " + e.what());
            continue;
        }
        if (!found || value > best.isnr_db ||
            (value == best.isnr_db && lambda < best.lambda)) {
            best.lambda = lambda;
            best.isnr_db = value;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("tune_lambda: every lambda in the grid failed");
    return best;
}

// ------------------------------------------------------------- experiments

struct ExperimentSpec {
    enum class Mode { denoise, deblur };

    std::string test_path;
    std::string train_path;  // optional unless a GMO-* method is requested
    int segment_length = 512;
    int num_segments = 4;
    Mode mode = Mode::denoise;
    std::vector<double> level_db;        // SNR (denoise) or BSNR (deblur) grid
    std::vector<double> blur_variance;   // deblur only
    std::vector<Method> methods;
    std::vector<double> lambda_grid = default_lambda_grid();
    std::uint64_t seed = 0;
    bool index_column = false;
    bool emit_plots = true;
};

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_experiment_spec: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("load_experiment_spec: " + path + ": " + e.what());
    }

    ExperimentSpec spec;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "denoise")
        spec.mode = ExperimentSpec::Mode::denoise;
    else if (mode == "deblur")
        spec.mode = ExperimentSpec::Mode::deblur;
    else
        throw std::runtime_error("load_experiment_spec: mode must be 'denoise' or 'deblur'");

    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        return std::filesystem::path(p).is_absolute() ? p : (base / p).string();
    };
    spec.test_path = resolve(j.at("test_path").get<std::string>());
    if (j.contains("train_path")) spec.train_path = resolve(j.at("train_path").get<std::string>());
    if (j.contains("segment_length")) spec.segment_length = j.at("segment_length").get<int>();
    if (j.contains("num_segments")) spec.num_segments = j.at("num_segments").get<int>();

    const char* level_key = spec.mode == ExperimentSpec::Mode::denoise ? "snr_db" : "bsnr_db";
    spec.level_db = j.at(level_key).get<std::vector<double>>();
    if (spec.mode == ExperimentSpec::Mode::deblur)
        spec.blur_variance = j.at("blur_variance").get<std::vector<double>>();

    for (const auto& name : j.at("methods").get<std::vector<std::string>>())
        spec.methods.push_back(parse_method(name));

    if (j.contains("lambda_grid")) spec.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("index_column")) spec.index_column = j.at("index_column").get<bool>();
    if (j.contains("emit_plots")) spec.emit_plots = j.at("emit_plots").get<bool>();
    return spec;
}

struct CellKey {
    double level_db = 0.0;
    double blur_variance = 0.0;  // 0 for denoise
    Method method = Method::tv1;
};

struct CellResult {
    bool ok = false;
    double lambda = 0.0;
    double isnr_db = 0.0;
    int segments = 0;
    std::string error;  // reason for a missing cell
};

struct CellPlot {
    CellKey key;
    Signal original, degraded, restored;  // first segment at the tuned lambda
};

struct ResultTable {
    std::vector<std::pair<CellKey, CellResult>> cells;  // grid order, each cell once
    std::vector<CellPlot> plots;
};

namespace detail {

/// Round-trip a value through the CSV's 9-significant-digit format so the
/// in-memory table and its serialization agree bit-exactly.
inline double round9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return std::strtod(buf, nullptr);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t state = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 12) + (a >> 4));
    return splitmix64(state);
}

inline std::uint64_t cell_seed(std::uint64_t seed, double level_db, double blur_variance,
                               int segment) {
    std::uint64_t s = mix_seed(seed, std::bit_cast<std::uint64_t>(level_db));
    s = mix_seed(s, std::bit_cast<std::uint64_t>(blur_variance));
    return mix_seed(s, static_cast<std::uint64_t>(segment));
}

inline std::string trim_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

/// Full benchmark: segment, degrade (blur then noise), restore every method
/// at every grid level, tune lambda per (cell, method) shared across
/// segments, and average ISNR over segments. Deterministic in the spec.
inline ResultTable run_experiment(const ExperimentSpec& spec) {
    if (spec.level_db.empty()) throw std::invalid_argument("run_experiment: empty level grid");
    if (spec.methods.empty()) throw std::invalid_argument("run_experiment: no methods");
    if (spec.mode == ExperimentSpec::Mode::deblur && spec.blur_variance.empty())
        throw std::invalid_argument("run_experiment: empty blur-variance grid");
    if (spec.segment_length < 2 || spec.num_segments < 1)
        throw std::invalid_argument("run_experiment: bad segmentation");

    const Signal test = load_signal(spec.test_path, spec.index_column);
    const std::size_t need =
        static_cast<std::size_t>(spec.segment_length) * static_cast<std::size_t>(spec.num_segments);
    if (need > test.size())
        throw std::invalid_argument("run_experiment: test signal has " +
                                    std::to_string(test.size()) + " samples, need " +
                                    std::to_string(need));

    std::vector<Signal> segments;
    for (int s = 0; s < spec.num_segments; ++s) {
        std::vector<double> seg(test.samples().begin() + s * spec.segment_length,
                                test.samples().begin() + (s + 1) * spec.segment_length);
        segments.emplace_back(std::move(seg));
    }

    std::map<int, StructureMatrix> trained;  // bank order -> S*
    for (Method m : spec.methods)
        if (method_needs_training(m)) {
            const int order = method_bank(m).rows();
            if (trained.count(order)) continue;
            if (spec.train_path.empty())
                throw std::invalid_argument("run_experiment: " + method_name(m) +
                                            " requested but no train_path given");
            trained.emplace(order,
                            train_structure(std::vector<std::string>{spec.train_path}, order,
                                            spec.index_column));
        }

    const std::vector<double> blurs =
        spec.mode == ExperimentSpec::Mode::deblur ? spec.blur_variance : std::vector<double>{0.0};
    const NoiseReference ref = spec.mode == ExperimentSpec::Mode::deblur
                                   ? NoiseReference::blurred_variance
                                   : NoiseReference::signal_power;

    ResultTable table;
    for (double level : spec.level_db) {
        for (double bv : blurs) {
            const DegradationModel model{spec.mode == ExperimentSpec::Mode::deblur
                                             ? gaussian_kernel(bv)
                                             : Kernel::delta()};
            std::vector<Signal> degraded;
            for (int s = 0; s < spec.num_segments; ++s) {
                const Signal blurred = convolve(segments[static_cast<std::size_t>(s)], model.blur);
                degraded.push_back(
                    add_noise(blurred, level, ref, detail::cell_seed(spec.seed, level, bv, s)));
            }

            for (Method m : spec.methods) {
                const StructureMatrix* s_star = nullptr;
                if (method_needs_training(m)) s_star = &trained.at(method_bank(m).rows());

                CellKey key{level, bv, m};
                CellResult cell;
                cell.segments = spec.num_segments;
                try {
                    const TuneResult tuned =
                        tune_lambda(spec.lambda_grid, [&](double lambda) {
                            double acc = 0.0;
                            for (int s = 0; s < spec.num_segments; ++s) {
                                const std::size_t si = static_cast<std::size_t>(s);
                                const Signal restored = restore_with_method(
                                    m, degraded[si], model, lambda, s_star);
                                acc += isnr_db(segments[si], degraded[si], restored);
                            }
                            return acc / spec.num_segments;
                        });
                    cell.ok = true;
                    cell.lambda = detail::round9(tuned.lambda);
                    cell.isnr_db = detail::round9(tuned.isnr_db);

                    if (spec.emit_plots) {
                        CellPlot plot{key, segments[0], degraded[0],
                                      restore_with_method(m, degraded[0], model, tuned.lambda,
                                                          s_star)};
                        table.plots.push_back(std::move(plot));
                    }
                } catch (const std::exception& e) {
                    cell.ok = false;
                    cell.error = e.what();
                }
                table.cells.emplace_back(key, std::move(cell));
            }
        }
    }
    return table;
}

// ----------------------------------------------------------------- outputs

inline void write_results_csv(const ResultTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_results_csv: cannot open '" + path + "'");
    out << "level_db,blur_variance,method,lambda,isnr_db,segments\n";
    char buf[160];
    for (const auto& [key, cell] : table.cells) {
        if (!cell.ok) continue;  // missing cells are reported in results.md
        std::snprintf(buf, sizeof(buf), "%.8e,%.8e,%s,%.8e,%.8e,%d\n", key.level_db,
                      key.blur_variance, method_name(key.method).c_str(), cell.lambda,
                      cell.isnr_db, cell.segments);
        out << buf;
    }
    if (!out) throw std::runtime_error("write_results_csv: write failed for '" + path + "'");
}

inline ResultTable parse_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_results_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) ||
        line != "level_db,blur_variance,method,lambda,isnr_db,segments")
        throw std::runtime_error("parse_results_csv: bad header in '" + path + "'");

    ResultTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line)
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        fields.push_back(cur);
        if (fields.size() != 6)
            throw std::runtime_error("parse_results_csv: " + path + ":" +
                                     std::to_string(lineno) + ": expected 6 fields");
        CellKey key;
        CellResult cell;
        key.level_db = std::stod(fields[0]);
        key.blur_variance = std::stod(fields[1]);
        key.method = parse_method(fields[2]);
        cell.lambda = std::stod(fields[3]);
        cell.isnr_db = std::stod(fields[4]);
        cell.segments = std::stoi(fields[5]);
        cell.ok = true;
        table.cells.emplace_back(key, cell);
    }
    return table;
}

inline void write_results_md(const ResultTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_results_md: cannot open '" + path + "'");

    std::vector<Method> methods;
    std::vector<std::pair<double, double>> grid;  // (level, blur) in first-seen order
    for (const auto& [key, cell] : table.cells) {
        if (std::find(methods.begin(), methods.end(), key.method) == methods.end())
            methods.push_back(key.method);
        const std::pair<double, double> g{key.level_db, key.blur_variance};
        if (std::find(grid.begin(), grid.end(), g) == grid.end()) grid.push_back(g);
    }
    auto lookup = [&](double level, double bv, Method m) -> const CellResult* {
        for (const auto& [key, cell] : table.cells)
            if (key.level_db == level && key.blur_variance == bv && key.method == m) return &cell;
        return nullptr;
    };

    out << "# Benchmark results\n\nAverage ISNR (dB) per cell; tuned lambda in parentheses.\n\n";
    out << "| level (dB) | blur var |";
    for (Method m : methods) out << " " << method_name(m) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) out << "---|";
    out << "\n";
    char buf[96];
    for (const auto& [level, bv] : grid) {
        out << "| " << detail::trim_number(level) << " | " << detail::trim_number(bv) << " |";
        for (Method m : methods) {
            const CellResult* cell = lookup(level, bv, m);
            if (cell != nullptr && cell->ok) {
                std::snprintf(buf, sizeof(buf), " %.2f (%.4g) |", cell->isnr_db, cell->lambda);
                out << buf;
            } else {
                out << " — |";
            }
        }
        out << "\n";
    }

    bool any_failed = false;
    for (const auto& [key, cell] : table.cells) any_failed = any_failed || !cell.ok;
    if (any_failed) {
        out << "\n## Missing cells\n\n";
        for (const auto& [key, cell] : table.cells)
            if (!cell.ok)
                out << "- level " << detail::trim_number(key.level_db) << ", blur "
                    << detail::trim_number(key.blur_variance) << ", " << method_name(key.method)
                    << ": " << cell.error << "\n";
    }
    if (!out) throw std::runtime_error("write_results_md: write failed for '" + path + "'");
}

/// Write results.csv, results.md, and one overlay SVG per plotted cell.
inline void emit_outputs(const ResultTable& table, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_results_csv(table, (dir / "results.csv").string());
    write_results_md(table, (dir / "results.md").string());
    for (const CellPlot& p : table.plots) {
        const std::string name = "overlay_" + method_name(p.key.method) + "_level" +
                                 detail::trim_number(p.key.level_db) + "_var" +
                                 detail::trim_number(p.key.blur_variance) + ".svg";
        const std::string title = method_name(p.key.method) + "  level " +
                                  detail::trim_number(p.key.level_db) + " dB, blur variance " +
                                  detail::trim_number(p.key.blur_variance);
        write_overlay_svg((dir / name).string(), title,
                          {{"original", &p.original},
                           {"degraded", &p.degraded},
                           {"restored", &p.restored}});
    }
}

/// ISNR-vs-level charts from a results table (one chart per blur variance).
inline void plot_results(const ResultTable& table, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    std::vector<double> blurs;
    std::vector<Method> methods;
    std::vector<double> levels;
    for (const auto& [key, cell] : table.cells) {
        if (std::find(blurs.begin(), blurs.end(), key.blur_variance) == blurs.end())
            blurs.push_back(key.blur_variance);
        if (std::find(methods.begin(), methods.end(), key.method) == methods.end())
            methods.push_back(key.method);
        if (std::find(levels.begin(), levels.end(), key.level_db) == levels.end())
            levels.push_back(key.level_db);
    }
    std::sort(levels.begin(), levels.end());

    for (double bv : blurs) {
        std::vector<std::pair<std::string, std::vector<double>>> series;
        for (Method m : methods) {
            std::vector<double> ys;
            bool complete = true;
            for (double level : levels) {
                bool found = false;
                for (const auto& [key, cell] : table.cells)
                    if (cell.ok && key.method == m && key.blur_variance == bv &&
                        key.level_db == level) {
                        ys.push_back(cell.isnr_db);
                        found = true;
                        break;
                    }
                if (!found) complete = false;
            }
            if (complete && !ys.empty()) series.emplace_back(method_name(m), std::move(ys));
        }
        if (series.empty()) continue;
        const std::string name = "isnr_vs_level_var" + detail::trim_number(bv) + ".svg";
        write_line_chart_svg((dir / name).string(),
                             "ISNR (dB) vs level, blur variance " + detail::trim_number(bv),
                             levels, series);
    }
}

}  // namespace gmotv
