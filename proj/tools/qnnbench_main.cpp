#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qnnbench/experiments.hpp"
#include "qnnbench/serialize.hpp"

namespace {

// Exit codes: 0 success, 2 config, 3 data, 4 dependency, 5 partial failure,
// 6 empty report.
enum ExitCode {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kDependencyError = 4,
    kPartialFailure = 5,
    kEmptyReport = 6
};

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string data_root;
    int workers = 0;
    bool resume = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "JSON experiment config");
    if (needs_config) opt->required();
    cmd->add_option("--out", args.out_dir, "result store directory");
    cmd->add_option("--workers", args.workers, "worker threads for suite cells");
    cmd->add_option("--data-root", args.data_root,
                    "data directory (default $QNNBENCH_DATA_ROOT or ./data)");
    cmd->add_flag("--resume", args.resume,
                  "reuse valid cells in the store (always on; flag kept for scripts)");
}

qnnbench::ExperimentConfig make_config(const CommonArgs& args,
                                       qnnbench::ExperimentKind expected) {
    qnnbench::ExperimentConfig cfg = qnnbench::load_config(args.config_path);
    if (cfg.kind != expected) {
        throw qnnbench::ConfigError("config kind does not match the subcommand");
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.data_root.empty()) cfg.data_root = args.data_root;
    if (args.workers > 0) cfg.workers = args.workers;
    return cfg;
}

int suite_exit(const std::vector<qnnbench::SuiteResult>& results) {
    for (const auto& r : results) {
        std::cout << r.suite_id << ": best " << r.summary.best << ", average "
                  << r.summary.average << ", worst " << r.summary.worst << " ("
                  << r.cells_trained << " cells trained, " << r.cells_failed
                  << " failed)\n";
    }
    for (const auto& r : results) {
        if (r.cells_failed > 0) return kPartialFailure;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized (quantum) neural network benchmarking workbench"};
    app.require_subcommand(1);

    CommonArgs gen_args, random_args, conv_args, cross_args, analyze_args, report_args;
    std::string report_kind = "summary";

    auto* gen = app.add_subcommand("gen-data", "generate or synthesize data sets");
    add_common(gen, gen_args);
    auto* random = app.add_subcommand("run-random-suite",
                                      "train randomized classical/quantum model suites");
    add_common(random, random_args);
    auto* conv = app.add_subcommand("run-conv-suite",
                                    "train the CNN/QCCNN/baseline grid on image data");
    add_common(conv, conv_args);
    auto* cross = app.add_subcommand("cross-dataset",
                                     "retrain best models across data-set versions");
    add_common(cross, cross_args);
    auto* analyze = app.add_subcommand("analyze", "derive analysis tables from a store");
    add_common(analyze, analyze_args);
    auto* report = app.add_subcommand("report", "emit CSV reports from a store");
    add_common(report, report_args);
    report->add_option("--kind", report_kind, "summary | correlation | transfer");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            qnnbench::run_gen_data(make_config(gen_args, qnnbench::ExperimentKind::GenData));
            return kOk;
        }
        if (random->parsed()) {
            auto cfg = make_config(random_args, qnnbench::ExperimentKind::RandomSuite);
            qnnbench::ResultStore store(cfg.out_dir);
            return suite_exit(qnnbench::run_random_suite(cfg, store));
        }
        if (conv->parsed()) {
            auto cfg = make_config(conv_args, qnnbench::ExperimentKind::ConvSuite);
            qnnbench::ResultStore store(cfg.out_dir);
            return suite_exit(qnnbench::run_conv_suite(cfg, store));
        }
        if (cross->parsed()) {
            auto cfg = make_config(cross_args, qnnbench::ExperimentKind::CrossDataset);
            qnnbench::ResultStore store(cfg.out_dir);
            const auto cells = qnnbench::run_cross_dataset(cfg, store);
            qnnbench::run_report(cfg, store, "transfer");
            std::cout << cells.size() << " transfer cells written\n";
            return kOk;
        }
        if (analyze->parsed()) {
            auto cfg = make_config(analyze_args, qnnbench::ExperimentKind::Analyze);
            qnnbench::ResultStore store(cfg.out_dir);
            qnnbench::run_analyze(cfg, store);
            return kOk;
        }
        if (report->parsed()) {
            auto cfg = make_config(report_args, qnnbench::ExperimentKind::Report);
            qnnbench::ResultStore store(cfg.out_dir);
            if (!qnnbench::run_report(cfg, store, report_kind)) {
                std::cerr << "warning: empty report selection\n";
                return kEmptyReport;
            }
            return kOk;
        }
    } catch (const qnnbench::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const qnnbench::DependencyError& e) {
        std::cerr << "dependency error: " << e.what() << "\n";
        return kDependencyError;
    } catch (const qnnbench::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const qnnbench::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const qnnbench::CapacityError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kOk;
}
