// conceptguard CLI: generate synthetic concept worlds, fit rule weights,
// run the attack/identify/repair pipeline and print the certified bounds.
#include "conceptguard/experiment.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace {

using namespace conceptguard;

std::filesystem::path resolve_out_dir(const std::string& cli_out, const ExperimentConfig& cfg) {
    if (!cli_out.empty())
        return cli_out;
    if (!cfg.output.dir.empty())
        return cfg.output.dir;
    if (const char* env = std::getenv("CONCEPTGUARD_OUT"); env && *env)
        return env;
    return "out";
}

void print_metrics_row(const char* label, const char* eps, const MetricsRow& m) {
    char ir[16] = "-";
    char sr[16] = "-";
    if (m.identification_rate)
        std::snprintf(ir, sizeof ir, "%.2f", *m.identification_rate);
    if (m.success_rate)
        std::snprintf(sr, sizeof sr, "%.2f", *m.success_rate);
    std::printf("%-8s %-4s %6d %8d %9s %9s %8.4f %8.4f %8.2f %8.2f %8.2f %8.2f\n", label,
                eps, m.n, m.flagged, ir, sr, m.lsm_before, m.lsm_after, m.e_acc_before,
                m.e_acc_after, m.p_acc_before, m.p_acc_after);
}

void print_run_report(const RunReport& rep) {
    std::printf("%-8s %-4s %6s %8s %9s %9s %8s %8s %8s %8s %8s %8s\n", "slice", "eps", "n",
                "flagged", "IR", "SR", "LSM0", "LSM1", "EACC0", "EACC1", "PACC0", "PACC1");
    print_metrics_row("clean", "-", rep.clean);
    for (const BudgetReport& br : rep.budgets) {
        char label[16];
        std::snprintf(label, sizeof label, "B=%d", br.budget);
        print_metrics_row(label, br.eps_label.c_str(), br.metrics);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"logic-guided detection and repair of concept explanations"};
    app.require_subcommand(1);

    std::string configPath;
    std::vector<std::string> overrides;
    std::string outDir;
    int workers = -1;
    bool timing = false;
    bool noRepair = false;

    app.add_option("--config", configPath, "experiment config file (JSON)");
    app.add_option("--partial", overrides,
                   "override one config field, dotted.key=value; repeatable");
    app.add_option("--out", outDir, "output directory (default: config, then $CONCEPTGUARD_OUT)");
    app.add_option("--workers", workers, "worker threads, 0 means all cores");
    app.add_flag("--timing", timing, "print phase timings");
    app.add_flag("--no-repair", noRepair, "identify violations but skip intervention");

    CLI::App* gen = app.add_subcommand("gen", "generate dataset, rules and weights");
    CLI::App* learn =
        app.add_subcommand("learn-weights", "fit rule weights by maximum likelihood");
    CLI::App* runCmd = app.add_subcommand("run", "attack, identify, repair and report");
    CLI::App* bounds = app.add_subcommand("bounds", "certified detection bound table");
    CLI::App* sweepCmd = app.add_subcommand("sweep", "knowledge ratio and family ablation");
    for (CLI::App* sub : {gen, learn, runCmd, bounds, sweepCmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg;
        if (!configPath.empty())
            cfg = load_config(configPath);
        for (const std::string& o : overrides)
            apply_override(cfg, o);
        if (workers >= 0)
            cfg.output.workers = workers;
        if (noRepair)
            cfg.repair.enabled = false;
        validate_config(cfg);

        std::filesystem::path out = resolve_out_dir(outDir, cfg);
        auto t0 = std::chrono::steady_clock::now();

        if (gen->parsed()) {
            std::fputs(cmd_gen(cfg, out).c_str(), stdout);
        } else if (learn->parsed()) {
            FitResult fit = cmd_learn_weights(cfg, out);
            std::printf("nll %.6f after %d epochs, %zu weights -> %s\n", fit.nll,
                        fit.epochs_run, fit.weights.size(),
                        (out / "weights.txt").string().c_str());
        } else if (runCmd->parsed()) {
            PhaseTimes times;
            RunReport rep = run_experiment(cfg, out, &times);
            print_run_report(rep);
            std::printf("reports -> %s\n", out.string().c_str());
            if (timing)
                std::printf("timing: prepare %.3fs attack %.3fs evaluate %.3fs total %.3fs\n",
                            times.prepare_s, times.attack_s, times.evaluate_s, times.total_s);
        } else if (bounds->parsed()) {
            BoundsReport rep = cmd_bounds(cfg, out);
            std::printf("factors %d, budget %d, assumption_ok %d\n", rep.n_factors,
                        rep.budget, rep.assumption_ok ? 1 : 0);
            if (rep.theta_T && rep.theta_F)
                std::printf("theta_T %.6f theta_F %.6f\n", *rep.theta_T, *rep.theta_F);
            std::printf("empirical concept acc %.6f, f(N=%d) %.6f\n",
                        rep.empirical_concept_acc,
                        static_cast<int>(rep.bound_by_n.size()) - 1,
                        rep.bound_by_n.empty() ? 0.0 : rep.bound_by_n.back());
            std::printf("lemma2 %s\ntheorem1 %s\n", rep.lemma2_note.c_str(),
                        rep.theorem1_note.c_str());
        } else if (sweepCmd->parsed()) {
            std::vector<SweepRow> rows = cmd_sweep(cfg, out);
            std::printf("%zu sweep rows -> %s\n", rows.size(), out.string().c_str());
        }

        if (timing && !runCmd->parsed()) {
            double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                               .count();
            std::printf("timing: total %.3fs\n", total);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
