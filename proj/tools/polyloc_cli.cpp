// polyloc: scenario generation, polygon outer-approximation and NBP
// localization runs from the command line.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyloc/config.hpp"
#include "polyloc/model.hpp"
#include "polyloc/poa.hpp"
#include "polyloc/sim.hpp"

namespace {

using namespace polyloc;

// RunConfig flags shared by the subcommands. Values given on the command line
// override those read from --config.
struct ConfigFlags {
    RunConfig values;
    std::string proposal = "polygon";
    std::string config_path;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;

    template <typename T>
    void add(CLI::App* app, const std::string& name, T RunConfig::*field, const std::string& help) {
        auto* opt = app->add_option(name, values.*field, help)->capture_default_str();
        overrides.emplace_back(opt, [this, field](RunConfig& c) { c.*field = values.*field; });
    }

    void attach(CLI::App* app, bool seed_required) {
        app->add_option("--config", config_path, "JSON config file (RunConfig keys)")
            ->check(CLI::ExistingFile);
        add(app, "--width", &RunConfig::width, "deployment width [m]");
        add(app, "--height", &RunConfig::height, "deployment height [m]");
        add(app, "--agents", &RunConfig::n_agents, "number of agents");
        add(app, "--anchors", &RunConfig::n_anchors, "number of anchors");
        add(app, "--comm-range", &RunConfig::comm_range, "communication range [m]");
        add(app, "--lambda-inv", &RunConfig::lambda_inv, "mean ranging error [m]");
        add(app, "--n-edges", &RunConfig::n_edges, "anchor polygon edges");
        add(app, "--poa-iterations", &RunConfig::poa_iterations, "POA rounds");
        add(app, "--samples", &RunConfig::n_samples, "particles per message");
        add(app, "--nbp-iterations", &RunConfig::nbp_iterations, "NBP iterations");
        add(app, "--outage-threshold", &RunConfig::outage_threshold, "outage error threshold [m]");
        add(app, "--convergence-tol", &RunConfig::convergence_tol, "relative convergence tolerance");
        add(app, "--trials", &RunConfig::n_trials, "number of random topologies");
        add(app, "--threads", &RunConfig::threads, "worker threads");
        auto* seed = app->add_option("--seed", values.seed, "master seed");
        if (seed_required) seed->required();
        overrides.emplace_back(seed, [this](RunConfig& c) { c.seed = values.seed; });
        auto* prop = app->add_option("--proposal", proposal, "polygon or baseline")
                         ->check(CLI::IsMember({"polygon", "baseline"}))
                         ->capture_default_str();
        overrides.emplace_back(prop, [this](RunConfig& c) { c.proposal = parse_proposal_kind(proposal); });
    }

    RunConfig resolve() const {
        RunConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config file '" + config_path + "'");
            std::ostringstream buf;
            buf << in.rdbuf();
            c = config_from_json(buf.str());
        }
        for (const auto& [opt, apply] : overrides) {
            if (opt->count() > 0) apply(c);
        }
        c.validate();
        return c;
    }
};

void write_text(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string summary_csv(const Summary& s) {
    std::ostringstream out;
    out.precision(9);
    out << "iteration,mean_error_m\n";
    for (std::size_t l = 0; l < s.mean_error.size(); ++l) {
        out << l + 1 << ',' << s.mean_error[l] << '\n';
    }
    out << "\nthreshold_m,outage_probability\n";
    for (const auto& [th, p] : s.outage) out << th << ',' << p << '\n';
    out << "\nconvergence_iteration," << s.convergence_iteration << '\n';
    out << "converged_mean_error_m," << s.converged_mean_error << '\n';
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polygon-constrained cooperative localization simulator"};
    app.require_subcommand(1);

    ConfigFlags gen_flags;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "write a random scenario file");
    gen_flags.attach(gen, false);
    gen->add_option("-o,--out", gen_out, "scenario file ('-' for stdout)");

    ConfigFlags poa_flags;
    std::string poa_scenario;
    std::string poa_out;
    auto* poa = app.add_subcommand("poa", "polygon outer-approximation dump");
    poa_flags.attach(poa, false);
    poa->add_option("--scenario", poa_scenario, "scenario file (default: generate from flags)")
        ->check(CLI::ExistingFile);
    poa->add_option("-o,--out", poa_out, "dump file ('-' for stdout)");

    ConfigFlags run_flags;
    std::string run_out = "results.csv";
    auto* run = app.add_subcommand("run", "Monte-Carlo POA + NBP pipeline");
    run_flags.attach(run, true);
    run->add_option("-o,--out", run_out, "results CSV; summary goes to <stem>.summary.json")
        ->capture_default_str();

    std::string sum_in;
    std::string sum_out;
    double sum_tol = 0.01;
    std::vector<double> sum_thresholds;
    auto* summ = app.add_subcommand("summarize", "curves from a results CSV");
    summ->add_option("results", sum_in, "results CSV")->required();
    summ->add_option("-o,--out", sum_out, "output CSV ('-' for stdout)");
    summ->add_option("--convergence-tol", sum_tol, "relative convergence tolerance")
        ->capture_default_str();
    summ->add_option("--thresholds", sum_thresholds, "outage thresholds [m]");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const RunConfig config = gen_flags.resolve();
            Rng rng(derive_seed(config.seed, 1));
            write_text(scenario_to_json(generate_scenario(config, rng)), gen_out);
        } else if (poa->parsed()) {
            const RunConfig config = poa_flags.resolve();
            Scenario scenario;
            if (poa_scenario.empty()) {
                Rng rng(derive_seed(config.seed, 1));
                scenario = generate_scenario(config, rng);
            } else {
                scenario = load_scenario(poa_scenario);
            }
            Rng rng(derive_seed(config.seed, 2));
            std::vector<PoaState> rounds{poa_first_iteration(scenario, config.n_edges, rng)};
            for (int l = 1; l < config.poa_iterations; ++l) {
                rounds.push_back(poa_iterate(rounds.back(), scenario));
            }
            write_text(poa_dump_csv(rounds), poa_out);
        } else if (run->parsed()) {
            const RunConfig config = run_flags.resolve();
            const RunOutput output = run_trials(config);
            export_results(output.trials, run_out);
            export_summary(output.summary, config, summary_path_for(run_out));
            PhaseTimes total;
            for (const TrialResult& t : output.trials) {
                total.scenario_s += t.times.scenario_s;
                total.poa_s += t.times.poa_s;
                total.nbp_s += t.times.nbp_s;
            }
            std::fprintf(stderr, "trials: %d  converged at iteration %d  mean error %.4f m\n",
                         config.n_trials, output.summary.convergence_iteration,
                         output.summary.converged_mean_error);
            std::fprintf(stderr, "wall clock [s]: scenario %.3f  poa %.3f  nbp %.3f\n",
                         total.scenario_s, total.poa_s, total.nbp_s);
        } else if (summ->parsed()) {
            const auto results = import_results(sum_in);
            if (results.empty()) {
                throw std::runtime_error(sum_in + ": no result rows");
            }
            const auto thresholds = sum_thresholds.empty() ? default_thresholds() : sum_thresholds;
            const Summary s = summarize(results, sum_tol, RunConfig{}.outage_threshold, thresholds);
            write_text(summary_csv(s), sum_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "polyloc: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
