#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polyloc/config.hpp"
#include "polyloc/model.hpp"
#include "polyloc/nbp.hpp"
#include "polyloc/poa.hpp"

namespace polyloc {

// Bits of the per-row `flag` column.
enum ResultFlag : int {
    kFlagPoaFallback = 1,    // agent's POA intersection went empty at some round
    kFlagNbpDegenerate = 2,  // belief weights underflowed at this iteration
};

struct PhaseTimes {
    double scenario_s = 0.0;
    double poa_s = 0.0;
    double nbp_s = 0.0;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    // errors[agent][l - 1] = ||x_hat_j - x_j|| after NBP iteration l.
    std::vector<std::vector<double>> errors;
    // poa_areas[agent][l - 1] = polygon area after POA round l; empty for the baseline.
    std::vector<std::vector<double>> poa_areas;
    // flags[agent][l - 1], ResultFlag bits.
    std::vector<std::vector<int>> flags;
    // Fraction of belief particles with negligible weight, per NBP iteration.
    std::vector<double> negligible_fraction;
    // Wall clock; never persisted.
    PhaseTimes times;

    std::size_t n_agents() const { return errors.size(); }
    std::size_t n_iterations() const { return errors.empty() ? 0 : errors.front().size(); }
    // Area of the agent's final polygon, NaN without POA.
    double final_area(std::size_t agent) const;
};

struct Summary {
    std::vector<double> mean_error;                      // per NBP iteration
    std::vector<std::pair<double, double>> outage;       // (threshold, P(e > threshold))
    std::vector<double> mean_poa_area;                   // per POA round
    int convergence_iteration = 0;                       // 1-based
    double converged_mean_error = 0.0;
    double outage_at_threshold = 0.0;                    // at RunConfig::outage_threshold
    double negligible_fraction = 0.0;                    // mean over trials and iterations
    int degenerate_count = 0;
};

struct RunOutput {
    Summary summary;
    std::vector<TrialResult> trials;
};

std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

// Scenario of trial `trial` (shared by both proposal kinds).
Scenario trial_scenario(const RunConfig& config, int trial);

TrialResult run_trial(const RunConfig& config, int trial);

// Runs config.n_trials trials, on config.threads worker threads; results are
// ordered by trial index regardless of scheduling.
RunOutput run_trials(const RunConfig& config);

// Default outage sweep: 0 to 5 m in 0.05 m steps.
std::vector<double> default_thresholds();

// First l (1-based) with |e(l+1) - e(l)| / e(l) < rel_tol; the last iteration
// when never met.
int convergence_iteration(const std::vector<double>& mean_errors, double rel_tol);

// Empirical P(e > threshold) over all trials and agents at `iteration` (1-based).
std::vector<std::pair<double, double>> outage_curve(const std::vector<TrialResult>& results,
                                                    const std::vector<double>& thresholds,
                                                    int iteration);

std::vector<double> mean_error_per_iteration(const std::vector<TrialResult>& results);

Summary summarize(const std::vector<TrialResult>& results, double rel_tol,
                  double outage_threshold, const std::vector<double>& thresholds);

// CSV `trial,agent,iteration,error_m,polygon_area_m2,flag`, one row per
// (trial, agent, NBP iteration), floats with 9 significant digits.
std::string results_to_csv(const std::vector<TrialResult>& results);
void export_results(const std::vector<TrialResult>& results, const std::string& path);
// Parses what export_results writes; the area column becomes a one-entry
// poa_areas history. Throws std::runtime_error with the line number on bad input.
std::vector<TrialResult> results_from_csv(const std::string& text);
std::vector<TrialResult> import_results(const std::string& path);

std::string summary_to_json(const Summary& summary, const RunConfig& config);
void export_summary(const Summary& summary, const RunConfig& config, const std::string& path);
// results.csv -> results.summary.json
std::string summary_path_for(const std::string& results_path);

std::string config_to_json(const RunConfig& config);
// Keys mirror RunConfig fields; missing keys keep `base` values.
RunConfig config_from_json(const std::string& text, RunConfig base = {});

// Per-round polygon dump: `agent,iteration,area_m2,n_vertices,vertices` with
// vertices as "x y;x y;...".
// `rounds[l - 1]` is the state after round l.
std::string poa_dump_csv(const std::vector<PoaState>& rounds);

}  // namespace polyloc
