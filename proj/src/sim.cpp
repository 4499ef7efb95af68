#include "polyloc/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace polyloc {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

double TrialResult::final_area(std::size_t agent) const {
    if (agent >= poa_areas.size() || poa_areas[agent].empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return poa_areas[agent].back();
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(trial));
}

Scenario trial_scenario(const RunConfig& config, int trial) {
    RunConfig c = config;
    c.seed = trial_seed(config.seed, trial);
    Rng rng(derive_seed(c.seed, 1));
    return generate_scenario(c, rng);
}

TrialResult run_trial(const RunConfig& config, int trial) {
    config.validate();
    TrialResult result;
    result.trial = trial;
    result.seed = trial_seed(config.seed, trial);

    auto t0 = Clock::now();
    const Scenario scenario = trial_scenario(config, trial);
    result.times.scenario_s = seconds_since(t0);
    const std::size_t n = scenario.agents.size();

    std::optional<PoaState> poa;
    if (config.proposal == ProposalKind::PolygonUniform) {
        t0 = Clock::now();
        Rng rng(derive_seed(result.seed, 2));
        poa = run_poa(scenario, config.n_edges, config.poa_iterations, rng);
        result.times.poa_s = seconds_since(t0);
        result.poa_areas = poa->area_history;
    } else {
        result.poa_areas.assign(n, {});
    }

    t0 = Clock::now();
    NbpConfig nbp;
    nbp.proposal = config.proposal;
    nbp.n_samples = static_cast<std::size_t>(config.n_samples);
    nbp.iterations = config.nbp_iterations;
    nbp.seed = derive_seed(result.seed, 3);
    const auto states = run_nbp(scenario, poa ? &*poa : nullptr, nbp);
    result.times.nbp_s = seconds_since(t0);

    result.errors.assign(n, {});
    result.flags.assign(n, {});
    for (std::size_t l = 1; l < states.size(); ++l) {
        std::size_t negligible = 0;
        for (std::size_t j = 0; j < n; ++j) {
            result.errors[j].push_back(distance(states[l].estimates[j], scenario.agents[j].position));
            int flag = 0;
            if (poa && poa->fallback[j]) flag |= kFlagPoaFallback;
            if (states[l].degenerate[j]) flag |= kFlagNbpDegenerate;
            result.flags[j].push_back(flag);
            negligible += states[l].negligible[j];
        }
        result.negligible_fraction.push_back(static_cast<double>(negligible) /
                                             static_cast<double>(n * nbp.n_samples));
    }
    return result;
}

RunOutput run_trials(const RunConfig& config) {
    config.validate();
    RunOutput out;
    out.trials.resize(static_cast<std::size_t>(config.n_trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int t = next++; t < config.n_trials; t = next++) {
            try {
                out.trials[static_cast<std::size_t>(t)] = run_trial(config, t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n_threads = std::min(config.threads, config.n_trials);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    out.summary = summarize(out.trials, config.convergence_tol, config.outage_threshold,
                            default_thresholds());
    return out;
}

std::vector<double> default_thresholds() {
    std::vector<double> out;
    for (int k = 0; k <= 100; ++k) out.push_back(0.05 * k);
    return out;
}

int convergence_iteration(const std::vector<double>& mean_errors, double rel_tol) {
    if (mean_errors.size() < 2) {
        throw std::invalid_argument("convergence_iteration needs at least two iterations");
    }
    for (std::size_t l = 0; l + 1 < mean_errors.size(); ++l) {
        const double base = mean_errors[l];
        const double change = std::abs(mean_errors[l + 1] - base);
        if (base == 0.0 ? change == 0.0 : change / base < rel_tol) {
            return static_cast<int>(l) + 1;
        }
    }
    return static_cast<int>(mean_errors.size());
}

std::vector<std::pair<double, double>> outage_curve(const std::vector<TrialResult>& results,
                                                    const std::vector<double>& thresholds,
                                                    int iteration) {
    if (results.empty()) {
        throw std::invalid_argument("outage_curve needs at least one trial");
    }
    std::vector<double> errors;
    for (const TrialResult& r : results) {
        for (const auto& agent : r.errors) {
            errors.push_back(agent.at(static_cast<std::size_t>(iteration - 1)));
        }
    }
    std::vector<std::pair<double, double>> out;
    for (double th : thresholds) {
        std::size_t above = 0;
        for (double e : errors) {
            if (e > th) ++above;
        }
        const double p = errors.empty() ? 0.0
                                        : static_cast<double>(above) / static_cast<double>(errors.size());
        out.emplace_back(th, p);
    }
    return out;
}

std::vector<double> mean_error_per_iteration(const std::vector<TrialResult>& results) {
    if (results.empty()) {
        throw std::invalid_argument("no trial results");
    }
    const std::size_t iters = results.front().n_iterations();
    std::vector<double> sum(iters, 0.0);
    std::size_t count = 0;
    for (const TrialResult& r : results) {
        for (const auto& agent : r.errors) {
            if (agent.size() != iters) {
                throw std::invalid_argument("trials disagree on the number of iterations");
            }
            for (std::size_t l = 0; l < iters; ++l) sum[l] += agent[l];
            ++count;
        }
    }
    for (double& s : sum) s = count ? s / static_cast<double>(count) : 0.0;
    return sum;
}

Summary summarize(const std::vector<TrialResult>& results, double rel_tol,
                  double outage_threshold, const std::vector<double>& thresholds) {
    Summary s;
    s.mean_error = mean_error_per_iteration(results);
    if (s.mean_error.empty()) {
        throw std::invalid_argument("trial results have no iterations");
    }
    s.convergence_iteration =
        s.mean_error.size() < 2 ? 1 : convergence_iteration(s.mean_error, rel_tol);
    s.converged_mean_error = s.mean_error[static_cast<std::size_t>(s.convergence_iteration - 1)];
    s.outage = outage_curve(results, thresholds, s.convergence_iteration);
    s.outage_at_threshold =
        outage_curve(results, {outage_threshold}, s.convergence_iteration).front().second;

    std::vector<double> area_sum;
    std::vector<std::size_t> area_count;
    double negligible = 0.0;
    std::size_t negligible_count = 0;
    for (const TrialResult& r : results) {
        for (const auto& history : r.poa_areas) {
            if (history.size() > area_sum.size()) {
                area_sum.resize(history.size(), 0.0);
                area_count.resize(history.size(), 0);
            }
            for (std::size_t l = 0; l < history.size(); ++l) {
                area_sum[l] += history[l];
                ++area_count[l];
            }
        }
        for (double f : r.negligible_fraction) {
            negligible += f;
            ++negligible_count;
        }
        for (const auto& agent : r.flags) {
            for (int f : agent) {
                if (f & kFlagNbpDegenerate) ++s.degenerate_count;
            }
        }
    }
    for (std::size_t l = 0; l < area_sum.size(); ++l) {
        s.mean_poa_area.push_back(area_sum[l] / static_cast<double>(area_count[l]));
    }
    s.negligible_fraction = negligible_count ? negligible / static_cast<double>(negligible_count) : 0.0;
    return s;
}

// --- results CSV --------------------------------------------------------

namespace {
constexpr const char* kResultsHeader = "trial,agent,iteration,error_m,polygon_area_m2,flag";
}

std::string results_to_csv(const std::vector<TrialResult>& results) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const TrialResult& r : results) {
        for (std::size_t j = 0; j < r.errors.size(); ++j) {
            const std::string area = format_g9(r.final_area(j));
            for (std::size_t l = 0; l < r.errors[j].size(); ++l) {
                out += std::to_string(r.trial) + ',' + std::to_string(j) + ',' +
                       std::to_string(l + 1) + ',' + format_g9(r.errors[j][l]) + ',' + area + ',' +
                       std::to_string(r.flags.at(j).at(l)) + '\n';
            }
        }
    }
    return out;
}

void export_results(const std::vector<TrialResult>& results, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << results_to_csv(results);
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

std::vector<TrialResult> results_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) {
        throw std::runtime_error("results: line 1: expected header '" + std::string(kResultsHeader) + "'");
    }
    struct Row {
        double error;
        double area;
        int flag;
    };
    std::map<int, std::map<std::size_t, std::map<std::size_t, Row>>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 6) {
            throw std::runtime_error("results: line " + std::to_string(line_no) + ": expected 6 fields");
        }
        try {
            const int trial = std::stoi(fields[0]);
            const auto agent = static_cast<std::size_t>(std::stoul(fields[1]));
            const auto iteration = static_cast<std::size_t>(std::stoul(fields[2]));
            if (iteration < 1) throw std::invalid_argument("iteration");
            rows[trial][agent][iteration] = {std::stod(fields[3]), std::stod(fields[4]),
                                             std::stoi(fields[5])};
        } catch (const std::logic_error&) {
            throw std::runtime_error("results: line " + std::to_string(line_no) + ": malformed value");
        }
    }
    std::vector<TrialResult> out;
    for (const auto& [trial, agents] : rows) {
        TrialResult r;
        r.trial = trial;
        std::size_t expect_agent = 0;
        for (const auto& [agent, iters] : agents) {
            if (agent != expect_agent++) {
                throw std::runtime_error("results: trial " + std::to_string(trial) + " skips agents");
            }
            std::vector<double> errors;
            std::vector<int> flags;
            double area = std::numeric_limits<double>::quiet_NaN();
            std::size_t expect_iter = 1;
            for (const auto& [iteration, row] : iters) {
                if (iteration != expect_iter++) {
                    throw std::runtime_error("results: trial " + std::to_string(trial) +
                                             " skips iterations");
                }
                errors.push_back(row.error);
                flags.push_back(row.flag);
                area = row.area;
            }
            r.errors.push_back(std::move(errors));
            r.flags.push_back(std::move(flags));
            r.poa_areas.push_back(std::isnan(area) ? std::vector<double>{} : std::vector<double>{area});
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TrialResult> import_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open results file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return results_from_csv(buf.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

// --- JSON documents -----------------------------------------------------

std::string config_to_json(const RunConfig& c) {
    json j = {{"width", c.width},
              {"height", c.height},
              {"n_agents", c.n_agents},
              {"n_anchors", c.n_anchors},
              {"comm_range", c.comm_range},
              {"lambda_inv", c.lambda_inv},
              {"n_edges", c.n_edges},
              {"poa_iterations", c.poa_iterations},
              {"n_samples", c.n_samples},
              {"nbp_iterations", c.nbp_iterations},
              {"proposal", to_string(c.proposal)},
              {"outage_threshold", c.outage_threshold},
              {"convergence_tol", c.convergence_tol},
              {"n_trials", c.n_trials},
              {"seed", c.seed},
              {"threads", c.threads}};
    return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text, RunConfig c) {
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "width") c.width = value.get<double>();
            else if (key == "height") c.height = value.get<double>();
            else if (key == "n_agents") c.n_agents = value.get<int>();
            else if (key == "n_anchors") c.n_anchors = value.get<int>();
            else if (key == "comm_range") c.comm_range = value.get<double>();
            else if (key == "lambda_inv") c.lambda_inv = value.get<double>();
            else if (key == "n_edges") c.n_edges = value.get<int>();
            else if (key == "poa_iterations") c.poa_iterations = value.get<int>();
            else if (key == "n_samples") c.n_samples = value.get<int>();
            else if (key == "nbp_iterations") c.nbp_iterations = value.get<int>();
            else if (key == "proposal") c.proposal = parse_proposal_kind(value.get<std::string>());
            else if (key == "outage_threshold") c.outage_threshold = value.get<double>();
            else if (key == "convergence_tol") c.convergence_tol = value.get<double>();
            else if (key == "n_trials") c.n_trials = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "threads") c.threads = value.get<int>();
            else throw std::invalid_argument("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config document: ") + e.what());
    }
    c.validate();
    return c;
}

std::string summary_to_json(const Summary& s, const RunConfig& config) {
    json outage = json::array();
    for (const auto& [th, p] : s.outage) outage.push_back({{"threshold_m", th}, {"probability", p}});
    json j = {{"config", json::parse(config_to_json(config))},
              {"mean_error_m", s.mean_error},
              {"convergence_iteration", s.convergence_iteration},
              {"converged_mean_error_m", s.converged_mean_error},
              {"outage_threshold_m", config.outage_threshold},
              {"outage_probability", s.outage_at_threshold},
              {"outage_curve", outage},
              {"mean_polygon_area_m2", s.mean_poa_area},
              {"negligible_weight_fraction", s.negligible_fraction},
              {"degenerate_beliefs", s.degenerate_count}};
    return j.dump(2) + "\n";
}

void export_summary(const Summary& summary, const RunConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << summary_to_json(summary, config);
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

std::string summary_path_for(const std::string& results_path) {
    const auto slash = results_path.find_last_of('/');
    const auto dot = results_path.find_last_of('.');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? results_path.substr(0, dot) : results_path) + ".summary.json";
}

std::string poa_dump_csv(const std::vector<PoaState>& rounds) {
    std::string out = "agent,iteration,area_m2,n_vertices,vertices\n";
    if (rounds.empty()) return out;
    const std::size_t n = rounds.front().polygons.size();
    for (std::size_t j = 0; j < n; ++j) {
        for (const PoaState& state : rounds) {
            const ConvexPolygon& p = state.polygons.at(j);
            std::string vertices;
            for (const Point2& v : p.vertices()) {
                if (!vertices.empty()) vertices += ';';
                vertices += format_g9(v.x) + ' ' + format_g9(v.y);
            }
            out += std::to_string(j) + ',' + std::to_string(state.iteration) + ',' +
                   format_g9(area(p)) + ',' + std::to_string(p.size()) + ',' + vertices + '\n';
        }
    }
    return out;
}

}  // namespace polyloc
