#pragma once

#include <cstdint>
#include <string>

namespace polyloc {

enum class ProposalKind { PolygonUniform, LowestSpreadMessage };

std::string to_string(ProposalKind kind);
// Accepts "polygon" and "baseline"; throws std::invalid_argument otherwise.
ProposalKind parse_proposal_kind(const std::string& name);

// Every tunable of a simulation run. Defaults are the desk-scale setup.
struct RunConfig {
    double width = 30.0;   // m
    double height = 30.0;  // m
    int n_agents = 20;
    int n_anchors = 5;
    double comm_range = 10.0;  // m
    double lambda_inv = 0.38;  // mean ranging error, m
    int n_edges = 16;
    int poa_iterations = 2;
    int n_samples = 250;
    int nbp_iterations = 5;
    ProposalKind proposal = ProposalKind::PolygonUniform;
    double outage_threshold = 1.0;  // m
    double convergence_tol = 0.01;
    int n_trials = 10;
    std::uint64_t seed = 1;
    int threads = 1;

    // Throws std::invalid_argument naming the first offending field.
    void validate() const;
};

}  // namespace polyloc
