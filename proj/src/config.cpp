#include "polyloc/config.hpp"

#include <cmath>
#include <stdexcept>

namespace polyloc {

std::string to_string(ProposalKind kind) {
    return kind == ProposalKind::PolygonUniform ? "polygon" : "baseline";
}

ProposalKind parse_proposal_kind(const std::string& name) {
    if (name == "polygon") return ProposalKind::PolygonUniform;
    if (name == "baseline") return ProposalKind::LowestSpreadMessage;
    throw std::invalid_argument("unknown proposal '" + name + "' (expected polygon or baseline)");
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
    };
    require(width > 0.0 && std::isfinite(width), "width must be positive");
    require(height > 0.0 && std::isfinite(height), "height must be positive");
    require(n_agents >= 1, "n_agents must be >= 1");
    require(n_anchors >= 0, "n_anchors must be >= 0");
    require(comm_range >= 0.0 && std::isfinite(comm_range), "comm_range must be >= 0");
    require(lambda_inv > 0.0 && std::isfinite(lambda_inv), "lambda_inv must be positive");
    require(n_edges >= 3, "n_edges must be >= 3");
    require(poa_iterations >= 1, "poa_iterations must be >= 1");
    require(n_samples >= 1, "n_samples must be >= 1");
    require(nbp_iterations >= 1, "nbp_iterations must be >= 1");
    require(outage_threshold >= 0.0, "outage_threshold must be >= 0");
    require(convergence_tol > 0.0, "convergence_tol must be positive");
    require(n_trials >= 1, "n_trials must be >= 1");
    require(threads >= 1, "threads must be >= 1");
}

}  // namespace polyloc
