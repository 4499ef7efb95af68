#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "polyloc/config.hpp"
#include "polyloc/geometry.hpp"
#include "polyloc/rng.hpp"

namespace polyloc {

enum class NodeKind { Anchor, Agent };

// Anchors and agents are indexed separately, each from zero.
struct NodeId {
    NodeKind kind = NodeKind::Agent;
    int index = 0;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline NodeId anchor_id(int index) { return {NodeKind::Anchor, index}; }
inline NodeId agent_id(int index) { return {NodeKind::Agent, index}; }

struct Node {
    NodeId id;
    Point2 position;
};

// Range estimate of `to` as observed from `from`; z_hat = true distance + error.
struct RangeMeasurement {
    NodeId from;
    NodeId to;
    double z_hat = 0.0;
};

// One-sided exponential ranging error with mean lambda_inv.
struct RangingModel {
    double lambda_inv = 0.38;

    explicit RangingModel(double mean_error);
    double lambda() const { return 1.0 / lambda_inv; }
};

struct Scenario {
    Rect deployment;
    std::vector<Node> anchors;
    std::vector<Node> agents;
    double comm_range = 0.0;
    double lambda_inv = 0.38;
    std::vector<RangeMeasurement> measurements;
    std::uint64_t seed = 0;

    const Point2& position(NodeId id) const;
    RangingModel ranging() const { return RangingModel(lambda_inv); }

    friend bool operator==(const Scenario&, const Scenario&);
};

// Range link as seen by a receiving agent.
struct IncomingLink {
    NodeId from;
    double z_hat = 0.0;
};

// Neighbors of one agent: all nodes within comm_range, and the anchor subset.
struct NeighborSet {
    std::vector<NodeId> anchors;
    std::vector<NodeId> all;
};

// Deterministic anchor lattice: rows = round(sqrt(n)), counts spread as evenly
// as possible with surplus anchors in the odd rows first (13 -> 3,4,3,3), each
// node centered in its lattice cell.
std::vector<Point2> anchor_lattice(int n_anchors, const Rect& deployment);

double measure(const RangingModel& model, Point2 x_i, Point2 x_j, Rng& rng);

// p(z_hat | x_i, x_j): lambda * exp(-lambda * (z_hat - d)) for z_hat >= d, else 0.
double likelihood(const RangingModel& model, double z_hat, Point2 x_i, Point2 x_j);

// Draws one measurement per ordered pair (i -> j), j an agent, i != j any node
// with ||x_i - x_j|| <= comm_range. Ordered by receiving agent, then anchors
// before agents.
std::vector<RangeMeasurement> draw_measurements(const Scenario& scenario, Rng& rng);

Scenario generate_scenario(const RunConfig& config, Rng& rng);

// Indexed by agent index.
std::vector<NeighborSet> neighbor_sets(const Scenario& scenario);

// Measurements grouped by receiving agent, in scenario order.
std::vector<std::vector<IncomingLink>> incoming_links(const Scenario& scenario);

// Checks positions, node indices and measurement endpoints; throws
// std::invalid_argument on the first violation.
void validate_scenario(const Scenario& scenario);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace polyloc
