#pragma once

#include <cstddef>
#include <vector>

#include "polyloc/geometry.hpp"
#include "polyloc/model.hpp"
#include "polyloc/rng.hpp"

namespace polyloc {

// Polygon outer-approximation state after `iteration` synchronous rounds.
// All per-agent vectors are indexed by agent index. Anchors carry no polygon.
struct PoaState {
    int iteration = 0;
    int n_edges = 0;
    std::vector<ConvexPolygon> polygons;
    // Random angular offset of every anchor polygon, aligned with the anchor
    // entries of incoming_links(scenario)[agent].
    std::vector<std::vector<double>> anchor_angles;
    // Set once an agent had an empty intersection and fell back.
    std::vector<bool> fallback;
    // area_history[agent][l - 1] = area of the agent's polygon after round l.
    std::vector<std::vector<double>> area_history;
};

// Round 1: every agent intersects the deployment rectangle (support of its
// uniform prior) with the disk polygons of the anchors it ranges to.
PoaState poa_first_iteration(const Scenario& scenario, int n_edges, Rng& rng);

// Next polygon of one agent, reading only the round-l state:
// own polygon  ∩  anchor disk polygons  ∩  neighbor polygons offset by z_hat.
// Returns the previous polygon and sets `empty` when the intersection vanishes.
ConvexPolygon poa_update_agent(const PoaState& state, const Scenario& scenario,
                               const std::vector<IncomingLink>& links, int agent, bool& empty);

// One synchronous round for all agents.
PoaState poa_iterate(const PoaState& state, const Scenario& scenario);

// First round followed by n_iterations - 1 synchronous rounds.
PoaState run_poa(const Scenario& scenario, int n_edges, int n_iterations, Rng& rng);

// Removes measurements whose estimate undercuts the true distance. Needs
// ground truth, so it is a simulation-only hook.
Scenario discard_violating_measurements(const Scenario& scenario);

}  // namespace polyloc
