#include "polyloc/poa.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace polyloc {

namespace {

ConvexPolygon anchor_polygon(Point2 anchor, double z_hat, int n_edges, double angle) {
    return circumscribed_disk_polygon(anchor, std::max(z_hat, kAbsoluteTolerance), n_edges, angle);
}

}  // namespace

PoaState poa_first_iteration(const Scenario& scenario, int n_edges, Rng& rng) {
    if (n_edges < 3) {
        throw std::invalid_argument("POA needs n_edges >= 3");
    }
    const auto links = incoming_links(scenario);
    const ConvexPolygon prior = ConvexPolygon::from_rect(scenario.deployment);
    const std::size_t n = scenario.agents.size();

    PoaState state;
    state.iteration = 1;
    state.n_edges = n_edges;
    state.polygons.reserve(n);
    state.anchor_angles.resize(n);
    state.fallback.assign(n, false);
    state.area_history.resize(n);

    for (std::size_t j = 0; j < n; ++j) {
        std::vector<ConvexPolygon> parts{prior};
        for (const IncomingLink& link : links[j]) {
            if (link.from.kind != NodeKind::Anchor) continue;
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            state.anchor_angles[j].push_back(angle);
            parts.push_back(anchor_polygon(scenario.position(link.from), link.z_hat, n_edges, angle));
        }
        auto polygon = intersect_all(parts);
        if (!polygon) {
            state.fallback[j] = true;
            polygon = prior;
        }
        state.area_history[j].push_back(area(*polygon));
        state.polygons.push_back(std::move(*polygon));
    }
    return state;
}

ConvexPolygon poa_update_agent(const PoaState& state, const Scenario& scenario,
                               const std::vector<IncomingLink>& links, int agent, bool& empty) {
    const auto j = static_cast<std::size_t>(agent);
    const ConvexPolygon& own = state.polygons.at(j);
    std::vector<ConvexPolygon> parts{own};
    std::size_t anchor_k = 0;
    for (const IncomingLink& link : links) {
        if (link.from.kind == NodeKind::Anchor) {
            const double angle = state.anchor_angles.at(j).at(anchor_k++);
            parts.push_back(
                anchor_polygon(scenario.position(link.from), link.z_hat, state.n_edges, angle));
        } else {
            const auto i = static_cast<std::size_t>(link.from.index);
            parts.push_back(offset_outward(state.polygons.at(i), link.z_hat));
        }
    }
    auto next = intersect_all(parts);
    empty = !next.has_value();
    return next ? std::move(*next) : own;
}

PoaState poa_iterate(const PoaState& state, const Scenario& scenario) {
    if (state.iteration < 1) {
        throw std::invalid_argument("poa_iterate needs a state from round >= 1");
    }
    const auto links = incoming_links(scenario);
    PoaState next = state;
    next.iteration = state.iteration + 1;
    next.polygons.clear();
    next.polygons.reserve(state.polygons.size());
    for (std::size_t j = 0; j < state.polygons.size(); ++j) {
        bool empty = false;
        next.polygons.push_back(
            poa_update_agent(state, scenario, links[j], static_cast<int>(j), empty));
        if (empty) {
            next.fallback[j] = true;
        }
        next.area_history[j].push_back(area(next.polygons.back()));
    }
    return next;
}

PoaState run_poa(const Scenario& scenario, int n_edges, int n_iterations, Rng& rng) {
    if (n_iterations < 1) {
        throw std::invalid_argument("POA needs at least one iteration");
    }
    PoaState state = poa_first_iteration(scenario, n_edges, rng);
    for (int l = 1; l < n_iterations; ++l) {
        state = poa_iterate(state, scenario);
    }
    return state;
}

Scenario discard_violating_measurements(const Scenario& scenario) {
    Scenario out = scenario;
    std::erase_if(out.measurements, [&](const RangeMeasurement& m) {
        return m.z_hat < distance(scenario.position(m.from), scenario.position(m.to));
    });
    return out;
}

}  // namespace polyloc
