#include "polyloc/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace polyloc {

using nlohmann::json;

RangingModel::RangingModel(double mean_error) : lambda_inv(mean_error) {
    if (!(mean_error > 0.0) || !std::isfinite(mean_error)) {
        throw std::invalid_argument("mean ranging error must be positive and finite");
    }
}

const Point2& Scenario::position(NodeId id) const {
    const auto& nodes = id.kind == NodeKind::Anchor ? anchors : agents;
    if (id.index < 0 || static_cast<std::size_t>(id.index) >= nodes.size()) {
        throw std::out_of_range("node index out of range");
    }
    return nodes[static_cast<std::size_t>(id.index)].position;
}

namespace {

bool same_nodes(const std::vector<Node>& a, const std::vector<Node>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].id != b[k].id || a[k].position != b[k].position) return false;
    }
    return true;
}

}  // namespace

bool operator==(const Scenario& a, const Scenario& b) {
    if (a.deployment.min != b.deployment.min || a.deployment.max != b.deployment.max) return false;
    if (!same_nodes(a.anchors, b.anchors) || !same_nodes(a.agents, b.agents)) return false;
    if (a.comm_range != b.comm_range || a.lambda_inv != b.lambda_inv || a.seed != b.seed) {
        return false;
    }
    if (a.measurements.size() != b.measurements.size()) return false;
    for (std::size_t k = 0; k < a.measurements.size(); ++k) {
        const auto& ma = a.measurements[k];
        const auto& mb = b.measurements[k];
        if (ma.from != mb.from || ma.to != mb.to || ma.z_hat != mb.z_hat) return false;
    }
    return true;
}

std::vector<Point2> anchor_lattice(int n_anchors, const Rect& deployment) {
    std::vector<Point2> out;
    if (n_anchors <= 0) {
        return out;
    }
    const int rows = std::max(1, static_cast<int>(std::lround(std::sqrt(n_anchors))));
    const int base = n_anchors / rows;
    int surplus = n_anchors % rows;
    std::vector<int> counts(static_cast<std::size_t>(rows), base);
    for (int start : {1, 0}) {
        for (int r = start; r < rows && surplus > 0; r += 2) {
            ++counts[static_cast<std::size_t>(r)];
            --surplus;
        }
    }
    out.reserve(static_cast<std::size_t>(n_anchors));
    for (int r = 0; r < rows; ++r) {
        const int count = counts[static_cast<std::size_t>(r)];
        const double y = deployment.min.y + (r + 0.5) / rows * deployment.height();
        for (int c = 0; c < count; ++c) {
            const double x = deployment.min.x + (c + 0.5) / count * deployment.width();
            out.push_back({x, y});
        }
    }
    return out;
}

double measure(const RangingModel& model, Point2 x_i, Point2 x_j, Rng& rng) {
    return distance(x_i, x_j) + rng.exponential(model.lambda_inv);
}

double likelihood(const RangingModel& model, double z_hat, Point2 x_i, Point2 x_j) {
    const double d = distance(x_i, x_j);
    if (z_hat < d) {
        return 0.0;
    }
    const double lambda = model.lambda();
    return lambda * std::exp(-lambda * (z_hat - d));
}

std::vector<RangeMeasurement> draw_measurements(const Scenario& scenario, Rng& rng) {
    const RangingModel model = scenario.ranging();
    std::vector<RangeMeasurement> out;
    for (const Node& receiver : scenario.agents) {
        auto visit = [&](const Node& sender) {
            if (sender.id == receiver.id) return;
            if (distance(sender.position, receiver.position) > scenario.comm_range) return;
            out.push_back({sender.id, receiver.id,
                           measure(model, sender.position, receiver.position, rng)});
        };
        for (const Node& a : scenario.anchors) visit(a);
        for (const Node& a : scenario.agents) visit(a);
    }
    return out;
}

Scenario generate_scenario(const RunConfig& config, Rng& rng) {
    config.validate();
    Scenario s;
    s.deployment = Rect{{0.0, 0.0}, {config.width, config.height}};
    s.comm_range = config.comm_range;
    s.lambda_inv = config.lambda_inv;
    s.seed = config.seed;
    const auto lattice = anchor_lattice(config.n_anchors, s.deployment);
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        s.anchors.push_back({anchor_id(static_cast<int>(k)), lattice[k]});
    }
    for (int k = 0; k < config.n_agents; ++k) {
        const double x = rng.uniform(0.0, config.width);
        const double y = rng.uniform(0.0, config.height);
        s.agents.push_back({agent_id(k), {x, y}});
    }
    s.measurements = draw_measurements(s, rng);
    return s;
}

std::vector<NeighborSet> neighbor_sets(const Scenario& scenario) {
    std::vector<NeighborSet> out(scenario.agents.size());
    for (std::size_t j = 0; j < scenario.agents.size(); ++j) {
        const Node& receiver = scenario.agents[j];
        for (const Node& a : scenario.anchors) {
            if (distance(a.position, receiver.position) <= scenario.comm_range) {
                out[j].anchors.push_back(a.id);
                out[j].all.push_back(a.id);
            }
        }
        for (const Node& a : scenario.agents) {
            if (a.id != receiver.id &&
                distance(a.position, receiver.position) <= scenario.comm_range) {
                out[j].all.push_back(a.id);
            }
        }
    }
    return out;
}

std::vector<std::vector<IncomingLink>> incoming_links(const Scenario& scenario) {
    std::vector<std::vector<IncomingLink>> out(scenario.agents.size());
    for (const RangeMeasurement& m : scenario.measurements) {
        if (m.to.kind != NodeKind::Agent) continue;
        out.at(static_cast<std::size_t>(m.to.index)).push_back({m.from, m.z_hat});
    }
    return out;
}

void validate_scenario(const Scenario& s) {
    if (!(s.deployment.min.x <= s.deployment.max.x && s.deployment.min.y <= s.deployment.max.y)) {
        throw std::invalid_argument("scenario deployment rectangle is inverted");
    }
    if (!(s.comm_range >= 0.0)) {
        throw std::invalid_argument("scenario comm_range must be non-negative");
    }
    static_cast<void>(RangingModel(s.lambda_inv));
    auto check_nodes = [&](const std::vector<Node>& nodes, NodeKind kind, const char* what) {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (nodes[k].id.kind != kind || nodes[k].id.index != static_cast<int>(k)) {
                throw std::invalid_argument(std::string(what) + " ids must be 0..n-1 in order");
            }
            if (!is_finite(nodes[k].position) || !s.deployment.contains(nodes[k].position)) {
                throw std::invalid_argument(std::string(what) + " " + std::to_string(k) +
                                            " lies outside the deployment");
            }
        }
    };
    check_nodes(s.anchors, NodeKind::Anchor, "anchor");
    check_nodes(s.agents, NodeKind::Agent, "agent");
    for (const RangeMeasurement& m : s.measurements) {
        auto known = [&](NodeId id) {
            const auto& nodes = id.kind == NodeKind::Anchor ? s.anchors : s.agents;
            return id.index >= 0 && static_cast<std::size_t>(id.index) < nodes.size();
        };
        if (!known(m.from) || !known(m.to)) {
            throw std::invalid_argument("measurement refers to an unknown node");
        }
        if (m.to.kind != NodeKind::Agent) {
            throw std::invalid_argument("measurement receiver must be an agent");
        }
        if (m.from == m.to) {
            throw std::invalid_argument("measurement endpoints must differ");
        }
        if (!(m.z_hat >= 0.0) || !std::isfinite(m.z_hat)) {
            throw std::invalid_argument("measurement z_hat must be finite and non-negative");
        }
    }
}

// --- JSON ---------------------------------------------------------------

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json node_id_json(NodeId id) {
    return {{"kind", id.kind == NodeKind::Anchor ? "anchor" : "agent"}, {"index", id.index}};
}

NodeId node_id_from(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "anchor" && kind != "agent") {
        throw std::invalid_argument("unknown node kind '" + kind + "'");
    }
    return {kind == "anchor" ? NodeKind::Anchor : NodeKind::Agent, j.at("index").get<int>()};
}

json nodes_json(const std::vector<Node>& nodes) {
    json out = json::array();
    for (const Node& n : nodes) {
        out.push_back({{"index", n.id.index}, {"position", point_json(n.position)}});
    }
    return out;
}

std::vector<Node> nodes_from(const json& j, NodeKind kind) {
    std::vector<Node> out;
    for (const json& e : j) {
        out.push_back({{kind, e.at("index").get<int>()}, point_from(e.at("position"))});
    }
    return out;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["deployment"] = {{"min", point_json(s.deployment.min)}, {"max", point_json(s.deployment.max)}};
    j["anchors"] = nodes_json(s.anchors);
    j["agents"] = nodes_json(s.agents);
    j["comm_range"] = s.comm_range;
    j["lambda_inv"] = s.lambda_inv;
    json ms = json::array();
    for (const RangeMeasurement& m : s.measurements) {
        ms.push_back({{"from", node_id_json(m.from)}, {"to", node_id_json(m.to)}, {"z_hat", m.z_hat}});
    }
    j["measurements"] = std::move(ms);
    j["seed"] = s.seed;
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    Scenario s;
    try {
        const json j = json::parse(text);
        s.deployment = {point_from(j.at("deployment").at("min")),
                        point_from(j.at("deployment").at("max"))};
        s.anchors = nodes_from(j.at("anchors"), NodeKind::Anchor);
        s.agents = nodes_from(j.at("agents"), NodeKind::Agent);
        s.comm_range = j.at("comm_range").get<double>();
        s.lambda_inv = j.at("lambda_inv").get<double>();
        for (const json& m : j.at("measurements")) {
            s.measurements.push_back(
                {node_id_from(m.at("from")), node_id_from(m.at("to")), m.at("z_hat").get<double>()});
        }
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed scenario document: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << scenario_to_json(scenario);
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return scenario_from_json(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace polyloc
