#include "polyloc/nbp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polyloc {

double ParticleSet::total_weight() const {
    double total = 0.0;
    for (const Particle& p : particles) total += p.weight;
    return total;
}

bool ParticleSet::normalize() {
    const double total = total_weight();
    if (!(total > 0.0) || !std::isfinite(total)) {
        return false;
    }
    for (Particle& p : particles) p.weight /= total;
    return true;
}

Point2 ParticleSet::mean() const {
    Point2 acc;
    double total = 0.0;
    for (const Particle& p : particles) {
        acc = acc + p.weight * p.position;
        total += p.weight;
    }
    return total > 0.0 ? (1.0 / total) * acc : acc;
}

double ParticleSet::spread() const {
    const Point2 mu = mean();
    double acc = 0.0;
    double total = 0.0;
    for (const Particle& p : particles) {
        const Point2 d = p.position - mu;
        acc += p.weight * dot(d, d);
        total += p.weight;
    }
    return total > 0.0 ? acc / total : 0.0;
}

ParticleSet ParticleSet::equally_weighted(std::span<const Point2> points) {
    ParticleSet out;
    out.particles.reserve(points.size());
    const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
    for (const Point2& p : points) out.particles.push_back({p, w});
    return out;
}

SymMatrix2 estimate_bandwidth(const ParticleSet& samples) {
    if (samples.size() == 0) {
        throw std::invalid_argument("bandwidth of an empty particle set");
    }
    double total = samples.total_weight();
    const bool weighted = total > 0.0 && std::isfinite(total);
    if (!weighted) total = static_cast<double>(samples.size());
    Point2 mu;
    for (const Particle& p : samples.particles) {
        mu = mu + ((weighted ? p.weight : 1.0) / total) * p.position;
    }
    double var_x = 0.0;
    double var_y = 0.0;
    for (const Particle& p : samples.particles) {
        const double w = (weighted ? p.weight : 1.0) / total;
        var_x += w * (p.position.x - mu.x) * (p.position.x - mu.x);
        var_y += w * (p.position.y - mu.y) * (p.position.y - mu.y);
    }
    const double factor = std::pow(static_cast<double>(samples.size()), -1.0 / 6.0);
    const double h_x = std::max(std::sqrt(var_x) * factor, kMinBandwidth);
    const double h_y = std::max(std::sqrt(var_y) * factor, kMinBandwidth);
    return {h_x * h_x, 0.0, h_y * h_y};
}

KernelDensity::KernelDensity(std::vector<Point2> centers, std::vector<double> weights,
                             SymMatrix2 bandwidth)
    : centers_(std::move(centers)), weights_(std::move(weights)), bandwidth_(bandwidth) {
    if (centers_.empty() || centers_.size() != weights_.size()) {
        throw std::invalid_argument("kernel density needs matching non-empty centers and weights");
    }
    if (!bandwidth_.is_positive_definite()) {
        throw std::invalid_argument("kernel bandwidth must be positive definite");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("kernel weights must be finite and non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("kernel weights must not all be zero");
    }
    cumulative_.reserve(weights_.size());
    double running = 0.0;
    for (double& w : weights_) {
        w /= total;
        running += w;
        cumulative_.push_back(running);
    }
    const double det = bandwidth_.det();
    inverse_ = {bandwidth_.yy / det, -bandwidth_.xy / det, bandwidth_.xx / det};
    peak_ = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    chol_xx_ = std::sqrt(bandwidth_.xx);
    chol_yx_ = bandwidth_.xy / chol_xx_;
    chol_yy_ = std::sqrt(bandwidth_.yy - chol_yx_ * chol_yx_);
}

KernelDensity KernelDensity::from_particles(const ParticleSet& set) {
    std::vector<Point2> centers;
    std::vector<double> weights;
    centers.reserve(set.size());
    weights.reserve(set.size());
    for (const Particle& p : set.particles) {
        centers.push_back(p.position);
        weights.push_back(p.weight);
    }
    return KernelDensity(std::move(centers), std::move(weights), estimate_bandwidth(set));
}

double KernelDensity::mahalanobis2(Point2 d) const {
    return inverse_.xx * d.x * d.x + 2.0 * inverse_.xy * d.x * d.y + inverse_.yy * d.y * d.y;
}

double KernelDensity::operator()(Point2 x) const {
    // exp(-0.5 q) underflows to zero beyond this.
    constexpr double kCutoff = 1500.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        const double q = mahalanobis2(x - centers_[k]);
        if (q < kCutoff) {
            acc += weights_[k] * std::exp(-0.5 * q);
        }
    }
    return peak_ * acc;
}

Point2 KernelDensity::sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                         centers_.size() - 1);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const Point2& c = centers_[k];
    return {c.x + chol_xx_ * z1, c.y + chol_yx_ * z1 + chol_yy_ * z2};
}

double kde_eval(const KernelDensity& kd, Point2 x) { return kd(x); }

Proposal Proposal::polygon_uniform(ConvexPolygon polygon) {
    Proposal p;
    p.kind_ = ProposalKind::PolygonUniform;
    p.inv_area_ = 1.0 / area(polygon);
    p.polygon_ = std::move(polygon);
    return p;
}

Proposal Proposal::lowest_spread_message() { return Proposal{}; }

double Proposal::polygon_density(Point2 x) const {
    if (!polygon_) {
        throw std::logic_error("proposal has no polygon");
    }
    return contains(*polygon_, x) ? inv_area_ : 0.0;
}

namespace {

// n indices drawn i.i.d. by weight, in ascending order. Sorted uniforms come
// from normalized exponential spacings, so the whole draw is O(n + m).
std::vector<std::size_t> multinomial_indices(const ParticleSet& set, std::size_t n, Rng& rng) {
    std::vector<double> spacings(n + 1);
    double sum = 0.0;
    for (double& e : spacings) {
        e = rng.exponential(1.0);
        sum += e;
    }
    const double total = set.total_weight();
    std::vector<std::size_t> out;
    out.reserve(n);
    double u = 0.0;
    double cumulative = 0.0;
    std::size_t k = 0;
    const std::size_t last = set.size() - 1;
    for (std::size_t draw = 0; draw < n; ++draw) {
        u += spacings[draw] / sum * total;
        while (k < last && cumulative + set.particles[k].weight < u) {
            cumulative += set.particles[k].weight;
            ++k;
        }
        out.push_back(k);
    }
    return out;
}

Point2 ranged_point(Point2 origin, double z_hat, const RangingModel& model, Rng& rng) {
    // Inverse CDF of Exp(lambda) truncated to [0, z_hat].
    const double lambda = model.lambda();
    const double mass = -std::expm1(-lambda * z_hat);
    const double error = std::min(-std::log1p(-rng.uniform() * mass) / lambda, z_hat);
    const double d = z_hat - error;
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {origin.x + d * std::cos(theta), origin.y + d * std::sin(theta)};
}

}  // namespace

ParticleSet filter_message(Point2 anchor, double z_hat, const RangingModel& model,
                           std::size_t n_s, Rng& rng) {
    if (n_s == 0) throw std::invalid_argument("filter_message needs n_s >= 1");
    ParticleSet out;
    out.particles.reserve(n_s);
    const double w = 1.0 / static_cast<double>(n_s);
    for (std::size_t k = 0; k < n_s; ++k) {
        out.particles.push_back({ranged_point(anchor, z_hat, model, rng), w});
    }
    return out;
}

ParticleSet filter_message(const ParticleSet& sender_belief, double z_hat,
                           const RangingModel& model, std::size_t n_s, Rng& rng) {
    if (n_s == 0) throw std::invalid_argument("filter_message needs n_s >= 1");
    if (sender_belief.size() == 0 || !(sender_belief.total_weight() > 0.0)) {
        throw std::invalid_argument("filter_message needs a sender belief with positive mass");
    }
    const auto picks = multinomial_indices(sender_belief, n_s, rng);
    ParticleSet out;
    out.particles.reserve(n_s);
    const double w = 1.0 / static_cast<double>(n_s);
    for (std::size_t k : picks) {
        out.particles.push_back(
            {ranged_point(sender_belief.particles[k].position, z_hat, model, rng), w});
    }
    return out;
}

ProductResult multiply_messages(std::span<const ParticleSet> incoming, const Proposal& proposal,
                                std::size_t n_s, Rng& rng,
                                const std::optional<Rect>& prior_support) {
    if (incoming.empty()) throw std::invalid_argument("multiply_messages needs a message");
    if (n_s == 0) throw std::invalid_argument("multiply_messages needs n_s >= 1");

    std::vector<KernelDensity> kdes;
    kdes.reserve(incoming.size());
    for (const ParticleSet& m : incoming) kdes.push_back(KernelDensity::from_particles(m));

    ProductResult result;
    std::vector<Point2> points;
    std::vector<double> q;
    if (proposal.kind() == ProposalKind::PolygonUniform) {
        points = sample_uniform(*proposal.polygon(), n_s, rng);
        q.reserve(n_s);
        for (const Point2& x : points) q.push_back(proposal.polygon_density(x));
    } else {
        std::size_t best = 0;
        double best_spread = incoming[0].spread();
        for (std::size_t i = 1; i < incoming.size(); ++i) {
            const double s = incoming[i].spread();
            if (s < best_spread) {
                best = i;
                best_spread = s;
            }
        }
        result.chosen_message = best;
        points.reserve(n_s);
        q.reserve(n_s);
        for (std::size_t k = 0; k < n_s; ++k) {
            points.push_back(kdes[best].sample(rng));
            q.push_back(kdes[best](points.back()));
        }
    }

    auto& particles = result.belief.particles;
    particles.reserve(n_s);
    for (std::size_t k = 0; k < n_s; ++k) {
        const Point2 x = points[k];
        double w = 0.0;
        if (q[k] > 0.0 && (!prior_support || prior_support->contains(x))) {
            w = 1.0 / q[k];
            for (const KernelDensity& kd : kdes) {
                w *= kd(x);
                if (w == 0.0) break;
            }
        }
        particles.push_back({x, w});
    }

    if (!result.belief.normalize()) {
        result.degenerate = true;
        const double uniform = 1.0 / static_cast<double>(n_s);
        for (Particle& p : particles) p.weight = uniform;
    }
    const double negligible = kNegligibleWeightFraction / static_cast<double>(n_s);
    for (const Particle& p : particles) {
        if (p.weight < negligible) ++result.negligible;
    }
    return result;
}

std::vector<Proposal> make_proposals(const Scenario& scenario, const PoaState* poa,
                                     ProposalKind kind) {
    std::vector<Proposal> out;
    out.reserve(scenario.agents.size());
    if (kind == ProposalKind::PolygonUniform) {
        if (poa == nullptr) {
            throw std::invalid_argument("polygon proposal requires a POA state");
        }
        if (poa->polygons.size() != scenario.agents.size()) {
            throw std::invalid_argument("POA state does not match the scenario");
        }
        for (const ConvexPolygon& p : poa->polygons) out.push_back(Proposal::polygon_uniform(p));
    } else {
        out.assign(scenario.agents.size(), Proposal::lowest_spread_message());
    }
    return out;
}

namespace {

// Belief of an agent with no incoming messages: draws from its own proposal
// region (polygon) or the prior support.
ParticleSet unconstrained_belief(const Scenario& scenario, const Proposal& proposal,
                                 std::size_t n_s, Rng& rng) {
    const ConvexPolygon region = proposal.kind() == ProposalKind::PolygonUniform
                                     ? *proposal.polygon()
                                     : ConvexPolygon::from_rect(scenario.deployment);
    const auto points = sample_uniform(region, n_s, rng);
    return ParticleSet::equally_weighted(points);
}

void check_proposals(const Scenario& scenario, std::span<const Proposal> proposals) {
    if (proposals.size() != scenario.agents.size()) {
        throw std::invalid_argument("need exactly one proposal per agent");
    }
}

}  // namespace

BeliefState initial_beliefs(const Scenario& scenario, std::span<const Proposal> proposals,
                            const NbpConfig& config) {
    check_proposals(scenario, proposals);
    const std::size_t n = scenario.agents.size();
    BeliefState state;
    state.iteration = 0;
    state.degenerate.assign(n, false);
    state.negligible.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        Rng rng(derive_seed(config.seed, 0, j));
        state.beliefs.push_back(unconstrained_belief(scenario, proposals[j], config.n_samples, rng));
        state.estimates.push_back(state.beliefs.back().mean());
    }
    return state;
}

BeliefState nbp_iteration(const BeliefState& state, const Scenario& scenario,
                          std::span<const Proposal> proposals, const NbpConfig& config) {
    check_proposals(scenario, proposals);
    const auto links = incoming_links(scenario);
    const RangingModel model = scenario.ranging();
    const std::size_t n = scenario.agents.size();
    const int iteration = state.iteration + 1;

    BeliefState next;
    next.iteration = iteration;
    next.beliefs.resize(n);
    next.estimates.resize(n);
    next.degenerate.assign(n, false);
    next.negligible.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(iteration), j));
        if (links[j].empty()) {
            next.beliefs[j] = unconstrained_belief(scenario, proposals[j], config.n_samples, rng);
        } else {
            std::vector<ParticleSet> messages;
            messages.reserve(links[j].size());
            for (const IncomingLink& link : links[j]) {
                if (link.from.kind == NodeKind::Anchor) {
                    messages.push_back(filter_message(scenario.position(link.from), link.z_hat,
                                                      model, config.n_samples, rng));
                } else {
                    const auto& sender = state.beliefs.at(static_cast<std::size_t>(link.from.index));
                    messages.push_back(
                        filter_message(sender, link.z_hat, model, config.n_samples, rng));
                }
            }
            ProductResult product = multiply_messages(messages, proposals[j], config.n_samples, rng,
                                                      scenario.deployment);
            next.beliefs[j] = std::move(product.belief);
            next.degenerate[j] = product.degenerate;
            next.negligible[j] = product.negligible;
        }
        next.estimates[j] = next.beliefs[j].mean();
    }
    return next;
}

std::vector<BeliefState> run_nbp(const Scenario& scenario, const PoaState* poa,
                                 const NbpConfig& config) {
    if (config.n_samples == 0 || config.iterations < 1) {
        throw std::invalid_argument("NBP needs n_samples >= 1 and iterations >= 1");
    }
    const auto proposals = make_proposals(scenario, poa, config.proposal);
    std::vector<BeliefState> states;
    states.reserve(static_cast<std::size_t>(config.iterations) + 1);
    states.push_back(initial_beliefs(scenario, proposals, config));
    for (int l = 0; l < config.iterations; ++l) {
        states.push_back(nbp_iteration(states.back(), scenario, proposals, config));
    }
    return states;
}

}  // namespace polyloc
