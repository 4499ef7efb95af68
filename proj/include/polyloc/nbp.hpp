#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polyloc/config.hpp"
#include "polyloc/geometry.hpp"
#include "polyloc/model.hpp"
#include "polyloc/poa.hpp"
#include "polyloc/rng.hpp"

namespace polyloc {

struct Particle {
    Point2 position;
    double weight = 0.0;
};

struct ParticleSet {
    std::vector<Particle> particles;

    std::size_t size() const { return particles.size(); }
    double total_weight() const;
    // Rescales weights to sum to one; false when the total is not positive.
    bool normalize();
    // Weighted centroid, i.e. the MMSE estimate of a normalized set.
    Point2 mean() const;
    // Trace of the weighted sample covariance.
    double spread() const;

    static ParticleSet equally_weighted(std::span<const Point2> points);
};

// Symmetric 2x2 matrix [xx xy; xy yy].
struct SymMatrix2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    bool is_positive_definite() const { return xx > 0.0 && det() > 0.0; }
};

inline constexpr double kMinBandwidth = 1e-6;  // m

// Diagonal rule-of-thumb bandwidth h = sigma * n^(-1/6) per axis, floored at
// kMinBandwidth. Returned as the kernel covariance diag(h_x^2, h_y^2).
SymMatrix2 estimate_bandwidth(const ParticleSet& samples);

// Weighted mixture of Gaussian kernels sharing one covariance.
class KernelDensity {
public:
    KernelDensity(std::vector<Point2> centers, std::vector<double> weights, SymMatrix2 bandwidth);
    // Normalized weights, bandwidth from estimate_bandwidth().
    static KernelDensity from_particles(const ParticleSet& set);

    double operator()(Point2 x) const;
    // One draw: pick a center by weight, add kernel noise.
    Point2 sample(Rng& rng) const;

    const std::vector<Point2>& centers() const { return centers_; }
    const std::vector<double>& weights() const { return weights_; }
    const SymMatrix2& bandwidth() const { return bandwidth_; }
    // Squared Mahalanobis distance under the kernel covariance.
    double mahalanobis2(Point2 d) const;

private:
    std::vector<Point2> centers_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    SymMatrix2 bandwidth_;
    SymMatrix2 inverse_;
    double peak_ = 0.0;  // 1 / (2 pi sqrt(det))
    double chol_xx_ = 0.0, chol_yx_ = 0.0, chol_yy_ = 0.0;
};

double kde_eval(const KernelDensity& kd, Point2 x);

class Proposal {
public:
    // q(x) = 1 / area inside the polygon, 0 outside.
    static Proposal polygon_uniform(ConvexPolygon polygon);
    // Samples from the KDE of the incoming message with the smallest spread.
    static Proposal lowest_spread_message();

    ProposalKind kind() const { return kind_; }
    const std::optional<ConvexPolygon>& polygon() const { return polygon_; }
    double polygon_density(Point2 x) const;

private:
    ProposalKind kind_ = ProposalKind::LowestSpreadMessage;
    std::optional<ConvexPolygon> polygon_;
    double inv_area_ = 0.0;
};

// Particles with normalized weight below this fraction of 1/N_s are counted as
// not contributing to the estimate.
inline constexpr double kNegligibleWeightFraction = 1e-3;

struct ProductResult {
    ParticleSet belief;
    bool degenerate = false;         // weights underflowed; uniform weights returned
    std::size_t negligible = 0;      // particles with negligible normalized weight
    std::size_t chosen_message = 0;  // for the lowest-spread proposal
};

// Filters a message through the ranging factor: N_s equally weighted draws
// x_i + d (cos t, sin t) with d = z_hat - e, e ~ Exp(lambda) truncated to [0, z_hat].
ParticleSet filter_message(Point2 anchor, double z_hat, const RangingModel& model, std::size_t n_s,
                           Rng& rng);
// Same, with x_i resampled by weight from the sender's belief.
ParticleSet filter_message(const ParticleSet& sender_belief, double z_hat,
                           const RangingModel& model, std::size_t n_s, Rng& rng);

// Importance-sampled product of the incoming messages' KDEs. Weights are
// prior(x) * prod_i kde_i(x) / q(x); `prior_support`, when given, is the
// support of a uniform prior.
ProductResult multiply_messages(std::span<const ParticleSet> incoming, const Proposal& proposal,
                                std::size_t n_s, Rng& rng,
                                const std::optional<Rect>& prior_support = std::nullopt);

struct BeliefState {
    int iteration = 0;
    std::vector<ParticleSet> beliefs;  // per agent
    std::vector<Point2> estimates;     // weighted centroid of each belief
    std::vector<bool> degenerate;
    std::vector<std::size_t> negligible;
};

struct NbpConfig {
    ProposalKind proposal = ProposalKind::PolygonUniform;
    std::size_t n_samples = 250;
    int iterations = 5;
    std::uint64_t seed = 0;
};

// Proposal of every agent for a run. Polygon proposals need the POA result.
std::vector<Proposal> make_proposals(const Scenario& scenario, const PoaState* poa,
                                     ProposalKind kind);

// Iteration-0 beliefs: uniform samples over each agent's polygon, or over the
// deployment for the baseline.
BeliefState initial_beliefs(const Scenario& scenario, std::span<const Proposal> proposals,
                            const NbpConfig& config);

// One synchronous round. Agent j's random stream is derived from
// (config.seed, next iteration, j), so agents may be processed in any order.
BeliefState nbp_iteration(const BeliefState& state, const Scenario& scenario,
                          std::span<const Proposal> proposals, const NbpConfig& config);

// Returns states 0..config.iterations. Throws std::invalid_argument when a
// polygon proposal is requested without a POA state.
std::vector<BeliefState> run_nbp(const Scenario& scenario, const PoaState* poa,
                                 const NbpConfig& config);

}  // namespace polyloc
