#pragma once

#include "gvm/graph.hpp"
#include "gvm/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gvm {

enum class TraderType : std::uint8_t { NoiseTrader, Contrarian };

/// Which global magnetization a contrarian sees during a sweep: the value
/// frozen at the start of the sweep (default) or the instantaneous value,
/// updated on every flip. Running keeps M pinned near zero.
enum class ContrarianField : std::uint8_t { Running, Frozen };

std::string to_string(ContrarianField mode);
ContrarianField contrarian_field_from_string(const std::string& name);

/// Strategy constants of the flip rule.
inline constexpr int kNoiseTraderStrategy = +1;
inline constexpr int kContrarianStrategy = -1;

constexpr int sign_of(long long x) { return (x > 0) - (x < 0); }

/// Flip probability 1/2 [1 - (1 - 2q) c s sgn], with c the strategy constant,
/// s the agent's spin and sgn the sign of the field it reacts to.
template <typename Scalar>
constexpr Scalar flip_probability(Scalar q, int strategy, int spin, int field_sign)
{
    return Scalar(0.5) * (Scalar(1) - (Scalar(1) - Scalar(2) * q) * Scalar(strategy * spin * field_sign));
}

/// Noise trader: follows the sign of its local field m.
inline double flip_prob_noise_trader(double q, int spin, int sign_m)
{
    return flip_probability(q, kNoiseTraderStrategy, spin, sign_m);
}

/// Contrarian: opposes the sign of the global magnetization M.
inline double flip_prob_contrarian(double q, int spin, int sign_M)
{
    return flip_probability(q, kContrarianStrategy, spin, sign_M);
}

struct SimConfig {
    std::size_t n = 10201;
    double mean_degree = 6.0;
    double q = 0.240;
    double f = 0.20;
    std::size_t transient_mcs = 1000;
    std::size_t measure_mcs = 100000;
    std::uint64_t seed = 1;
    ContrarianField contrarian_field = ContrarianField::Frozen;

    /// Throws InvalidParameter on out-of-range q or f, or n < 2.
    void validate() const;
};

/// Spins (+1/-1) and trader types for every agent, plus a running spin sum.
class MarketState {
public:
    MarketState(std::vector<std::int8_t> spins, std::vector<TraderType> types);

    /// round(f n) contrarians placed uniformly without replacement; spins
    /// independent +/-1 with probability 1/2. Uses the TraderTypes and
    /// InitialSpins streams of `seed`.
    static MarketState random(std::size_t n, double f, std::uint64_t seed);

    std::size_t size() const { return spins_.size(); }
    std::span<const std::int8_t> spins() const { return spins_; }
    std::span<const TraderType> types() const { return types_; }
    std::size_t n_alpha() const { return n_alpha_; }
    std::size_t n_lambda() const { return size() - n_alpha_; }
    long long spin_sum() const { return spin_sum_; }

    void flip(NodeId i)
    {
        spins_[i] = static_cast<std::int8_t>(-spins_[i]);
        spin_sum_ += 2 * spins_[i];
    }

private:
    std::vector<std::int8_t> spins_;
    std::vector<TraderType> types_;
    std::size_t n_alpha_ = 0;
    long long spin_sum_ = 0;
};

/// Sum of the neighbours' spins.
int local_field(const MarketState& state, const Network& net, NodeId i);

/// Mean spin over all agents.
double global_magnetization(const MarketState& state);

/// One Monte Carlo step: state.size() agents drawn uniformly with replacement,
/// each flipped with its type's flip probability.
void mcs_step(MarketState& state, const Network& net, double q, Engine& eng,
              ContrarianField mode = ContrarianField::Frozen);

struct NetworkStats {
    double realized_mean_degree = 0.0;
    std::size_t edge_count = 0;
};

struct SeriesBundle {
    Eigen::VectorXd magnetization; ///< M(t), one value per measured step
    SimConfig config;
    NetworkStats network_stats;
};

/// Builds the network, places traders, discards the transient and records M
/// after each measured step.
SeriesBundle run_simulation(const SimConfig& cfg);

/// Same, on a prebuilt network (must have cfg.n nodes).
SeriesBundle run_simulation(const SimConfig& cfg, const Network& net);

/// Critical noise of the contrarian-free model keyed by mean degree.
using QcTable = std::map<double, double>;

/// q_c(6) = 0.240, q_c(8) = 0.275, q_c(50) = 0.411.
QcTable default_qc_table();

std::optional<double> lookup_qc(const QcTable& table, double mean_degree);

} // namespace gvm
