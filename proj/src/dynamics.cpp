#include "gvm/dynamics.hpp"

#include "gvm/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace gvm {

std::string to_string(ContrarianField mode)
{
    return mode == ContrarianField::Running ? "running" : "frozen";
}

ContrarianField contrarian_field_from_string(const std::string& name)
{
    if (name == "running")
        return ContrarianField::Running;
    if (name == "frozen")
        return ContrarianField::Frozen;
    throw InvalidParameter("unknown contrarian field mode '" + name + "' (expected running|frozen)");
}

void SimConfig::validate() const
{
    if (n < 2)
        throw InvalidParameter("n must be at least 2");
    if (!(q >= 0.0 && q <= 1.0))
        throw InvalidParameter("q must lie in [0, 1]");
    if (!(f >= 0.0 && f <= 1.0))
        throw InvalidParameter("f must lie in [0, 1]");
}

MarketState::MarketState(std::vector<std::int8_t> spins, std::vector<TraderType> types)
    : spins_(std::move(spins)), types_(std::move(types))
{
    if (spins_.size() != types_.size())
        throw InvalidParameter("MarketState: spins and types differ in length");
    for (const auto s : spins_) {
        if (s != 1 && s != -1)
            throw InvalidParameter("MarketState: spins must be +1 or -1");
        spin_sum_ += s;
    }
    n_alpha_ = static_cast<std::size_t>(std::count(types_.begin(), types_.end(), TraderType::Contrarian));
}

MarketState MarketState::random(std::size_t n, double f, std::uint64_t seed)
{
    if (!(f >= 0.0 && f <= 1.0))
        throw InvalidParameter("MarketState::random: f must lie in [0, 1]");
    const auto n_alpha = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));

    // Partial Fisher-Yates: the first n_alpha entries of `order` are contrarians.
    auto type_eng = make_engine(seed, Stream::TraderTypes);
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    for (std::size_t i = 0; i < n_alpha; ++i) {
        const auto j = i + uniform_index(type_eng, n - i);
        std::swap(order[i], order[j]);
    }
    std::vector<TraderType> types(n, TraderType::NoiseTrader);
    for (std::size_t i = 0; i < n_alpha; ++i)
        types[order[i]] = TraderType::Contrarian;

    auto spin_eng = make_engine(seed, Stream::InitialSpins);
    std::vector<std::int8_t> spins(n);
    for (auto& s : spins)
        s = (spin_eng() >> 63) ? std::int8_t{1} : std::int8_t{-1};

    return MarketState(std::move(spins), std::move(types));
}

int local_field(const MarketState& state, const Network& net, NodeId i)
{
    int m = 0;
    const auto spins = state.spins();
    for (const auto j : net.neighbors(i))
        m += spins[j];
    return m;
}

double global_magnetization(const MarketState& state)
{
    return static_cast<double>(state.spin_sum()) / static_cast<double>(state.size());
}

void mcs_step(MarketState& state, const Network& net, double q, Engine& eng, ContrarianField mode)
{
    const std::size_t n = state.size();
    if (net.size() != n)
        throw InvalidParameter("mcs_step: network and state sizes differ");

    // Indexed by spin * field_sign + 1.
    const std::array<std::uint64_t, 3> noise_threshold = {coin_threshold(flip_prob_noise_trader(q, 1, -1)),
                                                          coin_threshold(flip_prob_noise_trader(q, 1, 0)),
                                                          coin_threshold(flip_prob_noise_trader(q, 1, 1))};
    const std::array<std::uint64_t, 3> contrarian_threshold = {coin_threshold(flip_prob_contrarian(q, 1, -1)),
                                                               coin_threshold(flip_prob_contrarian(q, 1, 0)),
                                                               coin_threshold(flip_prob_contrarian(q, 1, 1))};

    const auto spins = state.spins();
    const auto types = state.types();
    const int frozen_sign = sign_of(state.spin_sum());
    const auto n32 = static_cast<std::uint32_t>(n);

    for (std::size_t step = 0; step < n; ++step) {
        const auto [i, coin] = draw_index_and_coin(eng, n32);
        const int spin = spins[i];
        std::uint64_t threshold;
        if (types[i] == TraderType::NoiseTrader) {
            threshold = noise_threshold[spin * sign_of(local_field(state, net, i)) + 1];
        } else {
            const int sign_M = mode == ContrarianField::Running ? sign_of(state.spin_sum()) : frozen_sign;
            threshold = contrarian_threshold[spin * sign_M + 1];
        }
        if (coin < threshold)
            state.flip(i);
    }
}

SeriesBundle run_simulation(const SimConfig& cfg)
{
    cfg.validate();
    const auto net = generate_er(cfg.n, cfg.mean_degree, cfg.seed);
    return run_simulation(cfg, net);
}

SeriesBundle run_simulation(const SimConfig& cfg, const Network& net)
{
    cfg.validate();
    if (net.size() != cfg.n)
        throw InvalidParameter("run_simulation: network size does not match config");

    auto state = MarketState::random(cfg.n, cfg.f, cfg.seed);
    auto eng = make_engine(cfg.seed, Stream::Dynamics);

    for (std::size_t t = 0; t < cfg.transient_mcs; ++t)
        mcs_step(state, net, cfg.q, eng, cfg.contrarian_field);

    SeriesBundle bundle;
    bundle.config = cfg;
    bundle.network_stats = {net.realized_mean_degree(), net.edge_count()};
    bundle.magnetization.resize(static_cast<Eigen::Index>(cfg.measure_mcs));
    for (std::size_t t = 0; t < cfg.measure_mcs; ++t) {
        mcs_step(state, net, cfg.q, eng, cfg.contrarian_field);
        bundle.magnetization[static_cast<Eigen::Index>(t)] = global_magnetization(state);
    }
    return bundle;
}

QcTable default_qc_table()
{
    return {{6.0, 0.240}, {8.0, 0.275}, {50.0, 0.411}};
}

std::optional<double> lookup_qc(const QcTable& table, double mean_degree)
{
    const auto it = table.find(mean_degree);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

} // namespace gvm
