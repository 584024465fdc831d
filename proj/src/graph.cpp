#include "gvm/graph.hpp"

#include "gvm/errors.hpp"
#include "gvm/rng.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>

namespace gvm {

namespace {

std::uint64_t edge_key(NodeId a, NodeId b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

Edge key_edge(std::uint64_t key)
{
    return {static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffULL)};
}

// Rejection-samples `count` distinct loop-free pairs. Returned in draw order.
std::vector<std::uint64_t> sample_pairs(std::size_t n, std::size_t count, Engine& eng)
{
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(count * 2);
    std::vector<std::uint64_t> drawn;
    drawn.reserve(count);
    while (drawn.size() < count) {
        const auto a = static_cast<NodeId>(uniform_index(eng, n));
        const auto b = static_cast<NodeId>(uniform_index(eng, n));
        if (a == b)
            continue;
        const auto key = edge_key(a, b);
        if (seen.insert(key).second)
            drawn.push_back(key);
    }
    return drawn;
}

} // namespace

Network::Network(std::size_t n, std::vector<Edge> edges, double mean_degree_target)
    : edges_(std::move(edges)), offsets_(n + 1, 0), mean_degree_target_(mean_degree_target)
{
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto [a, b] = edges_[e];
        if (a >= b || b >= n)
            throw InvalidParameter("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                   ") is not a valid i < j pair");
        if (e > 0 && edges_[e - 1] == edges_[e])
            throw InvalidParameter("duplicate edge");
        ++offsets_[a + 1];
        ++offsets_[b + 1];
    }
    for (std::size_t i = 0; i < n; ++i)
        offsets_[i + 1] += offsets_[i];

    neighbors_.resize(2 * edges_.size());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
        neighbors_[cursor[a]++] = b;
        neighbors_[cursor[b]++] = a;
    }
}

Network generate_er(std::size_t n, double mean_degree, std::uint64_t seed)
{
    if (n < 2)
        throw InvalidParameter("generate_er: need at least two nodes");
    if (n > 0xffffffffULL)
        throw InvalidParameter("generate_er: node count exceeds 32-bit ids");
    if (!(mean_degree > 0.0) || mean_degree > static_cast<double>(n - 1))
        throw InvalidParameter("generate_er: mean degree must lie in (0, n-1]");

    const std::size_t max_edges = n * (n - 1) / 2;
    const auto target = static_cast<std::size_t>(std::llround(mean_degree * static_cast<double>(n) / 2.0));
    if (target > max_edges)
        throw InvalidParameter("generate_er: edge count exceeds n(n-1)/2");

    auto eng = make_engine(seed, Stream::Graph);
    std::vector<Edge> edges;
    edges.reserve(target);

    if (2 * target <= max_edges) {
        for (const auto key : sample_pairs(n, target, eng))
            edges.push_back(key_edge(key));
    } else {
        // Dense request: sample the complement instead.
        const auto removed_keys = sample_pairs(n, max_edges - target, eng);
        std::unordered_set<std::uint64_t> removed(removed_keys.begin(), removed_keys.end());
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (!removed.contains(edge_key(a, b)))
                    edges.emplace_back(a, b);
    }
    return Network(n, std::move(edges), mean_degree);
}

DegreeHistogram degree_histogram(const Network& net)
{
    DegreeHistogram hist;
    accumulate_degrees(hist, net);
    return hist;
}

void accumulate_degrees(DegreeHistogram& hist, const Network& net)
{
    for (NodeId i = 0; i < net.size(); ++i)
        ++hist[net.degree(i)];
}

double poisson_pmf(std::size_t k, double lambda)
{
    if (!(lambda > 0.0))
        throw DomainError("poisson_pmf: lambda must be positive");
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
}

ChiSquareResult poisson_chi_square(const DegreeHistogram& hist, double lambda)
{
    if (!(lambda > 0.0))
        throw DomainError("poisson_chi_square: lambda must be positive");
    double total = 0.0;
    for (const auto& [k, count] : hist)
        total += static_cast<double>(count);
    if (total <= 0.0)
        throw DegenerateSeries("poisson_chi_square: empty histogram");

    auto observed_at = [&](std::size_t k) -> double {
        const auto it = hist.find(k);
        return it == hist.end() ? 0.0 : static_cast<double>(it->second);
    };
    // P(X > k) = P(k+1, lambda), the regularized lower incomplete gamma.
    auto upper_tail = [&](std::size_t k) { return Eigen::numext::igamma(static_cast<double>(k) + 1.0, lambda); };

    constexpr double min_expected = 5.0;
    std::vector<std::pair<double, double>> cells; // (observed, expected)
    double bucket_obs = 0.0;
    double bucket_exp = 0.0;
    for (std::size_t k = 0;; ++k) {
        bucket_obs += observed_at(k);
        bucket_exp += total * poisson_pmf(k, lambda);
        const double rest_exp = total * upper_tail(k);
        if (rest_exp < min_expected) {
            for (auto it = hist.upper_bound(k); it != hist.end(); ++it)
                bucket_obs += static_cast<double>(it->second);
            bucket_exp += rest_exp;
            if (bucket_exp < min_expected && !cells.empty()) {
                cells.back().first += bucket_obs;
                cells.back().second += bucket_exp;
            } else {
                cells.emplace_back(bucket_obs, bucket_exp);
            }
            break;
        }
        if (bucket_exp >= min_expected) {
            cells.emplace_back(bucket_obs, bucket_exp);
            bucket_obs = bucket_exp = 0.0;
        }
    }

    ChiSquareResult result;
    for (const auto& [obs, exp] : cells)
        result.statistic += (obs - exp) * (obs - exp) / exp;
    result.categories = cells.size();
    result.dof = result.categories > 0 ? result.categories - 1 : 0;
    result.p_value = result.dof == 0
                         ? 1.0
                         : Eigen::numext::igammac(0.5 * static_cast<double>(result.dof), 0.5 * result.statistic);
    return result;
}

void write_edge_list(std::ostream& os, const Network& net)
{
    for (const auto& [a, b] : net.edges())
        os << a << ' ' << b << '\n';
}

} // namespace gvm
