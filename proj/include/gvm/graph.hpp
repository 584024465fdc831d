#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace gvm {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph on dense node ids 0..n-1, stored as CSR adjacency.
/// Immutable after construction.
class Network {
public:
    /// Edges must be unique, loop-free and satisfy first < second.
    Network(std::size_t n, std::vector<Edge> edges, double mean_degree_target);

    std::size_t size() const { return offsets_.size() - 1; }
    std::size_t edge_count() const { return edges_.size(); }
    double mean_degree_target() const { return mean_degree_target_; }
    double realized_mean_degree() const
    {
        return size() == 0 ? 0.0 : 2.0 * static_cast<double>(edge_count()) / static_cast<double>(size());
    }

    /// Sorted lexicographically.
    std::span<const Edge> edges() const { return edges_; }

    std::span<const NodeId> neighbors(NodeId i) const
    {
        return {neighbors_.data() + offsets_[i], neighbors_.data() + offsets_[i + 1]};
    }
    std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

private:
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
    double mean_degree_target_;
};

/// G(n, M) random graph with M = round(mean_degree * n / 2) distinct edges.
/// Throws InvalidParameter if n < 2, mean_degree is outside (0, n-1], or M
/// exceeds n(n-1)/2.
Network generate_er(std::size_t n, double mean_degree, std::uint64_t seed);

using DegreeHistogram = std::map<std::size_t, std::size_t>;

DegreeHistogram degree_histogram(const Network& net);

/// Adds the degrees of `net` to an existing histogram (pooling over realizations).
void accumulate_degrees(DegreeHistogram& hist, const Network& net);

/// lambda^k e^-lambda / k!, evaluated in log space. Throws DomainError for lambda <= 0.
double poisson_pmf(std::size_t k, double lambda);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    std::size_t categories = 0;
};

/// Pearson goodness-of-fit of a degree histogram against Poisson(lambda) with
/// lambda fixed. Adjacent degrees are pooled until every category expects at
/// least five observations; the last category absorbs the upper tail.
ChiSquareResult poisson_chi_square(const DegreeHistogram& hist, double lambda);

/// One "i j" line per edge, i < j, sorted.
void write_edge_list(std::ostream& os, const Network& net);

} // namespace gvm
