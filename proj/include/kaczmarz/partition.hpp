#pragma once

#include "kaczmarz/matrix.hpp"
#include "kaczmarz/rng.hpp"

#include <cstddef>
#include <vector>

namespace kaczmarz {

/// Disjoint, nonempty index blocks covering [0, axis_len).
struct Partition {
    Axis axis = Axis::Row;
    std::size_t axis_len = 0;
    std::vector<std::vector<std::size_t>> blocks;

    std::size_t size() const { return blocks.size(); }
    /// Throws std::invalid_argument unless the partition invariants hold.
    void validate() const;
    bool is_singletons() const;
};

/// Blocks {0..tau-1}, {tau..2tau-1}, ...; the last block holds the remainder.
Partition contiguous_partition(Axis axis, std::size_t axis_len, std::size_t tau);

Partition singleton_partition(Axis axis, std::size_t axis_len);

/// Draws block indices with probability ||block||_F^2 / ||A||_F^2 by inverse
/// CDF over the prefix sums.
class BlockSampler {
public:
    /// Throws DataError when a block has zero Frobenius norm.
    BlockSampler(const Matrix& a, Partition partition);

    const Partition& partition() const { return partition_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& cumulative() const { return cumulative_; }
    double total() const { return total_; }
    double probability(std::size_t block) const { return weights_[block] / total_; }

    /// Consumes exactly one draw from rng.
    std::size_t sample(Rng& rng) const;

private:
    Partition partition_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

} // namespace kaczmarz
