#include "kaczmarz/partition.hpp"

#include "kaczmarz/errors.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace kaczmarz {

void Partition::validate() const {
    if (axis_len == 0) throw std::invalid_argument("partition: axis length must be positive");
    std::vector<bool> seen(axis_len, false);
    std::size_t covered = 0;
    for (const auto& block : blocks) {
        if (block.empty()) throw std::invalid_argument("partition: empty block");
        for (std::size_t idx : block) {
            if (idx >= axis_len) throw std::invalid_argument("partition: index out of range");
            if (seen[idx]) throw std::invalid_argument("partition: blocks overlap");
            seen[idx] = true;
            ++covered;
        }
    }
    if (covered != axis_len) throw std::invalid_argument("partition: blocks do not cover the axis");
}

bool Partition::is_singletons() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.size() == 1; });
}

Partition contiguous_partition(Axis axis, std::size_t axis_len, std::size_t tau) {
    if (tau < 1 || tau > axis_len)
        throw std::invalid_argument("contiguous_partition: tau=" + std::to_string(tau) + " outside [1, " +
                                    std::to_string(axis_len) + "]");
    Partition p;
    p.axis = axis;
    p.axis_len = axis_len;
    for (std::size_t start = 0; start < axis_len; start += tau) {
        const std::size_t stop = std::min(start + tau, axis_len);
        std::vector<std::size_t> block(stop - start);
        for (std::size_t k = 0; k < block.size(); ++k) block[k] = start + k;
        p.blocks.push_back(std::move(block));
    }
    return p;
}

Partition singleton_partition(Axis axis, std::size_t axis_len) { return contiguous_partition(axis, axis_len, 1); }

BlockSampler::BlockSampler(const Matrix& a, Partition partition) : partition_(std::move(partition)) {
    partition_.validate();
    const std::size_t expected = partition_.axis == Axis::Row ? a.rows() : a.cols();
    if (partition_.axis_len != expected) throw std::invalid_argument("BlockSampler: partition does not match matrix");

    weights_.reserve(partition_.size());
    cumulative_.reserve(partition_.size());
    for (std::size_t b = 0; b < partition_.size(); ++b) {
        const double w = block_frobenius_sq(a, BlockView(a, partition_.axis, partition_.blocks[b]));
        if (!(w > 0.0))
            throw DataError(std::string("BlockSampler: ") + (partition_.axis == Axis::Row ? "row" : "column") +
                            " block " + std::to_string(b) + " is identically zero and can never be selected");
        weights_.push_back(w);
        total_ += w;
        cumulative_.push_back(total_);
    }
}

std::size_t BlockSampler::sample(Rng& rng) const {
    const double target = rng.uniform() * total_;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) return cumulative_.size() - 1;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

} // namespace kaczmarz
