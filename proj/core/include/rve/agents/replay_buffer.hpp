#pragma once

#include <cstddef>
#include <deque>
#include <optional>

#include "rve/core/types.hpp"

namespace rve::agents {

// FIFO store of transitions; unbounded when no capacity is given.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::optional<std::size_t> capacity = std::nullopt);

    // Returns the evicted transition, if any.
    std::optional<core::Transition> push(const core::Transition& tr);

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::optional<std::size_t> capacity() const { return capacity_; }
    const core::Transition& operator[](std::size_t i) const { return items_[i]; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    void clear() { items_.clear(); }

private:
    std::optional<std::size_t> capacity_;
    std::deque<core::Transition> items_;
};

}  // namespace rve::agents
