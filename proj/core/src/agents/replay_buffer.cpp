#include "rve/agents/replay_buffer.hpp"

#include <stdexcept>

namespace rve::agents {

ReplayBuffer::ReplayBuffer(std::optional<std::size_t> capacity) : capacity_(capacity) {
    if (capacity_ && *capacity_ == 0) throw std::invalid_argument("buffer capacity must be positive");
}

std::optional<core::Transition> ReplayBuffer::push(const core::Transition& tr) {
    std::optional<core::Transition> out;
    if (capacity_ && items_.size() == *capacity_) {
        out = std::move(items_.front());
        items_.pop_front();
    }
    items_.push_back(tr);
    return out;
}

}  // namespace rve::agents
