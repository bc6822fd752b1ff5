#pragma once

// Fixed-capacity FIFO replay buffer with uniform sampling (with replacement).
//
// Storage is flat: one contiguous block per field, so a 200k-transition
// buffer costs a handful of allocations and sampling gathers straight into
// the column-major matrices the network consumes.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "ddqn/errors.hpp"
#include "ddqn/rng.hpp"
#include "ddqn/transition.hpp"

namespace ddqn {

// A minibatch laid out for the network: column j holds sample j.
struct Batch {
    Eigen::MatrixXd states;       // obs_dim x B
    Eigen::MatrixXd next_states;  // obs_dim x B
    std::vector<int> actions;
    Eigen::VectorXd rewards;
    std::vector<bool> dones;

    std::size_t size() const { return actions.size(); }
};

// Lays out a list of transitions as a Batch.
inline Batch to_batch(const std::vector<Transition>& transitions) {
    if (transitions.empty()) throw UsageError("to_batch: empty transition list");
    const auto d = static_cast<Eigen::Index>(transitions.front().s.size());
    const auto n = static_cast<Eigen::Index>(transitions.size());
    Batch b{Eigen::MatrixXd(d, n), Eigen::MatrixXd(d, n), std::vector<int>(transitions.size()),
            Eigen::VectorXd(n), std::vector<bool>(transitions.size())};
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& t = transitions[static_cast<std::size_t>(j)];
        if (static_cast<Eigen::Index>(t.s.size()) != d || static_cast<Eigen::Index>(t.s_next.size()) != d)
            throw ShapeError("to_batch: inconsistent observation sizes");
        b.states.col(j) = Eigen::Map<const Eigen::VectorXd>(t.s.data(), d);
        b.next_states.col(j) = Eigen::Map<const Eigen::VectorXd>(t.s_next.data(), d);
        b.actions[static_cast<std::size_t>(j)] = t.a;
        b.rewards[j] = t.r;
        b.dones[static_cast<std::size_t>(j)] = t.done;
    }
    return b;
}

class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int obs_dim) : capacity_(capacity), obs_dim_(obs_dim) {
        if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
        if (obs_dim < 1) throw ConfigError("replay buffer observation dimension must be positive");
    }

    std::size_t capacity() const { return capacity_; }
    int obs_dim() const { return obs_dim_; }
    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    std::uint64_t insert_count() const { return insert_count_; }

    void push(const Transition& t) {
        const auto d = static_cast<std::size_t>(obs_dim_);
        if (t.s.size() != d || t.s_next.size() != d)
            throw ShapeError("replay push: observation has " + std::to_string(t.s.size()) +
                             " components, buffer expects " + std::to_string(d));
        if (states_.empty()) reserve_storage();
        const std::size_t slot = static_cast<std::size_t>(insert_count_ % capacity_);
        std::copy(t.s.begin(), t.s.end(), states_.begin() + static_cast<std::ptrdiff_t>(slot * d));
        std::copy(t.s_next.begin(), t.s_next.end(), next_states_.begin() + static_cast<std::ptrdiff_t>(slot * d));
        actions_[slot] = t.a;
        rewards_[slot] = t.r;
        dones_[slot] = t.done ? 1 : 0;
        ++insert_count_;
        if (size_ < capacity_) ++size_;
    }

    // i-th stored transition, 0 = oldest.
    Transition at(std::size_t i) const {
        if (i >= size_) throw UsageError("replay at: index out of range");
        const std::size_t slot = physical_slot(i);
        const auto d = static_cast<std::size_t>(obs_dim_);
        const auto first = static_cast<std::ptrdiff_t>(slot * d);
        const auto last = first + static_cast<std::ptrdiff_t>(d);
        return {{states_.begin() + first, states_.begin() + last},
                actions_[slot],
                rewards_[slot],
                {next_states_.begin() + first, next_states_.begin() + last},
                dones_[slot] != 0};
    }

    // `batch_size` logical indices drawn uniformly with replacement.
    std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const {
        if (batch_size == 0) throw UsageError("replay sample: batch size must be positive");
        if (size_ < batch_size)
            throw UsageError("replay sample: buffer holds " + std::to_string(size_) + " transitions, batch needs " +
                             std::to_string(batch_size));
        std::vector<std::size_t> idx(batch_size);
        for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(size_));
        return idx;
    }

    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const {
        std::vector<Transition> out;
        out.reserve(batch_size);
        for (auto i : sample_indices(batch_size, rng)) out.push_back(at(i));
        return out;
    }

    // Same draws as `sample`, gathered directly into `batch`.
    void sample_into(Batch& batch, std::size_t batch_size, Rng& rng) const {
        gather(sample_indices(batch_size, rng), batch);
    }

    void gather(const std::vector<std::size_t>& indices, Batch& batch) const {
        const auto n = static_cast<Eigen::Index>(indices.size());
        const Eigen::Index d = obs_dim_;
        batch.states.resize(d, n);
        batch.next_states.resize(d, n);
        batch.actions.resize(indices.size());
        batch.rewards.resize(n);
        batch.dones.resize(indices.size());
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::size_t logical = indices[static_cast<std::size_t>(j)];
            if (logical >= size_) throw UsageError("replay gather: index out of range");
            const std::size_t slot = physical_slot(logical);
            const double* s = states_.data() + slot * static_cast<std::size_t>(d);
            const double* sn = next_states_.data() + slot * static_cast<std::size_t>(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                batch.states(i, j) = s[i];
                batch.next_states(i, j) = sn[i];
            }
            batch.actions[static_cast<std::size_t>(j)] = actions_[slot];
            batch.rewards[j] = rewards_[slot];
            batch.dones[static_cast<std::size_t>(j)] = dones_[slot] != 0;
        }
    }

private:
    std::size_t physical_slot(std::size_t logical) const {
        const std::size_t oldest = size_ < capacity_ ? 0 : static_cast<std::size_t>(insert_count_ % capacity_);
        return (oldest + logical) % capacity_;
    }

    void reserve_storage() {
        const std::size_t d = static_cast<std::size_t>(obs_dim_);
        states_.assign(capacity_ * d, 0.0);
        next_states_.assign(capacity_ * d, 0.0);
        actions_.assign(capacity_, 0);
        rewards_.assign(capacity_, 0.0);
        dones_.assign(capacity_, 0);
    }

    std::size_t capacity_;
    int obs_dim_;
    std::size_t size_ = 0;
    std::uint64_t insert_count_ = 0;
    std::vector<double> states_;
    std::vector<double> next_states_;
    std::vector<int> actions_;
    std::vector<double> rewards_;
    std::vector<std::uint8_t> dones_;
};

}  // namespace ddqn
