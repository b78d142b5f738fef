#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strider/tensor.hpp"

namespace strider {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators, one per parameter tensor.
struct AdamState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::uint64_t step = 0;

    /// Zeroed accumulators matching `params`.
    static AdamState for_params(std::span<const Tensor* const> params);
};

/// One bias-corrected Adam update. `params` and `grads` are matched by
/// position and must agree in shape.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state, double rate,
               const AdamConfig& config = {});

/// Triangular cyclic learning rate.
struct CyclicSchedule {
    double min_rate = 1e-6;
    double max_rate = 5e-4;
    std::uint64_t cycle_size = 20000;

    void validate() const;
};

/// min -> max linearly over the first half cycle, back to min over the second.
double cyclic_rate(std::uint64_t iteration, const CyclicSchedule& schedule);

}  // namespace strider
