#include "strider/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "strider/errors.hpp"

namespace strider {

AdamState AdamState::for_params(std::span<const Tensor* const> params) {
    AdamState state;
    for (const Tensor* p : params) {
        state.first_moment.emplace_back(p->size(), 0.0);
        state.second_moment.emplace_back(p->size(), 0.0);
    }
    return state;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state, double rate,
               const AdamConfig& config) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw ShapeError("adam_step: parameter, gradient and state counts differ");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(config.beta1, t);
    const double correction2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(g) || state.first_moment[i].size() != p.size()) {
            throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i));
        }
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        double* w = p.data();
        const double* gd = g.data();
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * gd[k];
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * gd[k] * gd[k];
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            w[k] -= rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

void CyclicSchedule::validate() const {
    if (!(min_rate > 0.0) || !(min_rate <= max_rate)) throw std::invalid_argument("CyclicSchedule: need 0 < min_rate <= max_rate");
    if (cycle_size < 2) throw std::invalid_argument("CyclicSchedule: cycle_size must be >= 2");
}

double cyclic_rate(std::uint64_t iteration, const CyclicSchedule& schedule) {
    const std::uint64_t half = schedule.cycle_size / 2;
    const std::uint64_t pos = iteration % schedule.cycle_size;
    const double span = schedule.max_rate - schedule.min_rate;
    if (pos <= half) {
        return schedule.min_rate + span * static_cast<double>(pos) / static_cast<double>(half);
    }
    const std::uint64_t down = schedule.cycle_size - half;
    return schedule.max_rate - span * static_cast<double>(pos - half) / static_cast<double>(down);
}

}  // namespace strider
