#pragma once

/// @file freep.hpp
/// @brief Free REE-powered ("freep") capacity forecast.
///
/// Per step: u_free = 1 - u_pred, u_reep = clamp((P_ree - P_static) /
/// (P_max - P_static), 0, 1), u_freep = min(u_free, u_reep).

#include <cucumber/capacity.hpp>
#include <cucumber/forecast.hpp>
#include <cucumber/power.hpp>

#include <algorithm>
#include <vector>

namespace cucumber {

class FreepForecast {
public:
    FreepForecast(TimeGrid grid, std::vector<double> u_freep, std::vector<double> u_free)
        : grid_(grid)
        , u_freep_(std::move(u_freep))
        , u_free_(std::move(u_free)) {
        if (u_freep_.size() != grid_.size() || u_free_.size() != grid_.size()) {
            throw GridMismatch("freep forecast length does not match its grid");
        }
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (!(u_freep_[i] >= 0.0 && u_freep_[i] <= u_free_[i] && u_free_[i] <= 1.0)) {
                throw InvariantViolation(i, "freep forecast needs 0 <= u_freep <= u_free <= 1");
            }
        }
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> u_freep() const noexcept { return u_freep_; }
    [[nodiscard]] std::span<const double> u_free() const noexcept { return u_free_; }

    /// Capacity a job may use without grid energy.
    [[nodiscard]] StepCapacity freep_capacity() const noexcept {
        return {static_cast<Seconds>(grid_.start()), static_cast<Seconds>(grid_.step()), u_freep_};
    }

    /// All capacity left over by the baseload.
    [[nodiscard]] StepCapacity free_capacity() const noexcept {
        return {static_cast<Seconds>(grid_.start()), static_cast<Seconds>(grid_.step()), u_free_};
    }

private:
    TimeGrid grid_;
    std::vector<double> u_freep_;
    std::vector<double> u_free_;
};

template <PowerCurve M>
FreepForecast compute_freep(const LoadSeries& u_pred, const PowerSeries& p_ree, const M& model) {
    require_same_grid(u_pred.grid(), p_ree.grid(), "freep capacity");
    const auto n = u_pred.size();
    std::vector<double> freep(n), free(n);
    for (std::size_t i = 0; i < n; ++i) {
        free[i] = 1.0 - u_pred[i];
        const double u_reep = model.power_to_load(p_ree[i]);
        freep[i] = std::min(free[i], u_reep);
    }
    return FreepForecast(u_pred.grid(), std::move(freep), std::move(free));
}

/// Single-valued load forecast via the `reduction_alpha` quantile.
inline LoadSeries reduce_load_forecast(const LoadForecast& u_pred, double reduction_alpha) {
    return quantile(u_pred, reduction_alpha);
}

} // namespace cucumber
