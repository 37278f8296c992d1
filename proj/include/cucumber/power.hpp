#pragma once

/// @file power.hpp
/// @brief Node power model: utilization to watts and back.

#include <cucumber/errors.hpp>
#include <cucumber/forecast.hpp>

#include <algorithm>
#include <concepts>
#include <optional>
#include <string>
#include <variant>

namespace cucumber {

/// Anything that maps node utilization to power draw. `power_to_load` is the
/// clamped inverse; both must be non-decreasing.
template <class M>
concept PowerCurve = requires(const M& m, double x) {
    { m.load_to_power(x) } -> std::convertible_to<double>;
    { m.power_to_load(x) } -> std::convertible_to<double>;
    { m.p_static() } -> std::convertible_to<double>;
    { m.p_max() } -> std::convertible_to<double>;
};

/// Linear model P = P_static + U * (P_max - P_static).
class PowerModel {
public:
    PowerModel(double p_static, double p_max)
        : p_static_(p_static)
        , p_max_(p_max) {
        if (!(p_static >= 0.0) || !(p_max > p_static)) {
            throw ConfigError("power model needs p_max > p_static >= 0, got p_static=" + std::to_string(p_static) +
                              " p_max=" + std::to_string(p_max));
        }
    }

    [[nodiscard]] double p_static() const noexcept { return p_static_; }
    [[nodiscard]] double p_max() const noexcept { return p_max_; }
    [[nodiscard]] double dynamic_range() const noexcept { return p_max_ - p_static_; }

    [[nodiscard]] double load_to_power(double u) const {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw InvalidUtilization("utilization must lie in [0, 1], got " + std::to_string(u));
        }
        return p_static_ + u * (p_max_ - p_static_);
    }

    /// Inverse of load_to_power, clamped to [0, 1].
    [[nodiscard]] double power_to_load(double p) const noexcept {
        return std::clamp((p - p_static_) / (p_max_ - p_static_), 0.0, 1.0);
    }

    friend bool operator==(const PowerModel&, const PowerModel&) = default;

private:
    double p_static_;
    double p_max_;
};

static_assert(PowerCurve<PowerModel>);

/// Power consumption forecast from a load forecast. The curve is applied to
/// every member / quantile trajectory (a monotone map keeps quantiles ordered),
/// then `other_consumers` is added per step.
template <PowerCurve M>
PowerForecast consumption_forecast(const M& model, const LoadForecast& load,
                                   const PowerSeries* other_consumers = nullptr) {
    const auto& grid = load.grid();
    if (other_consumers != nullptr) {
        require_same_grid(grid, other_consumers->grid(), "consumption forecast");
    }
    auto convert = [&](const std::vector<double>& u) {
        std::vector<double> p(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            p[i] = model.load_to_power(u[i]);
            if (other_consumers != nullptr) {
                p[i] += (*other_consumers)[i];
            }
        }
        return p;
    };
    Representation repr = std::visit(
        [&](const auto& rep) -> Representation {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Ensemble>) {
                Ensemble out;
                out.members.reserve(rep.members.size());
                for (const auto& m : rep.members) {
                    out.members.push_back(convert(m));
                }
                return out;
            } else if constexpr (std::is_same_v<T, Quantiles>) {
                Quantiles out{rep.levels, {}};
                out.trajectories.reserve(rep.trajectories.size());
                for (const auto& t : rep.trajectories) {
                    out.trajectories.push_back(convert(t));
                }
                return out;
            } else {
                return Point{convert(rep.values)};
            }
        },
        load.representation());
    return PowerForecast(grid, std::move(repr));
}

template <PowerCurve M>
PowerForecast consumption_forecast(const M& model, const LoadForecast& load, const PowerSeries& other_consumers) {
    return consumption_forecast(model, load, &other_consumers);
}

} // namespace cucumber
