#pragma once

/// @file capacity.hpp
/// @brief Step-function capacity profiles and their integrals.

#include <cucumber/time.hpp>

#include <algorithm>
#include <cmath>
#include <span>

namespace cucumber {

/// Work (capacity-seconds) below which a remainder counts as done. Absorbs
/// rounding when a job finishes exactly on a step boundary.
inline constexpr double kWorkTolerance = 1e-9;

/// Non-owning view of a piecewise-constant capacity profile: `values[i]` is
/// the utilization fraction available on [start + i*step, start + (i+1)*step).
/// Capacity is zero outside the covered range.
class StepCapacity {
public:
    StepCapacity(Seconds start, Seconds step, std::span<const double> values) noexcept
        : start_(start)
        , step_(step)
        , values_(values) {}

    [[nodiscard]] Seconds start() const noexcept { return start_; }
    [[nodiscard]] Seconds step() const noexcept { return step_; }
    [[nodiscard]] Seconds end() const noexcept { return start_ + step_ * static_cast<Seconds>(values_.size()); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    [[nodiscard]] double rate_at(Seconds t) const noexcept {
        if (t < start_ || t >= end()) {
            return 0.0;
        }
        auto i = static_cast<std::size_t>((t - start_) / step_);
        return values_[std::min(i, values_.size() - 1)];
    }

    /// Integral of capacity over [from, to].
    [[nodiscard]] double integral(Seconds from, Seconds to) const noexcept {
        from = std::max(from, start_);
        to = std::min(to, end());
        if (!(to > from)) {
            return 0.0;
        }
        double total = 0.0;
        auto i = static_cast<std::size_t>((from - start_) / step_);
        Seconds t = from;
        while (i < values_.size() && t < to) {
            const Seconds step_end = std::min(to, start_ + step_ * static_cast<Seconds>(i + 1));
            total += values_[i] * (step_end - t);
            t = step_end;
            ++i;
        }
        return total;
    }

    /// Earliest t >= from such that the integral over [from, t] covers `work`.
    /// Returns kNever when the profile ends first.
    [[nodiscard]] Seconds advance(Seconds from, double work) const noexcept {
        if (work <= kWorkTolerance) {
            return from;
        }
        Seconds t = std::max(from, start_);
        if (t >= end()) {
            return kNever;
        }
        auto i = static_cast<std::size_t>((t - start_) / step_);
        while (i < values_.size()) {
            const Seconds step_end = start_ + step_ * static_cast<Seconds>(i + 1);
            const double rate = values_[i];
            if (rate > 0.0) {
                const double available = rate * (step_end - t);
                if (available >= work - kWorkTolerance) {
                    return std::min(step_end, t + work / rate);
                }
                work -= available;
            }
            t = step_end;
            ++i;
        }
        return kNever;
    }

private:
    Seconds start_;
    Seconds step_;
    std::span<const double> values_;
};

} // namespace cucumber
