#pragma once

/// @file forecast.hpp
/// @brief Probabilistic multistep forecasts and renewable-excess fusion.
///
/// A forecast lives on a uniform TimeGrid and carries one of three
/// representations: an ensemble of member trajectories, a fixed set of
/// quantile trajectories, or a single point trajectory. The unit is a
/// compile-time tag, so fusing a load forecast with a power forecast does not
/// compile.
///
/// Empirical quantiles over samples use the inverse empirical CDF with
/// averaging at discontinuities: for n sorted values and level a, if a*n is an
/// integer k in [1, n) the result is (x[k-1] + x[k]) / 2, otherwise
/// x[ceil(a*n) - 1]. Away from CDF jumps this is the nearest-rank estimator.

#include <cucumber/errors.hpp>
#include <cucumber/random.hpp>
#include <cucumber/time.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace cucumber {

// Units ----------------------------------------------------------------------

struct Watts {
    static constexpr std::string_view name = "watts";
    static constexpr double upper_bound = std::numeric_limits<double>::infinity();
};

struct Utilization {
    static constexpr std::string_view name = "utilization";
    static constexpr double upper_bound = 1.0;
};

template <class U>
concept SeriesUnit = requires {
    { U::name } -> std::convertible_to<std::string_view>;
    { U::upper_bound } -> std::convertible_to<double>;
};

namespace detail {

/// Tolerance when matching a requested alpha against stored quantile levels.
inline constexpr double kLevelTolerance = 1e-9;

template <SeriesUnit U>
void check_value(double v, std::size_t step, std::string_view where) {
    if (!std::isfinite(v)) {
        throw InvariantViolation(step, std::string(where) + ": non-finite value");
    }
    if (v < 0.0) {
        throw InvariantViolation(step, std::string(where) + ": negative " + std::string(U::name) + " value " +
                                           std::to_string(v));
    }
    if (v > U::upper_bound) {
        throw InvariantViolation(step, std::string(where) + ": " + std::string(U::name) + " value " +
                                           std::to_string(v) + " exceeds " + std::to_string(U::upper_bound));
    }
}

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidAlpha(alpha);
    }
}

/// Zero-based order statistics whose mean is the empirical quantile.
struct QuantileRanks {
    std::size_t lo;
    std::size_t hi;
};

inline QuantileRanks quantile_ranks(std::size_t n, double alpha) {
    const double h = alpha * static_cast<double>(n);
    const double k = std::round(h);
    if (std::abs(h - k) <= 1e-9 * std::max(1.0, h)) {
        const auto ki = static_cast<std::size_t>(k);
        if (ki >= 1 && ki < n) {
            return {ki - 1, ki};
        }
        const auto only = std::min(n - 1, ki == 0 ? 0 : ki - 1);
        return {only, only};
    }
    auto idx = static_cast<std::size_t>(std::ceil(h));
    idx = std::clamp<std::size_t>(idx, 1, n) - 1;
    return {idx, idx};
}

} // namespace detail

/// Empirical quantile of an ascending sample (see file comment for the rule).
inline double empirical_quantile(std::span<const double> sorted, double alpha) {
    detail::check_alpha(alpha);
    if (sorted.empty()) {
        throw ConfigError("empirical quantile of an empty sample");
    }
    const auto r = detail::quantile_ranks(sorted.size(), alpha);
    return r.lo == r.hi ? sorted[r.lo] : 0.5 * (sorted[r.lo] + sorted[r.hi]);
}

/// Same value as empirical_quantile on the sorted sample, by selection.
/// Reorders `sample`.
inline double select_quantile(std::span<double> sample, double alpha) {
    detail::check_alpha(alpha);
    if (sample.empty()) {
        throw ConfigError("empirical quantile of an empty sample");
    }
    const auto r = detail::quantile_ranks(sample.size(), alpha);
    const auto lo = sample.begin() + static_cast<std::ptrdiff_t>(r.lo);
    std::nth_element(sample.begin(), lo, sample.end());
    if (r.lo == r.hi) {
        return *lo;
    }
    return 0.5 * (*lo + *std::min_element(lo + 1, sample.end()));
}

// Point series ---------------------------------------------------------------

template <SeriesUnit U>
class PointSeries {
public:
    using unit_type = U;

    PointSeries(TimeGrid grid, std::vector<double> values)
        : grid_(grid)
        , values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw GridMismatch("point series has " + std::to_string(values_.size()) + " values for a grid of " +
                               std::to_string(grid_.size()) + " steps");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            detail::check_value<U>(values_[i], i, "point series");
        }
    }

    /// Constant series.
    static PointSeries constant(TimeGrid grid, double value) {
        return PointSeries(grid, std::vector<double>(grid.size(), value));
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    /// Sub-series of `count` steps starting at step `first`, clipped to the data.
    [[nodiscard]] PointSeries slice(std::size_t first, std::size_t count) const {
        if (first >= values_.size()) {
            throw GridMismatch("slice starts beyond the end of the series");
        }
        count = std::min(count, values_.size() - first);
        TimeGrid g(grid_.time_at(first), grid_.step(), count);
        return PointSeries(g, std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                                  values_.begin() + static_cast<std::ptrdiff_t>(first + count)));
    }

    friend bool operator==(const PointSeries&, const PointSeries&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

// Probabilistic series -------------------------------------------------------

/// Member trajectories; members[k][i] is member k at step i.
struct Ensemble {
    std::vector<std::vector<double>> members;
    friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Quantile trajectories; trajectories[j][i] is the levels[j] quantile at step i.
struct Quantiles {
    std::vector<double> levels;
    std::vector<std::vector<double>> trajectories;
    friend bool operator==(const Quantiles&, const Quantiles&) = default;
};

struct Point {
    std::vector<double> values;
    friend bool operator==(const Point&, const Point&) = default;
};

using Representation = std::variant<Ensemble, Quantiles, Point>;

template <SeriesUnit U>
class ProbabilisticSeries {
public:
    using unit_type = U;

    ProbabilisticSeries(TimeGrid grid, Representation repr)
        : grid_(grid)
        , repr_(std::move(repr)) {
        validate();
    }

    /// Wraps a point series (a degenerate distribution).
    explicit ProbabilisticSeries(const PointSeries<U>& point)
        : ProbabilisticSeries(point.grid(), Point{std::vector<double>(point.values().begin(), point.values().end())}) {}

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const Representation& representation() const noexcept { return repr_; }

    [[nodiscard]] bool is_ensemble() const noexcept { return std::holds_alternative<Ensemble>(repr_); }
    [[nodiscard]] bool is_quantiles() const noexcept { return std::holds_alternative<Quantiles>(repr_); }
    [[nodiscard]] bool is_point() const noexcept { return std::holds_alternative<Point>(repr_); }

    /// Number of sample trajectories for ensemble-like series (Point counts as 1).
    [[nodiscard]] std::size_t member_count() const {
        if (const auto* e = std::get_if<Ensemble>(&repr_)) {
            return e->members.size();
        }
        if (is_point()) {
            return 1;
        }
        throw RepresentationMismatch("quantile series has no members");
    }

    /// Value of member `k` at `step`; Point series have the single member 0.
    [[nodiscard]] double member(std::size_t k, std::size_t step) const {
        if (const auto* e = std::get_if<Ensemble>(&repr_)) {
            return e->members[k][step];
        }
        if (const auto* p = std::get_if<Point>(&repr_)) {
            return p->values[step];
        }
        throw RepresentationMismatch("quantile series has no members");
    }

    /// First `steps` steps (horizon truncation).
    [[nodiscard]] ProbabilisticSeries truncated(std::size_t steps) const {
        steps = std::min(steps, grid_.size());
        auto cut = [steps](const std::vector<double>& v) {
            return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(steps));
        };
        Representation r = std::visit(
            [&](const auto& rep) -> Representation {
                using T = std::decay_t<decltype(rep)>;
                if constexpr (std::is_same_v<T, Ensemble>) {
                    Ensemble out;
                    for (const auto& m : rep.members) {
                        out.members.push_back(cut(m));
                    }
                    return out;
                } else if constexpr (std::is_same_v<T, Quantiles>) {
                    Quantiles out{rep.levels, {}};
                    for (const auto& t : rep.trajectories) {
                        out.trajectories.push_back(cut(t));
                    }
                    return out;
                } else {
                    return Point{cut(rep.values)};
                }
            },
            repr_);
        return {grid_.resized(steps), std::move(r)};
    }

    friend bool operator==(const ProbabilisticSeries&, const ProbabilisticSeries&) = default;

private:
    void check_length(const std::vector<double>& v, std::string_view what) const {
        if (v.size() != grid_.size()) {
            throw GridMismatch(std::string(what) + " has " + std::to_string(v.size()) + " values for a grid of " +
                               std::to_string(grid_.size()) + " steps");
        }
    }

    void validate() const {
        if (const auto* e = std::get_if<Ensemble>(&repr_)) {
            if (e->members.empty()) {
                throw DataError("ensemble forecast needs at least one member");
            }
            for (const auto& m : e->members) {
                check_length(m, "ensemble member");
                for (std::size_t i = 0; i < m.size(); ++i) {
                    detail::check_value<U>(m[i], i, "ensemble member");
                }
            }
        } else if (const auto* q = std::get_if<Quantiles>(&repr_)) {
            if (q->levels.empty() || q->levels.size() != q->trajectories.size()) {
                throw DataError("quantile forecast needs one trajectory per level");
            }
            for (std::size_t j = 0; j < q->levels.size(); ++j) {
                const double lvl = q->levels[j];
                if (!(lvl > 0.0 && lvl < 1.0)) {
                    throw DataError("quantile level " + std::to_string(lvl) + " outside (0, 1)");
                }
                if (j > 0 && !(lvl > q->levels[j - 1])) {
                    throw DataError("quantile levels must be strictly increasing");
                }
                check_length(q->trajectories[j], "quantile trajectory");
            }
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                for (std::size_t j = 0; j < q->levels.size(); ++j) {
                    detail::check_value<U>(q->trajectories[j][i], i, "quantile trajectory");
                    if (j > 0 && q->trajectories[j][i] < q->trajectories[j - 1][i]) {
                        std::ostringstream msg;
                        msg << "quantile crossing: level " << q->levels[j - 1] << " = " << q->trajectories[j - 1][i]
                            << " exceeds level " << q->levels[j] << " = " << q->trajectories[j][i];
                        throw InvariantViolation(i, msg.str());
                    }
                }
            }
        } else {
            const auto& p = std::get<Point>(repr_);
            check_length(p.values, "point trajectory");
            for (std::size_t i = 0; i < p.values.size(); ++i) {
                detail::check_value<U>(p.values[i], i, "point trajectory");
            }
        }
    }

    TimeGrid grid_;
    Representation repr_;
};

using PowerSeries = PointSeries<Watts>;
using LoadSeries = PointSeries<Utilization>;
using PowerForecast = ProbabilisticSeries<Watts>;
using LoadForecast = ProbabilisticSeries<Utilization>;

// Quantile -------------------------------------------------------------------

namespace detail {

inline std::size_t find_level(const Quantiles& q, double alpha) {
    for (std::size_t j = 0; j < q.levels.size(); ++j) {
        if (std::abs(q.levels[j] - alpha) <= kLevelTolerance) {
            return j;
        }
    }
    std::ostringstream msg;
    msg << "quantile " << alpha << " not stored; available levels:";
    for (double l : q.levels) {
        msg << ' ' << l;
    }
    throw QuantileUnavailable(msg.str());
}

} // namespace detail

/// Whether `quantile(series, alpha)` would succeed.
template <SeriesUnit U>
bool quantile_resolvable(const ProbabilisticSeries<U>& series, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        return false;
    }
    if (const auto* q = std::get_if<Quantiles>(&series.representation())) {
        return std::any_of(q->levels.begin(), q->levels.end(),
                           [&](double l) { return std::abs(l - alpha) <= detail::kLevelTolerance; });
    }
    return true;
}

/// Per-step alpha quantile. Ensembles use the empirical estimator, stored
/// quantile sets must contain alpha exactly, point series ignore alpha.
template <SeriesUnit U>
PointSeries<U> quantile(const ProbabilisticSeries<U>& series, double alpha) {
    detail::check_alpha(alpha);
    const auto& grid = series.grid();
    return std::visit(
        [&](const auto& rep) -> PointSeries<U> {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Ensemble>) {
                std::vector<double> out(grid.size());
                std::vector<double> column(rep.members.size());
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    for (std::size_t k = 0; k < rep.members.size(); ++k) {
                        column[k] = rep.members[k][i];
                    }
                    std::sort(column.begin(), column.end());
                    out[i] = empirical_quantile(column, alpha);
                }
                return PointSeries<U>(grid, std::move(out));
            } else if constexpr (std::is_same_v<T, Quantiles>) {
                return PointSeries<U>(grid, rep.trajectories[detail::find_level(rep, alpha)]);
            } else {
                return PointSeries<U>(grid, rep.values);
            }
        },
        series.representation());
}

// Fusion ---------------------------------------------------------------------

/// Sampled joint distribution of production minus consumption, one
/// difference sample per step. Built once per (inputs, sample_count, seed)
/// and queried for any alpha, so fused values are monotone in alpha.
///
/// Each step draws `sample_count` (production member, consumption member)
/// pairs. Member indices are stratified: every member appears
/// floor(sample_count / members) times, the remainder goes to distinct
/// randomly chosen members, and the pool is shuffled. Each drawn index is
/// still marginally uniform and the two sides are paired independently.
class JointReeSample {
public:
    JointReeSample(const PowerForecast& production, const PowerForecast& consumption, std::size_t sample_count,
                   std::uint64_t seed)
        : grid_(production.grid()) {
        require_same_grid(production.grid(), consumption.grid(), "REE fusion");
        if (production.is_quantiles() || consumption.is_quantiles()) {
            throw RepresentationMismatch(
                "joint REE fusion needs ensemble or point forecasts; use the quantile fall-back for quantile sets");
        }
        if (sample_count == 0) {
            throw ConfigError("sample_count must be positive");
        }
        const std::size_t np = production.member_count();
        const std::size_t nc = consumption.member_count();
        samples_.resize(grid_.size());
        std::vector<std::size_t> prod_idx, cons_idx;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            auto& sample = samples_[i];
            if (np == 1 && nc == 1) {
                sample.assign(1, production.member(0, i) - consumption.member(0, i));
                continue;
            }
            Rng rng{derive_seed(seed, "joint-ree", i)};
            stratified_indices(np, sample_count, rng, prod_idx);
            stratified_indices(nc, sample_count, rng, cons_idx);
            sample.resize(sample_count);
            for (std::size_t s = 0; s < sample_count; ++s) {
                sample[s] = production.member(prod_idx[s], i) - consumption.member(cons_idx[s], i);
            }
        }
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }

    /// Production-minus-consumption sample at `step`, unordered (may be negative).
    [[nodiscard]] std::span<const double> differences(std::size_t step) const { return samples_[step]; }

    /// max(0, Q(alpha, production - consumption)) per step.
    [[nodiscard]] PowerSeries fused(double alpha) const {
        detail::check_alpha(alpha);
        std::vector<double> out(grid_.size());
        std::vector<double> scratch;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            scratch.assign(samples_[i].begin(), samples_[i].end());
            out[i] = std::max(0.0, select_quantile(scratch, alpha));
        }
        return PowerSeries(grid_, std::move(out));
    }

private:
    static void stratified_indices(std::size_t members, std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
        out.clear();
        out.reserve(count);
        const std::size_t full = count / members;
        for (std::size_t r = 0; r < full; ++r) {
            for (std::size_t k = 0; k < members; ++k) {
                out.push_back(k);
            }
        }
        const std::size_t rest = count - out.size();
        if (rest > 0) {
            std::vector<std::size_t> pick(members);
            for (std::size_t k = 0; k < members; ++k) {
                pick[k] = k;
            }
            std::shuffle(pick.begin(), pick.end(), rng);
            out.insert(out.end(), pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(rest));
        }
        std::shuffle(out.begin(), out.end(), rng);
    }

    TimeGrid grid_;
    std::vector<std::vector<double>> samples_;
};

/// Joint fusion: max(0, Q(alpha, P_prod - P_cons)) from sampled member pairs.
inline PowerSeries fuse_ree_joint(const PowerForecast& production, const PowerForecast& consumption, double alpha,
                                  std::size_t sample_count, std::uint64_t seed) {
    detail::check_alpha(alpha);
    return JointReeSample(production, consumption, sample_count, seed).fused(alpha);
}

/// Quantile fall-back: max(0, Q(alpha, P_prod) - Q(1 - alpha, P_cons)).
inline PowerSeries fuse_ree_fallback(const PowerForecast& production, const PowerForecast& consumption,
                                     double alpha) {
    detail::check_alpha(alpha);
    require_same_grid(production.grid(), consumption.grid(), "REE fusion");
    const auto prod = quantile(production, alpha);
    const auto cons = quantile(consumption, 1.0 - alpha);
    std::vector<double> out(prod.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(0.0, prod[i] - cons[i]);
    }
    return PowerSeries(production.grid(), std::move(out));
}

} // namespace cucumber
