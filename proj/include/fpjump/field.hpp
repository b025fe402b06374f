#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fpjump {

/// What a grid vector represents: a density rho (integrates to mass with the
/// h weight), a probability vector p (sums to one), a ratio q = p / pi, an
/// observable u for the backward equation, or a stationary distribution.
enum class FieldKind { Density, Probability, Ratio, Observable, Stationary };

struct FieldVec {
    FieldKind kind = FieldKind::Observable;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t j) const { return values[j]; }
    double& operator[](std::size_t j) { return values[j]; }
    std::span<const double> view() const noexcept { return values; }

    /// Validates values >= 0 and sum == 1 within 1e-12; throws NumericalError.
    static FieldVec probability(std::vector<double> values);
};

}  // namespace fpjump
