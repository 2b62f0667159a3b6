// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#pragma once

#include <cmath>
#include <optional>

#include "lapa/core.hpp"
#include "lapa/model.hpp"

namespace lapa {

// Mutual AoA 2*pi*(r/lambda)*(sin a - sin b); pi*(sin a - sin b) at half-wavelength spacing.
inline double mutual_aoa(double aoa_a, double aoa_b, double spacing_ratio = 0.5) {
    return kTwoPi * spacing_ratio * (std::sin(aoa_a) - std::sin(aoa_b));
}

// |Theta(M, x)|^2 = sin^2(M x / 2) / sin^2(x / 2), with the M^2 limit at
// multiples of 2*pi. |sin(x/2)| < 1e-6 switches to the second-order expansion
// around the nearest alignment point.
inline double theta_mag_sq(int num_antennas, double x) {
    const double m = static_cast<double>(num_antennas);
    const double s = std::sin(0.5 * x);
    if (std::abs(s) < 1e-6) {
        const double phi = x - kTwoPi * std::round(x / kTwoPi);
        return m * m * (1.0 - (m * m - 1.0) * phi * phi / 12.0);
    }
    const double num = std::sin(0.5 * m * x);
    return (num * num) / (s * s);
}

struct LosInterference {
    std::optional<double> part1;  // absent when either K-factor is zero
    double part2 = 0.0;
    double mutual_aoa = 0.0;

    // Comparison key: part1 * part2, or part2 alone without LOS on one side.
    double value() const { return part1 ? *part1 * part2 : part2; }
};

// Distance/K dependent factor for the pair, given the two links at the BS.
inline std::optional<double> los_part1(const BsLink& interferer, const BsLink& victim) {
    if (!(victim.est_gain > 0.0))
        throw DomainError("los_interference: victim gain must be positive");
    const double ki = interferer.est_k_factor;
    const double kv = victim.est_k_factor;
    if (ki == 0.0 || kv == 0.0)
        return std::nullopt;
    const double num = interferer.est_gain * ki * (1.0 + kv);
    const double den = victim.est_gain * kv * (1.0 + ki);
    return num / den;
}

// LOS interference of `interferer` (U_ij) on `victim` (U_lk) at BS `bs`, from
// estimated locations only.
inline LosInterference los_interference(const UserRecord& interferer, const UserRecord& victim, int bs,
                                        int num_antennas, double spacing_ratio = 0.5) {
    const BsLink& a = interferer.links[static_cast<std::size_t>(bs)];
    const BsLink& b = victim.links[static_cast<std::size_t>(bs)];
    LosInterference out;
    out.part1 = los_part1(a, b);
    out.mutual_aoa = mutual_aoa(a.est_aoa, b.est_aoa, spacing_ratio);
    const double m = static_cast<double>(num_antennas);
    out.part2 = theta_mag_sq(num_antennas, out.mutual_aoa) / (m * m);
    return out;
}

// Large-M limit: part1 when the estimated AoAs have equal sines, otherwise 0.
inline double asymptotic_limit(const UserRecord& interferer, const UserRecord& victim, int bs) {
    const BsLink& a = interferer.links[static_cast<std::size_t>(bs)];
    const BsLink& b = victim.links[static_cast<std::size_t>(bs)];
    const auto p1 = los_part1(a, b);
    if (std::sin(a.est_aoa) != std::sin(b.est_aoa))
        return 0.0;
    return p1 ? *p1 : 1.0;
}

}  // namespace lapa
