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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lapa/core.hpp"

namespace lapa {

enum class KModel { fixed, distance };
enum class LosModel { always, linear_prob };

struct NetworkConfig {
    int num_cells = 2;          // L
    int users_per_cell = 36;    // N
    int num_antennas = 100;     // M
    int pilot_length = 12;      // symbols per pilot
    int coherence_length = 196; // channel uses per coherence block
    double snr = 10.0;          // linear; JSON carries snr_db
    double cell_radius = 400.0; // m
    double min_distance = 100.0;
    double pathloss_exponent = 3.76;
    int pathloss_sign = -1;
    KModel k_model = KModel::fixed;
    double k_db = 0.0;               // fixed mode
    double k_intercept_db = 13.0;    // distance mode: K_dB = a - b * d
    double k_slope_db_per_m = 0.03;
    LosModel los_model = LosModel::always;
    double antenna_spacing_ratio = 0.5; // r / lambda
    double localization_error_var = 0.0; // m^2
    double bs_spacing = 0.0;              // 0 selects 2 * cell_radius
    std::uint64_t seed = 1;

    double noise_var() const { return 1.0 / snr; }
    double effective_bs_spacing() const { return bs_spacing > 0.0 ? bs_spacing : 2.0 * cell_radius; }

    void validate() const {
        auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
        if (num_cells < 1)
            fail("L must be >= 1");
        if (users_per_cell < 1)
            fail("N must be >= 1");
        if (num_antennas < 1)
            fail("M must be >= 1");
        if (pilot_length < 1 || pilot_length > coherence_length)
            fail("pilot length must satisfy 1 <= ell <= ell_c");
        if (!(snr > 0.0) || !std::isfinite(snr))
            fail("SNR must be positive");
        if (!(cell_radius > 0.0))
            fail("cell radius must be positive");
        if (!(min_distance >= 0.0) || !(min_distance < cell_radius))
            fail("d_min must lie in [0, d_BS)");
        if (pathloss_sign != 1 && pathloss_sign != -1)
            fail("pathloss_sign must be +1 or -1");
        if (!(antenna_spacing_ratio > 0.0))
            fail("antenna spacing ratio must be positive");
        if (!(localization_error_var >= 0.0))
            fail("localization error variance must be >= 0");
        if (bs_spacing < 0.0)
            fail("BS spacing must be >= 0");
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Angle of `p` seen from `origin`, in [0, 2*pi).
inline double bearing(Point origin, Point p) { return wrap_angle(std::atan2(p.y - origin.y, p.x - origin.x)); }

// BS positions on a line, cell 0 at the origin.
struct CellLayout {
    std::vector<Point> bs;

    static CellLayout linear(const NetworkConfig& cfg) {
        CellLayout out;
        const double step = cfg.effective_bs_spacing();
        for (int l = 0; l < cfg.num_cells; ++l)
            out.bs.push_back({step * l, 0.0});
        return out;
    }
};

// Propagation state of one user towards one BS.
struct BsLink {
    double distance = 0.0;      // true, m
    double aoa = 0.0;           // true, rad in [0, 2*pi)
    double est_distance = 0.0;  // from the estimated position
    double est_aoa = 0.0;
    double gain = 0.0;          // alpha
    double est_gain = 0.0;      // alpha-hat
    double k_factor = 0.0;      // K (0 without LOS)
    double est_k_factor = 0.0;  // K-hat
    bool los = true;
};

struct UserRecord {
    int cell = 0;
    int index = 0;
    Point position;
    Point est_position;
    std::vector<BsLink> links;  // one per BS

    const BsLink& serving() const { return links[static_cast<std::size_t>(cell)]; }
    double distance() const { return serving().distance; }
    double aoa() const { return serving().aoa; }
    double est_distance() const { return serving().est_distance; }
    double est_aoa() const { return serving().est_aoa; }
};

using CellUsers = std::vector<UserRecord>;

struct Scenario {
    NetworkConfig cfg;
    CellLayout layout;
    std::vector<CellUsers> users;  // users[cell][index]

    int num_cells() const { return cfg.num_cells; }
    int users_per_cell() const { return cfg.users_per_cell; }
    const UserRecord& user(int cell, int index) const {
        return users[static_cast<std::size_t>(cell)][static_cast<std::size_t>(index)];
    }
};

// alpha = (d / d_BS)^(sign * v).
inline double pathloss(double d, const NetworkConfig& cfg) {
    if (!(d > 0.0))
        throw DomainError("pathloss: distance must be positive");
    return std::pow(d / cfg.cell_radius, cfg.pathloss_sign * cfg.pathloss_exponent);
}

// Linear Rician K-factor.
inline double k_factor(double d, const NetworkConfig& cfg) {
    if (cfg.k_model == KModel::fixed)
        return db_to_linear(cfg.k_db);
    return db_to_linear(cfg.k_intercept_db - cfg.k_slope_db_per_m * d);
}

inline double los_probability(double d, const NetworkConfig& cfg) {
    if (cfg.los_model == LosModel::always)
        return 1.0;
    return std::clamp(1.0 - d / cfg.cell_radius, 0.0, 1.0);
}

inline bool sample_los_state(double d, const NetworkConfig& cfg, Rng& rng) {
    if (cfg.los_model == LosModel::always)
        return true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < los_probability(d, cfg);
}

namespace detail {

// Fills the estimate-side fields of `user` from its estimated position.
inline void derive_estimates(UserRecord& user, const CellLayout& layout, const NetworkConfig& cfg) {
    const bool exact = user.est_position.x == user.position.x && user.est_position.y == user.position.y;
    for (std::size_t l = 0; l < user.links.size(); ++l) {
        BsLink& link = user.links[l];
        if (exact) {
            link.est_distance = std::max(link.distance, 1.0);
            link.est_aoa = link.aoa;
        } else {
            link.est_distance = std::max(distance(layout.bs[l], user.est_position), 1.0);
            link.est_aoa = bearing(layout.bs[l], user.est_position);
        }
        link.est_gain = pathloss(link.est_distance, cfg);
        // The BS knows whether a LOS path exists; only the geometry is uncertain.
        link.est_k_factor = link.los ? k_factor(link.est_distance, cfg) : 0.0;
    }
}

}  // namespace detail

// Builds a user at polar position (d, theta) around its serving BS; LOS states
// are drawn from `rng` (one draw per BS, in BS order, linear_prob mode only).
inline UserRecord make_user(int cell, int index, double d, double theta, const CellLayout& layout,
                            const NetworkConfig& cfg, Rng& rng) {
    UserRecord u;
    u.cell = cell;
    u.index = index;
    const Point bs = layout.bs[static_cast<std::size_t>(cell)];
    u.position = {bs.x + d * std::cos(theta), bs.y + d * std::sin(theta)};
    u.est_position = u.position;
    u.links.resize(layout.bs.size());
    for (std::size_t l = 0; l < layout.bs.size(); ++l) {
        BsLink& link = u.links[l];
        if (static_cast<int>(l) == cell) {
            link.distance = d;
            link.aoa = wrap_angle(theta);
        } else {
            link.distance = distance(layout.bs[l], u.position);
            link.aoa = bearing(layout.bs[l], u.position);
        }
        link.gain = pathloss(link.distance, cfg);
        link.los = sample_los_state(link.distance, cfg, rng);
        link.k_factor = link.los ? k_factor(link.distance, cfg) : 0.0;
    }
    detail::derive_estimates(u, layout, cfg);
    return u;
}

// Drops N users per cell with d ~ U[d_min, d_BS], theta ~ U[0, 2*pi).
inline std::vector<CellUsers> sample_users(const NetworkConfig& cfg, Rng& rng) {
    cfg.validate();
    const CellLayout layout = CellLayout::linear(cfg);
    std::uniform_real_distribution<double> dist(cfg.min_distance, cfg.cell_radius);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::vector<CellUsers> out(static_cast<std::size_t>(cfg.num_cells));
    for (int i = 0; i < cfg.num_cells; ++i) {
        for (int j = 0; j < cfg.users_per_cell; ++j) {
            const double d = dist(rng);
            const double theta = angle(rng);
            out[static_cast<std::size_t>(i)].push_back(make_user(i, j, d, theta, layout, cfg, rng));
        }
    }
    return out;
}

// Half-width of the per-axis uniform error giving total planar MSE sigma2.
inline double localization_half_width(double sigma2) { return std::sqrt(1.5 * sigma2); }

// Perturbs the position by independent U[-a, a] offsets on x and y and
// re-derives (d-hat, theta-hat, alpha-hat, K-hat). Two uniforms are drawn from
// `rng` even when sigma2 == 0 so that streams stay aligned across a sweep.
inline UserRecord apply_localization_error(UserRecord user, double sigma2, const CellLayout& layout,
                                           const NetworkConfig& cfg, Rng& rng) {
    if (!(sigma2 >= 0.0))
        throw ConfigError("localization error variance must be >= 0");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double ux = u(rng);
    const double uy = u(rng);
    if (sigma2 == 0.0) {
        user.est_position = user.position;
        detail::derive_estimates(user, layout, cfg);
        return user;
    }
    const double a = localization_half_width(sigma2);
    user.est_position = {user.position.x + a * ux, user.position.y + a * uy};
    detail::derive_estimates(user, layout, cfg);
    return user;
}

// One location drop: true positions and LOS states from the kTagUsers stream,
// localization errors from the kTagLocError stream. Positions are therefore
// identical across localization-error sweeps with the same seed.
inline Scenario make_scenario(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Scenario sc;
    sc.cfg = cfg;
    sc.layout = CellLayout::linear(cfg);
    Rng user_rng = make_stream(seed, {kTagUsers});
    sc.users = sample_users(cfg, user_rng);
    Rng err_rng = make_stream(seed, {kTagLocError});
    for (auto& cell : sc.users)
        for (auto& u : cell)
            u = apply_localization_error(u, cfg.localization_error_var, sc.layout, cfg, err_rng);
    return sc;
}

// Assembles a scenario from explicit serving-BS polar coordinates (true
// positions; estimates equal the truth). Used for hand-built fixtures.
struct PolarUser {
    double distance;
    double aoa;
};

inline Scenario scenario_from_polar(const NetworkConfig& cfg, const std::vector<std::vector<PolarUser>>& cells,
                                    std::uint64_t los_seed = 0) {
    cfg.validate();
    if (static_cast<int>(cells.size()) != cfg.num_cells)
        throw ConfigError("scenario_from_polar: cell count mismatch");
    Scenario sc;
    sc.cfg = cfg;
    sc.layout = CellLayout::linear(cfg);
    Rng rng = make_stream(los_seed, {kTagUsers});
    for (int i = 0; i < cfg.num_cells; ++i) {
        const auto& src = cells[static_cast<std::size_t>(i)];
        if (static_cast<int>(src.size()) != cfg.users_per_cell)
            throw ConfigError("scenario_from_polar: user count mismatch");
        CellUsers cu;
        for (int j = 0; j < cfg.users_per_cell; ++j)
            cu.push_back(make_user(i, j, src[static_cast<std::size_t>(j)].distance,
                                   src[static_cast<std::size_t>(j)].aoa, sc.layout, cfg, rng));
        sc.users.push_back(std::move(cu));
    }
    return sc;
}

}  // namespace lapa
