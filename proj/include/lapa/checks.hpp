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
#include <cstdio>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lapa/allocators.hpp"
#include "lapa/channel.hpp"
#include "lapa/detection.hpp"
#include "lapa/estimation.hpp"
#include "lapa/los_metric.hpp"
#include "lapa/model.hpp"
#include "lapa/pilots.hpp"

// Self-checks run by `lapa_sim check`: quick randomized invariant suites over
// small instances.
namespace lapa::checks {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline double brute_theta_sq(int m, double x) {
    cdouble acc = 0.0;
    for (int k = 0; k < m; ++k)
        acc += std::polar(1.0, -x * k);
    return std::norm(acc);
}

inline NetworkConfig small_config(std::uint64_t seed) {
    NetworkConfig c;
    c.num_cells = 2;
    c.users_per_cell = 6;
    c.num_antennas = 16;
    c.pilot_length = 3;
    c.k_db = 5.0;
    c.seed = seed;
    return c;
}

}  // namespace detail

inline CheckResult check_theta_closed_form(std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> mdist(1, 64);
    std::uniform_real_distribution<double> xdist(-kTwoPi, kTwoPi);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const int m = mdist(rng);
        const double x = xdist(rng);
        const double ref = detail::brute_theta_sq(m, x);
        const double got = theta_mag_sq(m, x);
        worst = std::max(worst, std::abs(got - ref) / std::max(ref, 1e-300));
    }
    return {"theta_closed_form", worst <= 1e-9, "max rel err " + detail::sci(worst)};
}

inline CheckResult check_los_metric_explicit(std::uint64_t seed) {
    Rng rng(seed);
    NetworkConfig cfg = detail::small_config(seed);
    cfg.num_cells = 1;
    cfg.users_per_cell = 2;
    std::uniform_real_distribution<double> d(cfg.min_distance, cfg.cell_radius), a(0.0, kTwoPi), kdb(-5.0, 15.0);
    std::uniform_int_distribution<int> mdist(1, 64);
    double worst = 0.0;
    for (int t = 0; t < 300; ++t) {
        cfg.num_antennas = mdist(rng);
        cfg.k_db = kdb(rng);
        const Scenario sc = scenario_from_polar(cfg, {{{d(rng), a(rng)}, {d(rng), a(rng)}}});
        const auto& u = sc.user(0, 0);
        const auto& v = sc.user(0, 1);
        auto los_vec = [&](const UserRecord& x) {
            const BsLink& l = x.serving();
            return CVector(std::sqrt(l.est_gain * l.est_k_factor / (1.0 + l.est_k_factor)) *
                           steering_vector(cfg.num_antennas, l.est_aoa, cfg.antenna_spacing_ratio));
        };
        const CVector gu = los_vec(u), gv = los_vec(v);
        const double ref = std::norm(gv.dot(gu) / gv.dot(gv));
        const double got = los_interference(u, v, 0, cfg.num_antennas).value();
        worst = std::max(worst, std::abs(got - ref) / std::max(ref, 1e-300));
    }
    return {"los_metric_vs_explicit_vectors", worst <= 1e-9, "max rel err " + detail::sci(worst)};
}

inline CheckResult check_los_subtraction(std::uint64_t seed) {
    NetworkConfig cfg = detail::small_config(seed);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
        const Scenario sc = make_scenario(cfg, seed + static_cast<std::uint64_t>(t));
        Rng rng(seed);
        const AllocationPlan plan = allocate_random(sc, rng);
        const PilotContext ctx = make_pilot_context(sc, plan);
        const ChannelSet ch = assemble_channels(sc, seed + 100 + static_cast<std::uint64_t>(t));
        Rng noise(seed);
        const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, noise);
        for (int l = 0; l < cfg.num_cells; ++l) {
            const CMatrix diff = subtract_los(y[static_cast<std::size_t>(l)], l, ctx) - nlos_synthesis(ch, ctx.lambdas, l);
            worst = std::max(worst, diff.cwiseAbs().maxCoeff());
        }
    }
    return {"los_subtraction_perfect_location", worst < 1e-9, "max abs dev " + detail::sci(worst)};
}

inline CheckResult check_ls_exactness(std::uint64_t seed) {
    NetworkConfig cfg = detail::small_config(seed);
    cfg.num_cells = 1;
    cfg.users_per_cell = cfg.pilot_length = 6;
    const Scenario sc = make_scenario(cfg, seed);
    AllocationPlan plan;
    plan.cells = {{0, 1, 2, 3, 4, 5}};
    const PilotContext ctx = make_pilot_context(sc, plan);
    const ChannelSet ch = assemble_channels(sc, seed);
    Rng noise(seed);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, noise);
    const LsEstimate est = ls_estimate(subtract_los(y[0], 0, ctx), ctx.lambdas[0]);
    const double dev = (est.nlos - nlos_effective(ch.at(0, 0))).cwiseAbs().maxCoeff();
    return {"ls_exactness", dev < 1e-9, "max abs dev " + detail::sci(dev)};
}

inline CheckResult check_zf_identity(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        CMatrix g(24, 6);
        for (Eigen::Index i = 0; i < g.size(); ++i)
            g.data()[i] = complex_normal(rng);
        const Combiner c = zf_combiner(g);
        const CMatrix eye = c.w.adjoint() * g;
        worst = std::max(worst, (eye - CMatrix::Identity(6, 6)).cwiseAbs().maxCoeff());
    }
    return {"zf_identity", worst < 1e-8, "max abs dev " + detail::sci(worst)};
}

inline CheckResult check_plan_balance(std::uint64_t seed) {
    NetworkConfig cfg = detail::small_config(seed);
    cfg.users_per_cell = 7;
    bool ok = true;
    for (int t = 0; t < 10 && ok; ++t) {
        const Scenario sc = make_scenario(cfg, seed + static_cast<std::uint64_t>(t));
        Rng rng(seed + static_cast<std::uint64_t>(t));
        ok = is_balanced(allocate_proposed(sc), cfg.pilot_length) &&
             is_balanced(allocate_random(sc, rng), cfg.pilot_length) &&
             is_balanced(allocate_greedy(sc, 10, rng), cfg.pilot_length);
    }
    return {"plan_balance", ok, ok ? "proposed/random/greedy balanced" : "unbalanced plan found"};
}

inline CheckResult check_pilot_orthogonality() {
    double worst = 0.0;
    for (int ell = 1; ell <= 64; ++ell) {
        const PilotBook b = build_pilot_book(ell);
        const CMatrix g = b.sequences * b.sequences.adjoint() - ell * CMatrix::Identity(ell, ell);
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    return {"pilot_orthogonality", worst < 1e-10, "max off-diag " + detail::sci(worst)};
}

inline CheckResult check_detection_decomposition(std::uint64_t seed) {
    NetworkConfig cfg = detail::small_config(seed);
    const Scenario sc = make_scenario(cfg, seed);
    Rng rng(seed);
    const AllocationPlan plan = allocate_random(sc, rng);
    const PilotContext ctx = make_pilot_context(sc, plan);
    const RealizationOutput out = run_realization(sc, ctx, seed);
    double worst = 0.0;
    std::vector<CVector> x;
    for (int i = 0; i < cfg.num_cells; ++i) {
        CVector s(cfg.users_per_cell);
        for (Eigen::Index j = 0; j < s.size(); ++j)
            s(j) = complex_normal(rng);
        x.push_back(s);
    }
    CVector n(cfg.num_antennas);
    for (Eigen::Index m = 0; m < n.size(); ++m)
        n(m) = complex_normal(rng);
    for (int l = 0; l < cfg.num_cells; ++l) {
        const CVector y = received_data(out.channels, l, x, n, cfg.snr);
        for (int k = 0; k < cfg.users_per_cell; ++k) {
            const CVector w = out.combiners[static_cast<std::size_t>(l)].w.col(k);
            const auto t = decompose_detection(w, out.channels, l, k, x, n, cdouble(0.7, -0.1), cfg.snr);
            worst = std::max(worst, std::abs(t.total() - w.dot(y)));
        }
    }
    return {"detection_decomposition", worst < 1e-9, "max abs dev " + detail::sci(worst)};
}

inline CheckResult check_se_formula() {
    const double se = spectral_efficiency(1.0, 12, 196);
    const bool ok = std::abs(se - (1.0 - 12.0 / 196.0)) < 1e-12 && spectral_efficiency(0.0, 12, 196) == 0.0;
    return {"se_formula", ok, "SE(1; 12, 196) = " + std::to_string(se)};
}

inline std::vector<CheckResult> run_all(std::uint64_t seed) {
    return {check_theta_closed_form(seed),  check_los_metric_explicit(seed), check_los_subtraction(seed),
            check_ls_exactness(seed),       check_zf_identity(seed),         check_plan_balance(seed),
            check_pilot_orthogonality(),    check_detection_decomposition(seed), check_se_formula()};
}

}  // namespace lapa::checks
