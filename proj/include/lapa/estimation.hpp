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

#include <vector>

#include "lapa/channel.hpp"
#include "lapa/core.hpp"
#include "lapa/model.hpp"
#include "lapa/pilots.hpp"

namespace lapa {

enum class Knowledge { truth, estimate };

// LOS part of G_il: H-bar D^(1/2) [Omega (Omega + I)^-1]^(1/2), built either
// from the true geometry or from the estimated one (theta-hat, alpha-hat, K-hat).
inline CMatrix los_block(const Scenario& sc, int source, int bs, Knowledge which) {
    const int M = sc.cfg.num_antennas;
    const int N = sc.users_per_cell();
    CMatrix out(M, N);
    for (int j = 0; j < N; ++j) {
        const BsLink& link = sc.user(source, j).links[static_cast<std::size_t>(bs)];
        const bool est = which == Knowledge::estimate;
        const double aoa = est ? link.est_aoa : link.aoa;
        const double gain = est ? link.est_gain : link.gain;
        const double k = est ? link.est_k_factor : link.k_factor;
        out.col(j) = std::sqrt(gain) * std::sqrt(k / (1.0 + k)) * steering_vector(M, aoa, sc.cfg.antenna_spacing_ratio);
    }
    return out;
}

// NLOS part of G_il: H-tilde [(Omega + I)^-1]^(1/2) D^(1/2).
inline CMatrix nlos_effective(const ChannelBlock& b) {
    const RVector w = (b.gain.array() / (1.0 + b.k.array())).sqrt();
    return b.nlos * w.asDiagonal();
}

// Per-scenario, per-plan quantities reused across fading realizations.
struct PilotContext {
    PilotBook book;
    std::vector<CMatrix> lambdas;   // per cell, N x ell
    std::vector<CMatrix> los_est;   // (source, bs) -> LOS estimate block, index source * L + bs
    std::vector<CMatrix> los_rx;    // per BS: sum_i los_est_il Lambda_i (M x ell)

    const CMatrix& los_estimate(int source, int bs, int num_cells) const {
        return los_est[static_cast<std::size_t>(source * num_cells + bs)];
    }
};

inline PilotContext make_pilot_context(const Scenario& sc, const AllocationPlan& plan) {
    const int L = sc.num_cells();
    validate_plan(plan, L, sc.users_per_cell(), sc.cfg.pilot_length);
    PilotContext ctx;
    ctx.book = build_pilot_book(sc.cfg.pilot_length);
    for (int i = 0; i < L; ++i)
        ctx.lambdas.push_back(pilot_matrix(plan, i, ctx.book));
    ctx.los_est.resize(static_cast<std::size_t>(L * L));
    for (int i = 0; i < L; ++i)
        for (int l = 0; l < L; ++l)
            ctx.los_est[static_cast<std::size_t>(i * L + l)] = los_block(sc, i, l, Knowledge::estimate);
    for (int l = 0; l < L; ++l) {
        CMatrix acc = CMatrix::Zero(sc.cfg.num_antennas, sc.cfg.pilot_length);
        for (int i = 0; i < L; ++i)
            acc.noalias() += ctx.los_estimate(i, l, L) * ctx.lambdas[static_cast<std::size_t>(i)];
        ctx.los_rx.push_back(std::move(acc));
    }
    return ctx;
}

// Y_l = sum_i G_il Lambda_i + Z for every BS l. Z entries are CN(0, noise_var);
// the underlying unit-variance draws are consumed even when noise_var == 0.
inline std::vector<CMatrix> synthesize_rx(const ChannelSet& channels, const std::vector<CMatrix>& lambdas,
                                          double noise_var, Rng& rng) {
    const int L = channels.num_cells;
    if (static_cast<int>(lambdas.size()) != L)
        throw StructuralError("synthesize_rx: need one pilot matrix per cell");
    const Eigen::Index ell = lambdas.front().cols();
    const double sigma = std::sqrt(noise_var);
    std::vector<CMatrix> y;
    y.reserve(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        CMatrix acc(channels.num_antennas, ell);
        for (Eigen::Index c = 0; c < ell; ++c)
            for (Eigen::Index r = 0; r < acc.rows(); ++r)
                acc(r, c) = sigma * complex_normal(rng);
        for (int i = 0; i < L; ++i)
            acc.noalias() += channels.at(i, l).g * lambdas[static_cast<std::size_t>(i)];
        y.push_back(std::move(acc));
    }
    return y;
}

inline std::vector<CMatrix> synthesize_rx(const ChannelSet& channels, const AllocationPlan& plan,
                                          const PilotBook& book, double noise_var, Rng& rng) {
    std::vector<CMatrix> lambdas;
    for (int i = 0; i < channels.num_cells; ++i)
        lambdas.push_back(pilot_matrix(plan, i, book));
    return synthesize_rx(channels, lambdas, noise_var, rng);
}

// NLOS-only synthesis sum_i H-tilde_il [(Omega_il + I)^-1]^(1/2) D_il^(1/2) Lambda_i (no noise).
inline CMatrix nlos_synthesis(const ChannelSet& channels, const std::vector<CMatrix>& lambdas, int bs) {
    CMatrix acc = CMatrix::Zero(channels.num_antennas, lambdas.front().cols());
    for (int i = 0; i < channels.num_cells; ++i)
        acc.noalias() += nlos_effective(channels.at(i, bs)) * lambdas[static_cast<std::size_t>(i)];
    return acc;
}

// Y-tilde-hat_l = Y_l - sum_i LOS-estimate_il Lambda_i.
inline CMatrix subtract_los(const CMatrix& y, int bs, const PilotContext& ctx) {
    return y - ctx.los_rx[static_cast<std::size_t>(bs)];
}

inline CMatrix subtract_los(const CMatrix& y, int bs, const Scenario& sc, const AllocationPlan& plan) {
    return subtract_los(y, bs, make_pilot_context(sc, plan));
}

// xi_il: residual LOS left behind by localization errors.
inline CMatrix los_residual(const Scenario& sc, int source, int bs, const CMatrix& lambda_source) {
    return (los_block(sc, source, bs, Knowledge::truth) - los_block(sc, source, bs, Knowledge::estimate)) *
           lambda_source;
}

struct LsEstimate {
    CMatrix nlos;                        // M x N
    std::vector<double> residual_norms;  // ||xi_il||_F per source cell, when known
};

// (1/ell) * Y-tilde Lambda_l^H, so a co-pilot channel enters with coefficient one.
inline LsEstimate ls_estimate(const CMatrix& y_tilde, const CMatrix& lambda_l) {
    if (y_tilde.cols() != lambda_l.cols())
        throw StructuralError("ls_estimate: pilot length mismatch");
    LsEstimate est;
    est.nlos = (y_tilde * lambda_l.adjoint()) / static_cast<double>(lambda_l.cols());
    return est;
}

// Full channel estimate at BS l used by the detector: estimated LOS part plus
// the LS estimate of the NLOS part.
inline CMatrix combined_estimate(const LsEstimate& ls, int bs, const PilotContext& ctx, int num_cells) {
    return ctx.los_estimate(bs, bs, num_cells) + ls.nlos;
}

}  // namespace lapa
