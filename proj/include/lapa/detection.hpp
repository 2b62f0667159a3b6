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
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "lapa/channel.hpp"
#include "lapa/core.hpp"
#include "lapa/estimation.hpp"
#include "lapa/model.hpp"
#include "lapa/pilots.hpp"

namespace lapa {

struct Combiner {
    CMatrix w;  // M x N, column k is w_lk
    std::string method = "zf_pinv";
    int rank = 0;
};

// W = G (G^H G)^+ = U S^+ V^H from the thin SVD of G. Singular values below
// 1e-8 * sigma_max are treated as zero, which yields the minimum-norm
// solution when co-pilot users have identical estimate columns.
inline Combiner zf_combiner(const CMatrix& g_hat) {
    if (g_hat.rows() < 1 || g_hat.cols() < 1)
        throw ConfigError("zf_combiner: empty estimate");
    if (g_hat.cwiseAbs2().sum() == 0.0)
        throw DomainError("degenerate estimate");
    Eigen::JacobiSVD<CMatrix> svd(g_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    const double cutoff = 1e-8 * sv(0);
    RVector inv = RVector::Zero(sv.size());
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            inv(i) = 1.0 / sv(i);
            ++rank;
        }
    }
    Combiner c;
    c.w = svd.matrixU() * inv.asDiagonal() * svd.matrixV().adjoint();
    c.rank = rank;
    return c;
}

inline double spectral_efficiency(double sinr, int pilot_length, int coherence_length) {
    if (pilot_length >= coherence_length)
        throw ConfigError("spectral_efficiency: pilot length must be below the coherence length");
    if (!(sinr >= 0.0))
        throw DomainError("spectral_efficiency: SINR must be non-negative");
    const double prelog = 1.0 - static_cast<double>(pilot_length) / coherence_length;
    return prelog * std::log2(1.0 + sinr);
}

// Sample moments for one BS, accumulated over realizations.
struct SinrMoments {
    std::vector<cdouble> gain_sum;       // sum_r w_lk^H g_lkl
    std::vector<double> gain_sq_sum;     // sum_r |w_lk^H g_lkl|^2
    std::vector<double> power_sum;       // sum_r sum_{i,j} |w_lk^H g_ijl|^2
    std::vector<double> wnorm_sum;       // sum_r ||w_lk||^2
    int count = 0;

    explicit SinrMoments(int n = 0)
        : gain_sum(static_cast<std::size_t>(n)), gain_sq_sum(static_cast<std::size_t>(n)),
          power_sum(static_cast<std::size_t>(n)), wnorm_sum(static_cast<std::size_t>(n)) {}

    void add(const CMatrix& w, const ChannelSet& channels, int bs) {
        const int N = static_cast<int>(gain_sum.size());
        for (int i = 0; i < channels.num_cells; ++i) {
            const CMatrix a = w.adjoint() * channels.at(i, bs).g;  // N x N
            for (int k = 0; k < N; ++k)
                power_sum[static_cast<std::size_t>(k)] += a.row(k).squaredNorm();
            if (i == bs) {
                for (int k = 0; k < N; ++k) {
                    gain_sum[static_cast<std::size_t>(k)] += a(k, k);
                    gain_sq_sum[static_cast<std::size_t>(k)] += std::norm(a(k, k));
                }
            }
        }
        for (int k = 0; k < N; ++k)
            wnorm_sum[static_cast<std::size_t>(k)] += w.col(k).squaredNorm();
        ++count;
    }

    // Use-and-then-forget SINR with the denominator clamped at 1e-12.
    double sinr(int k, double snr) const {
        const auto idx = static_cast<std::size_t>(k);
        const double t = count;
        const double mean_gain_sq = std::norm(gain_sum[idx] / t);
        double den = power_sum[idx] / t - mean_gain_sq + (wnorm_sum[idx] / t) / snr;
        if (!(den > 1e-12))
            den = 1e-12;
        return mean_gain_sq / den;
    }

    // Standard error of the sample mean of |w^H g| gain.
    double gain_stderr(int k) const {
        const auto idx = static_cast<std::size_t>(k);
        const double t = count;
        const double var = std::max(0.0, gain_sq_sum[idx] / t - std::norm(gain_sum[idx] / t));
        return std::sqrt(var / std::max(1.0, t - 1.0));
    }
};

struct SeReport {
    std::vector<std::vector<double>> sinr;         // [cell][user]
    std::vector<std::vector<double>> se;           // bits/s/Hz
    std::vector<std::vector<double>> gain_stderr;  // MC standard error of E[w^H g]
    std::vector<double> sum_se;                    // per cell
    int realizations = 0;
    int drops = 1;
};

// Runs the full pilot -> LOS subtraction -> LS -> ZF chain for one realization
// and returns the combiner of every BS.
struct RealizationOutput {
    ChannelSet channels;
    std::vector<Combiner> combiners;
    std::vector<LsEstimate> estimates;
};

inline RealizationOutput run_realization(const Scenario& sc, const PilotContext& ctx, std::uint64_t realization_seed) {
    RealizationOutput out;
    out.channels = assemble_channels(sc, realization_seed);
    Rng noise_rng = make_stream(realization_seed, {kTagNoise});
    const auto y = synthesize_rx(out.channels, ctx.lambdas, sc.cfg.noise_var(), noise_rng);
    const int L = sc.num_cells();
    for (int l = 0; l < L; ++l) {
        const CMatrix y_tilde = subtract_los(y[static_cast<std::size_t>(l)], l, ctx);
        LsEstimate ls = ls_estimate(y_tilde, ctx.lambdas[static_cast<std::size_t>(l)]);
        out.combiners.push_back(zf_combiner(combined_estimate(ls, l, ctx, L)));
        out.estimates.push_back(std::move(ls));
    }
    return out;
}

// Seed of realization r for a given fading seed. Realization seeds do not
// depend on the plan, so competing plans see identical channels and noise.
inline std::uint64_t realization_seed(std::uint64_t fading_seed, int r) {
    return derive_seed(fading_seed, {kTagFading, static_cast<std::uint64_t>(r)});
}

// Monte-Carlo estimate of the conditional SINR (fixed locations) of every user.
inline SeReport estimate_sinr(const Scenario& sc, const AllocationPlan& plan, int realizations,
                              std::uint64_t fading_seed) {
    if (realizations < 2)
        throw ConfigError("estimate_sinr: need at least 2 realizations");
    const int L = sc.num_cells();
    const int N = sc.users_per_cell();
    const PilotContext ctx = make_pilot_context(sc, plan);
    std::vector<SinrMoments> moments(static_cast<std::size_t>(L), SinrMoments(N));
    for (int r = 0; r < realizations; ++r) {
        const RealizationOutput out = run_realization(sc, ctx, realization_seed(fading_seed, r));
        for (int l = 0; l < L; ++l)
            moments[static_cast<std::size_t>(l)].add(out.combiners[static_cast<std::size_t>(l)].w, out.channels, l);
    }
    SeReport rep;
    rep.realizations = realizations;
    for (int l = 0; l < L; ++l) {
        const auto& mo = moments[static_cast<std::size_t>(l)];
        std::vector<double> sinr, se, err;
        double sum = 0.0;
        for (int k = 0; k < N; ++k) {
            const double s = mo.sinr(k, sc.cfg.snr);
            sinr.push_back(s);
            se.push_back(spectral_efficiency(s, sc.cfg.pilot_length, sc.cfg.coherence_length));
            err.push_back(mo.gain_stderr(k));
            sum += se.back();
        }
        rep.sinr.push_back(std::move(sinr));
        rep.se.push_back(std::move(se));
        rep.gain_stderr.push_back(std::move(err));
        rep.sum_se.push_back(sum);
    }
    return rep;
}

// Terms of w_lk^H y_l for one data symbol vector:
// mean signal + signal fluctuation + interference + noise.
struct DetectionTerms {
    cdouble mean_signal;
    cdouble fluctuation;
    cdouble interference;
    cdouble noise;

    cdouble total() const { return mean_signal + fluctuation + interference + noise; }
};

// `symbols[i][j]` is x_ij, `noise` is n_l (unit variance), `mean_gain` the
// value used for E[w_lk^H g_lkl].
inline DetectionTerms decompose_detection(const CVector& w, const ChannelSet& channels, int bs, int k,
                                          const std::vector<CVector>& symbols, const CVector& noise,
                                          cdouble mean_gain, double snr) {
    DetectionTerms t;
    const cdouble x = symbols[static_cast<std::size_t>(bs)](k);
    const cdouble gain = w.dot(channels.at(bs, bs).g.col(k));
    t.mean_signal = mean_gain * x;
    t.fluctuation = (gain - mean_gain) * x;
    t.interference = 0.0;
    for (int i = 0; i < channels.num_cells; ++i) {
        const CVector z = channels.at(i, bs).g.adjoint() * w;  // conj of w^H g_ij
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            if (i == bs && j == k)
                continue;
            t.interference += std::conj(z(j)) * symbols[static_cast<std::size_t>(i)](j);
        }
    }
    t.noise = w.dot(noise) / std::sqrt(snr);
    return t;
}

// Received data vector y_l = sum_i G_il x_i + n_l / sqrt(rho).
inline CVector received_data(const ChannelSet& channels, int bs, const std::vector<CVector>& symbols,
                             const CVector& noise, double snr) {
    CVector y = noise / std::sqrt(snr);
    for (int i = 0; i < channels.num_cells; ++i)
        y += channels.at(i, bs).g * symbols[static_cast<std::size_t>(i)];
    return y;
}

}  // namespace lapa
