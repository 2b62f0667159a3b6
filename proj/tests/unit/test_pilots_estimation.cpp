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
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "lapa/lapa.hpp"

using namespace lapa;

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

AllocationPlan plan_of(std::vector<std::vector<int>> cells) {
    AllocationPlan p;
    p.cells = std::move(cells);
    return p;
}

NetworkConfig small(int L, int N, int M, int ell) {
    NetworkConfig c;
    c.num_cells = L;
    c.users_per_cell = N;
    c.num_antennas = M;
    c.pilot_length = ell;
    c.k_db = 5.0;
    return c;
}

ChannelSet zero_channels(int L, int N, int M) {
    ChannelSet s;
    s.num_cells = L;
    s.num_antennas = M;
    s.users_per_cell = N;
    s.blocks.resize(static_cast<std::size_t>(L * L));
    for (auto& b : s.blocks) {
        b.g = CMatrix::Zero(M, N);
        b.nlos = CMatrix::Zero(M, N);
        b.los_dirs = CMatrix::Zero(M, N);
        b.k = RVector::Zero(N);
        b.gain = RVector::Zero(N);
    }
    return s;
}

}  // namespace

TEST(PilotBook, LengthOne) {
    const PilotBook b = build_pilot_book(1);
    ASSERT_EQ(b.sequences.rows(), 1);
    EXPECT_EQ(b.sequences(0, 0), cdouble(1.0, 0.0));
}

TEST(PilotBook, LengthTwoIsExact) {
    const PilotBook b = build_pilot_book(2);
    EXPECT_EQ(b.sequences(0, 0), cdouble(1.0, 0.0));
    EXPECT_EQ(b.sequences(0, 1), cdouble(1.0, 0.0));
    EXPECT_EQ(b.sequences(1, 0), cdouble(1.0, 0.0));
    EXPECT_EQ(b.sequences(1, 1), cdouble(-1.0, 0.0));
    EXPECT_EQ(b.sequences.row(0).dot(b.sequences.row(1)), cdouble(0.0, 0.0));
}

TEST(PilotBook, OrthogonalUpTo64) {
    for (int ell = 1; ell <= 64; ++ell) {
        const PilotBook b = build_pilot_book(ell);
        const CMatrix gram = b.sequences * b.sequences.adjoint();
        EXPECT_LT(max_abs(gram - ell * CMatrix::Identity(ell, ell)), 1e-10) << "ell=" << ell;
        for (Eigen::Index i = 0; i < b.sequences.size(); ++i)
            ASSERT_NEAR(std::abs(b.sequences.data()[i]), 1.0, 1e-14);
    }
}

TEST(PilotBook, RejectsZeroLength) { EXPECT_THROW(build_pilot_book(0), ConfigError); }

TEST(PilotMatrix, IdentityPlanGivesBook) {
    const PilotBook b = build_pilot_book(5);
    const CMatrix lam = pilot_matrix(plan_of({{0, 1, 2, 3, 4}}), 0, b);
    EXPECT_EQ(max_abs(lam - b.sequences), 0.0);
}

TEST(PilotMatrix, ReuseRowsRepeat) {
    const PilotBook b = build_pilot_book(2);
    const CMatrix lam = pilot_matrix(plan_of({{0, 0, 1, 1}}), 0, b);
    EXPECT_EQ(max_abs(lam.row(0) - lam.row(1)), 0.0);
    EXPECT_EQ(max_abs(lam.row(2) - lam.row(3)), 0.0);
    EXPECT_GT(max_abs(lam.row(0) - lam.row(2)), 0.0);
}

TEST(PilotMatrix, OutOfRangeIsStructuralError) {
    const PilotBook b = build_pilot_book(3);
    EXPECT_THROW(pilot_matrix(plan_of({{0, 3}}), 0, b), StructuralError);
    EXPECT_THROW(pilot_matrix(plan_of({{0, -1}}), 0, b), StructuralError);
    EXPECT_THROW(pilot_matrix(plan_of({{0, 1}}), 1, b), StructuralError);
}

TEST(Correlation, CollisionIndicator) {
    Rng rng(3);
    const int ell = 7, N = 20;
    const PilotBook b = build_pilot_book(ell);
    std::uniform_int_distribution<int> pick(0, ell - 1);
    AllocationPlan p;
    p.cells.assign(2, std::vector<int>(N));
    for (auto& c : p.cells)
        for (int& v : c)
            v = pick(rng);
    const CMatrix l0 = pilot_matrix(p, 0, b), l1 = pilot_matrix(p, 1, b);
    const CMatrix r00 = correlation(l0, l0), r01 = correlation(l0, l1), r10 = correlation(l1, l0);
    for (int a = 0; a < N; ++a)
        for (int c = 0; c < N; ++c) {
            EXPECT_NEAR(std::abs(r00(a, c) - (p.cells[0][a] == p.cells[0][c] ? double(ell) : 0.0)), 0.0, 1e-10);
            EXPECT_NEAR(std::abs(r01(a, c) - (p.cells[0][a] == p.cells[1][c] ? double(ell) : 0.0)), 0.0, 1e-10);
        }
    EXPECT_LT(max_abs(r01 - r10.adjoint()), 1e-12);
}

TEST(Correlation, OrthogonalPlanIsScaledIdentity) {
    const PilotBook b = build_pilot_book(6);
    const CMatrix l = pilot_matrix(plan_of({{3, 1, 0, 5, 2, 4}}), 0, b);
    EXPECT_LT(max_abs(correlation(l, l) - 6.0 * CMatrix::Identity(6, 6)), 1e-10);
}

TEST(Correlation, BalancedReuseCount) {
    const NetworkConfig cfg = small(1, 36, 8, 12);
    const Scenario sc = make_scenario(cfg, 1);
    Rng rng(2);
    const AllocationPlan plan = allocate_random(sc, rng);
    const PilotBook b = build_pilot_book(12);
    const CMatrix l = pilot_matrix(plan, 0, b);
    const CMatrix r = correlation(l, l);
    for (int a = 0; a < 36; ++a) {
        int hits = 0;
        for (int c = 0; c < 36; ++c)
            hits += std::abs(r(a, c) - 12.0) < 1e-9 ? 1 : 0;
        EXPECT_EQ(hits, 3);
    }
}

TEST(Correlation, IdenticalPlansGiveSameMatrix) {
    const PilotBook b = build_pilot_book(3);
    const AllocationPlan p = plan_of({{0, 2, 1, 0}, {0, 2, 1, 0}});
    const CMatrix l0 = pilot_matrix(p, 0, b), l1 = pilot_matrix(p, 1, b);
    EXPECT_EQ(max_abs(correlation(l1, l0) - correlation(l0, l0)), 0.0);
}

TEST(Correlation, ShapeMismatch) {
    EXPECT_THROW(correlation(CMatrix::Zero(2, 3), CMatrix::Zero(2, 4)), StructuralError);
}

TEST(Plan, Balance) {
    EXPECT_TRUE(is_balanced(plan_of({{0, 1, 2, 0, 1}}), 3));
    EXPECT_FALSE(is_balanced(plan_of({{0, 0, 0, 1, 2}}), 3));
    EXPECT_FALSE(is_balanced(plan_of({{0, 5}}), 3));
    EXPECT_TRUE(is_balanced(plan_of({{1}}), 3));
}

TEST(Plan, ValidateShape) {
    EXPECT_THROW(validate_plan(plan_of({{0, 1}}), 2, 2, 2), StructuralError);
    EXPECT_THROW(validate_plan(plan_of({{0, 1, 1}}), 1, 2, 2), StructuralError);
    EXPECT_THROW(validate_plan(plan_of({{0, 2}}), 1, 2, 2), StructuralError);
    EXPECT_NO_THROW(validate_plan(plan_of({{0, 1}}), 1, 2, 2));
}

TEST(Plan, JsonRoundTrip) {
    AllocationPlan p = plan_of({{0, 1, 1}, {2, 0, 1}});
    p.allocator = "proposed";
    const nlohmann::json j = plan_to_json(p);
    EXPECT_EQ(j.at("allocator"), "proposed");
    EXPECT_EQ(j.at("cells")[1][0], 2);
    const AllocationPlan back = plan_from_json(j);
    EXPECT_EQ(back, p);
    EXPECT_EQ(back.allocator, "proposed");
    EXPECT_THROW(plan_from_json(nlohmann::json{{"allocator", "x"}}), ConfigError);
}

TEST(Synthesis, SingleUserRankOne) {
    const NetworkConfig cfg = small(1, 1, 6, 4);
    const Scenario sc = make_scenario(cfg, 3);
    const AllocationPlan p = plan_of({{2}});
    const ChannelSet ch = assemble_channels(sc, 4);
    const PilotBook b = build_pilot_book(4);
    Rng rng(5);
    const auto y = synthesize_rx(ch, p, b, 0.0, rng);
    const CMatrix expect = ch.at(0, 0).g.col(0) * b.sequences.row(2);
    EXPECT_LT(max_abs(y[0] - expect), 1e-14);
}

TEST(Synthesis, NoiseOnlyCalibration) {
    const int M = 200, ell = 50;
    const ChannelSet ch = zero_channels(1, 1, M);
    const PilotBook b = build_pilot_book(ell);
    Rng rng(6);
    const double var = 0.1;
    const auto y = synthesize_rx(ch, plan_of({{0}}), b, var, rng);
    const double emp = y[0].squaredNorm() / static_cast<double>(M * ell);
    EXPECT_NEAR(emp / var, 1.0, 0.03);
    // real and imaginary parts each carry half
    double re = 0.0;
    for (Eigen::Index i = 0; i < y[0].size(); ++i)
        re += std::norm(y[0].data()[i].real());
    EXPECT_NEAR(re / static_cast<double>(M * ell) / var, 0.5, 0.03);
}

TEST(Synthesis, LinearAcrossCells) {
    const NetworkConfig cfg = small(2, 4, 8, 2);
    const Scenario sc = make_scenario(cfg, 7);
    const AllocationPlan p = plan_of({{0, 1, 0, 1}, {1, 1, 0, 0}});
    const ChannelSet ch = assemble_channels(sc, 8);
    const PilotBook b = build_pilot_book(2);
    std::vector<CMatrix> lam{pilot_matrix(p, 0, b), pilot_matrix(p, 1, b)};
    std::vector<CMatrix> only0{lam[0], CMatrix::Zero(4, 2)}, only1{CMatrix::Zero(4, 2), lam[1]};
    Rng r1(9), r2(9), r3(9);
    const auto full = synthesize_rx(ch, lam, 0.1, r1);
    const auto a = synthesize_rx(ch, only0, 0.1, r2);
    const auto c = synthesize_rx(ch, only1, 0.0, r3);
    for (int l = 0; l < 2; ++l)
        EXPECT_LT(max_abs(full[static_cast<std::size_t>(l)] - a[static_cast<std::size_t>(l)] -
                          c[static_cast<std::size_t>(l)]),
                  1e-12);
}

TEST(LosSubtraction, PerfectLocationLeavesNlosOnly) {
    const NetworkConfig cfg = small(2, 8, 32, 4);
    for (int t = 0; t < 5; ++t) {
        const Scenario sc = make_scenario(cfg, 100 + t);
        Rng rng(t);
        const AllocationPlan p = allocate_random(sc, rng);
        const PilotContext ctx = make_pilot_context(sc, p);
        const ChannelSet ch = assemble_channels(sc, 200 + t);
        const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
        for (int l = 0; l < 2; ++l)
            EXPECT_LT(max_abs(subtract_los(y[static_cast<std::size_t>(l)], l, ctx) - nlos_synthesis(ch, ctx.lambdas, l)),
                      1e-9);
    }
}

TEST(LosSubtraction, ZeroKIsNoOp) {
    NetworkConfig cfg = small(2, 4, 8, 2);
    cfg.k_db = -1e9;
    const Scenario sc = make_scenario(cfg, 3);
    Rng rng(1);
    const AllocationPlan p = allocate_random(sc, rng);
    const PilotContext ctx = make_pilot_context(sc, p);
    const ChannelSet ch = assemble_channels(sc, 4);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.1, rng);
    for (int l = 0; l < 2; ++l)
        EXPECT_EQ(max_abs(subtract_los(y[static_cast<std::size_t>(l)], l, sc, p) - y[static_cast<std::size_t>(l)]),
                  0.0);
}

TEST(LosSubtraction, ResidualMatchesLocalizationTerm) {
    NetworkConfig cfg = small(2, 6, 16, 3);
    cfg.localization_error_var = 5.0;
    const Scenario sc = make_scenario(cfg, 11);
    Rng rng(2);
    const AllocationPlan p = allocate_random(sc, rng);
    const PilotContext ctx = make_pilot_context(sc, p);
    const ChannelSet ch = assemble_channels(sc, 12);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
    for (int l = 0; l < 2; ++l) {
        const CMatrix resid = subtract_los(y[static_cast<std::size_t>(l)], l, ctx) - nlos_synthesis(ch, ctx.lambdas, l);
        CMatrix xi = CMatrix::Zero(16, 3);
        for (int i = 0; i < 2; ++i)
            xi += los_residual(sc, i, l, ctx.lambdas[static_cast<std::size_t>(i)]);
        EXPECT_LT(max_abs(resid - xi), 1e-9);
        EXPECT_GT(xi.norm(), 0.0);
        EXPECT_NEAR(resid.norm(), xi.norm(), 1e-9);
    }
}

TEST(LosSubtraction, ResidualShrinksWithErrorVariance) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s2 : {1.0, 0.1, 0.01}) {
        NetworkConfig cfg = small(2, 6, 16, 3);
        cfg.localization_error_var = s2;
        const Scenario sc = make_scenario(cfg, 21);
        const AllocationPlan p = plan_of({{0, 1, 2, 0, 1, 2}, {2, 1, 0, 2, 1, 0}});
        const PilotBook b = build_pilot_book(3);
        double norm = 0.0;
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i)
                norm += los_residual(sc, i, l, pilot_matrix(p, i, b)).norm();
        EXPECT_LT(norm, prev);
        EXPECT_GT(norm, 0.0);
        prev = norm;
    }
}

TEST(LsEstimate, ExactForOrthogonalSingleCell) {
    const NetworkConfig cfg = small(1, 8, 16, 8);
    const Scenario sc = make_scenario(cfg, 5);
    const PilotContext ctx = make_pilot_context(sc, plan_of({{0, 1, 2, 3, 4, 5, 6, 7}}));
    const ChannelSet ch = assemble_channels(sc, 6);
    Rng rng(7);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
    const LsEstimate est = ls_estimate(subtract_los(y[0], 0, ctx), ctx.lambdas[0]);
    EXPECT_LT(max_abs(est.nlos - nlos_effective(ch.at(0, 0))), 1e-9);
}

TEST(LsEstimate, SharedPilotGivesIdenticalColumns) {
    const NetworkConfig cfg = small(1, 3, 12, 2);
    const Scenario sc = make_scenario(cfg, 8);
    const PilotContext ctx = make_pilot_context(sc, plan_of({{0, 1, 0}}));
    const ChannelSet ch = assemble_channels(sc, 9);
    Rng rng(10);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
    const LsEstimate est = ls_estimate(subtract_los(y[0], 0, ctx), ctx.lambdas[0]);
    EXPECT_LT(max_abs(est.nlos.col(0) - est.nlos.col(2)), 1e-12);
    const CMatrix eff = nlos_effective(ch.at(0, 0));
    EXPECT_LT(max_abs(est.nlos.col(0) - eff.col(0) - eff.col(2)), 1e-9);
}

TEST(LsEstimate, CrossCellCopilotSum) {
    const NetworkConfig cfg = small(2, 4, 10, 2);
    const Scenario sc = make_scenario(cfg, 12);
    const AllocationPlan p = plan_of({{0, 1, 1, 0}, {0, 1, 1, 0}});
    const PilotContext ctx = make_pilot_context(sc, p);
    const ChannelSet ch = assemble_channels(sc, 13);
    Rng rng(14);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
    for (int l = 0; l < 2; ++l) {
        const LsEstimate est =
            ls_estimate(subtract_los(y[static_cast<std::size_t>(l)], l, ctx), ctx.lambdas[static_cast<std::size_t>(l)]);
        for (int k = 0; k < 4; ++k) {
            CVector expect = CVector::Zero(10);
            for (int i = 0; i < 2; ++i) {
                const CMatrix eff = nlos_effective(ch.at(i, l));
                for (int j = 0; j < 4; ++j)
                    if (p.pilot(i, j) == p.pilot(l, k))
                        expect += eff.col(j);
            }
            EXPECT_LT((est.nlos.col(k) - expect).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(LsEstimate, Linear) {
    Rng rng(15);
    CMatrix y1(6, 3), y2(6, 3);
    for (Eigen::Index i = 0; i < y1.size(); ++i) {
        y1.data()[i] = complex_normal(rng);
        y2.data()[i] = complex_normal(rng);
    }
    const CMatrix lam = pilot_matrix(plan_of({{0, 2, 1, 1}}), 0, build_pilot_book(3));
    const cdouble a(0.3, -1.2), b(2.0, 0.5);
    const CMatrix lhs = ls_estimate(a * y1 + b * y2, lam).nlos;
    const CMatrix rhs = a * ls_estimate(y1, lam).nlos + b * ls_estimate(y2, lam).nlos;
    EXPECT_LT(max_abs(lhs - rhs), 1e-12);
    EXPECT_THROW(ls_estimate(y1, CMatrix::Zero(4, 2)), StructuralError);
}

TEST(LsEstimate, ContaminationOnlyFromCopilotUsers) {
    const NetworkConfig cfg = small(2, 6, 12, 3);
    const Scenario sc = make_scenario(cfg, 16);
    Rng prng(17);
    const AllocationPlan p = allocate_random(sc, prng);
    const PilotContext ctx = make_pilot_context(sc, p);
    const ChannelSet ch = assemble_channels(sc, 18);
    const int l = 0, k = 2;
    ChannelSet masked = ch;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 6; ++j)
            if (p.pilot(i, j) != p.pilot(l, k))
                masked.at(i, l).g.col(j).setZero();
    Rng r1(19), r2(19);
    const auto y = synthesize_rx(ch, ctx.lambdas, 0.1, r1);
    const auto ym = synthesize_rx(masked, ctx.lambdas, 0.1, r2);
    const CVector a = ls_estimate(y[0], ctx.lambdas[0]).nlos.col(k);
    const CVector b = ls_estimate(ym[0], ctx.lambdas[0]).nlos.col(k);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}
