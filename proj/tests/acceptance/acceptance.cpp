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
// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lapa/lapa.hpp"

using namespace lapa;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double brute_theta_sq(int m, double x) {
    cdouble acc = 0.0;
    for (int k = 0; k < m; ++k)
        acc += std::polar(1.0, -x * k);
    return std::norm(acc);
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

UserRecord record(double gain, double k, double aoa) {
    UserRecord u;
    BsLink l;
    l.distance = l.est_distance = 200.0;
    l.aoa = l.est_aoa = aoa;
    l.gain = l.est_gain = gain;
    l.k_factor = l.est_k_factor = k;
    l.los = k > 0.0;
    u.links.push_back(l);
    return u;
}

double explicit_delta(const UserRecord& interferer, const UserRecord& victim, int m) {
    auto vec = [m](const UserRecord& u) {
        const BsLink& l = u.serving();
        return CVector(std::sqrt(l.est_gain * l.est_k_factor / (1.0 + l.est_k_factor)) *
                       steering_vector(m, l.est_aoa, 0.5));
    };
    const CVector gi = vec(interferer), gv = vec(victim);
    return std::norm(gv.dot(gi)) / std::norm(gv.dot(gv));
}

Outcome c1_theta() {
    const auto t0 = Clock::now();
    Rng rng(101);
    std::uniform_int_distribution<int> md(1, 64);
    std::uniform_real_distribution<double> xd(-kTwoPi, kTwoPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int m = md(rng);
        double x = xd(rng);
        while (x == -kTwoPi)
            x = xd(rng);
        const double ref = brute_theta_sq(m, x);
        worst = std::max(worst, std::abs(theta_mag_sq(m, x) - ref) / std::max(ref, 1e-300));
    }
    double zero = 0.0;
    for (int m = 2; m <= 16; ++m)
        for (int b = 1; b < m; ++b)
            zero = std::max(zero, theta_mag_sq(m, kTwoPi * b / m));
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && zero <= 1e-18 && secs < 1.0,
            "max rel err " + fmt("%.3e", worst) + ", max |Theta|^2 on zero set " + fmt("%.3e", zero) + ", " +
                fmt("%.3f", secs) + " s"};
}

Outcome c2_delta_vs_explicit() {
    Rng rng(202);
    std::uniform_int_distribution<int> md(1, 128);
    std::uniform_real_distribution<double> gd(1e-3, 10.0), kd(0.1, 100.0), ad(0.0, kTwoPi);
    double worst = 0.0;
    bool self_ok = true;
    for (int i = 0; i < 1000; ++i) {
        const int m = md(rng);
        const UserRecord a = record(gd(rng), kd(rng), ad(rng));
        const UserRecord b = record(gd(rng), kd(rng), ad(rng));
        const double ref = explicit_delta(a, b, m);
        worst = std::max(worst, std::abs(los_interference(a, b, 0, m).value() - ref) / std::max(ref, 1e-300));
        self_ok = self_ok && los_interference(b, b, 0, m).value() == 1.0;
    }
    return {worst <= 1e-9 && self_ok, "max rel err " + fmt("%.3e", worst) + (self_ok ? ", self delta = 1" : ", self delta != 1")};
}

Outcome c3_decay() {
    // victim at AoA 0, interferer placed so that pi (sin a_i - sin a_v) = t
    const std::vector<double> mutual{0.3, 0.5, 1.0, 2.0, -0.7, 3.0};
    const UserRecord victim = record(0.8, 10.0, 0.0);
    bool bound_ok = true, tail_ok = true;
    double worst_tail = 0.0;
    for (double t : mutual) {
        const UserRecord intf = record(0.3, 10.0, std::asin(t / kPi));
        const double p1 = *los_part1(intf.serving(), victim.serving());
        for (int m = 4; m <= 512; ++m) {
            const double d = los_interference(intf, victim, 0, m).value();
            const double s = std::sin(0.5 * t);
            if (d > p1 / (double(m) * m * s * s) * (1.0 + 1e-12))
                bound_ok = false;
        }
        const double tail = los_interference(intf, victim, 0, 512).value() / p1;
        worst_tail = std::max(worst_tail, tail);
        tail_ok = tail_ok && tail < 1e-3;
    }
    bool equal_ok = true;
    for (double aoa : {0.2, 1.3, 2.9, 4.0}) {
        const UserRecord a = record(0.5, 3.0, aoa), b = record(0.9, 20.0, aoa);
        const double p1 = *los_part1(a.serving(), b.serving());
        for (int m = 4; m <= 512; ++m)
            equal_ok = equal_ok && los_interference(a, b, 0, m).value() == p1;
    }
    return {bound_ok && tail_ok && equal_ok,
            std::string(bound_ok ? "envelope holds" : "envelope violated") + ", max delta(512)/part1 " +
                fmt("%.3e", worst_tail) + (equal_ok ? ", equal-AoA delta = part1" : ", equal-AoA mismatch")};
}

NetworkConfig small(int L, int N, int M, int ell) {
    NetworkConfig c;
    c.num_cells = L;
    c.users_per_cell = N;
    c.num_antennas = M;
    c.pilot_length = ell;
    c.k_db = 10.0;
    return c;
}

Outcome c4_perfect_location() {
    const NetworkConfig cfg = small(2, 8, 32, 4);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Scenario sc = make_scenario(cfg, 400 + t);
        Rng rng(t);
        const AllocationPlan p = allocate_random(sc, rng);
        const PilotContext ctx = make_pilot_context(sc, p);
        const ChannelSet ch = assemble_channels(sc, 500 + t);
        const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
        for (int l = 0; l < 2; ++l)
            worst = std::max(worst, max_abs(subtract_los(y[static_cast<std::size_t>(l)], l, ctx) -
                                            nlos_synthesis(ch, ctx.lambdas, l)));
    }
    return {worst < 1e-9, "max abs dev " + fmt("%.3e", worst)};
}

Outcome c5_ls_exact() {
    const NetworkConfig cfg = small(1, 8, 32, 8);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Scenario sc = make_scenario(cfg, 600 + t);
        AllocationPlan p;
        p.cells = {{0, 1, 2, 3, 4, 5, 6, 7}};
        const PilotContext ctx = make_pilot_context(sc, p);
        const ChannelSet ch = assemble_channels(sc, 700 + t);
        Rng rng(t);
        const auto y = synthesize_rx(ch, ctx.lambdas, 0.0, rng);
        const LsEstimate est = ls_estimate(subtract_los(y[0], 0, ctx), ctx.lambdas[0]);
        worst = std::max(worst, max_abs(est.nlos - nlos_effective(ch.at(0, 0))));
    }
    return {worst < 1e-9, "max abs dev " + fmt("%.3e", worst)};
}

Outcome c6_zf_gain() {
    NetworkConfig cfg = small(1, 1, 32, 12);
    cfg.k_db = 120.0;
    const Scenario sc = scenario_from_polar(cfg, {{{cfg.cell_radius, 0.7}}});
    AllocationPlan p;
    p.cells = {{0}};
    const SeReport rep = estimate_sinr(sc, p, 500, 77);
    const double alpha = sc.user(0, 0).serving().gain;
    const double expect = cfg.snr * alpha * cfg.num_antennas;
    const double ratio = rep.sinr[0][0] / expect;
    return {std::abs(ratio - 1.0) <= 0.10,
            "sinr " + fmt("%.4g", rep.sinr[0][0]) + " vs rho*alpha*M " + fmt("%.4g", expect) + " (ratio " +
                fmt("%.4f", ratio) + ")"};
}

ExperimentSpec desk_spec() {
    ExperimentSpec s;
    s.id = "desk";
    s.base = small(2, 12, 64, 4);
    s.allocators = {AllocatorKind::proposed, AllocatorKind::random};
    s.drops = 200;
    s.trials = 100;
    s.seed = 2024;
    s.bootstrap_resamples = 1000;
    return s;
}

Outcome c7_ordering() {
    const auto t0 = Clock::now();
    const ExperimentResult r = run_sum_se_sweep(desk_spec());
    const auto prop = r.drop_sums(0, 0), rnd = r.drop_sums(0, 1);
    const auto t = stats::paired_t_greater(prop, rnd);
    const double secs = seconds_since(t0);
    const double mp = stats::mean(prop), mr = stats::mean(rnd);
    return {mp > mr && t.p_value < 0.05 && secs < 600.0,
            "proposed " + fmt("%.4f", mp) + " vs random " + fmt("%.4f", mr) + " bits/s/Hz, t " +
                fmt("%.3f", t.statistic) + ", p " + fmt("%.3e", t.p_value) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome c8_oracle() {
    ExperimentSpec s;
    s.base = small(1, 4, 32, 2);
    s.drops = 100;
    s.trials = 100;
    s.seed = 8;
    const OracleReport r = run_oracle_compare(s);
    return {r.mean >= 0.60 && r.mean <= 1.00,
            "mean ratio " + fmt("%.4f", r.mean) + " (min " + fmt("%.4f", r.min) + ", max " + fmt("%.4f", r.max) +
                ", " + std::to_string(r.evaluated_per_drop) + " plans per drop)"};
}

Outcome c9_locerr() {
    ExperimentSpec s = desk_spec();
    s.base.k_model = KModel::distance;
    s.base.los_model = LosModel::linear_prob;
    s.sweep = {"sigma2_error", {0.0, 3.0, 15.0}};
    const ExperimentResult r = run_locerr_sweep(s);
    const auto p0 = r.drop_sums(0, 0), p15 = r.drop_sums(2, 0);
    const auto p3 = r.drop_sums(1, 0), r3 = r.drop_sums(1, 1);
    const auto down = stats::paired_t_greater(p0, p15);
    const auto gap = stats::paired_t_greater(p3, r3);
    const bool ok = stats::mean(p0) > stats::mean(p15) && down.p_value < 0.05 && stats::mean(p3) > stats::mean(r3) &&
                    gap.p_value < 0.05;
    return {ok, "proposed " + fmt("%.4f", stats::mean(p0)) + " -> " + fmt("%.4f", stats::mean(p15)) + " (p " +
                    fmt("%.3e", down.p_value) + "); at sigma2=3 proposed " + fmt("%.4f", stats::mean(p3)) +
                    " vs random " + fmt("%.4f", stats::mean(r3)) + " (p " + fmt("%.3e", gap.p_value) + ")"};
}

Outcome c10_worst_cdf() {
    const auto series = run_worst_user_cdf(desk_spec());
    const auto ks = stats::ks_greater(series[0].samples, series[1].samples);
    return {ks.p_value < 0.05, "worst-5 mean proposed " + fmt("%.4f", stats::mean(series[0].samples)) + " vs random " +
                                   fmt("%.4f", stats::mean(series[1].samples)) + ", D+ " + fmt("%.3f", ks.statistic) +
                                   ", p " + fmt("%.3e", ks.p_value)};
}

Outcome c11_determinism() {
    ExperimentSpec s;
    s.id = "det";
    s.base = small(2, 6, 16, 3);
    s.sweep = {"M", {8, 16}};
    s.allocators = {AllocatorKind::proposed, AllocatorKind::random, AllocatorKind::greedy, AllocatorKind::sector};
    s.drops = 16;
    s.trials = 10;
    s.seed = 11;
    s.record_timing = false;
    auto csv = [](const ExperimentResult& r) {
        std::ostringstream os;
        write_rows_csv(os, r.rows);
        return os.str();
    };
    const ExperimentResult a = run_experiment(s);
    const bool same = csv(a) == csv(run_experiment(s));
    s.threads = 8;
    const ExperimentResult b = run_experiment(s);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        worst = std::max(worst, std::abs(a.rows[i].sum_se - b.rows[i].sum_se) / std::max(std::abs(a.rows[i].sum_se), 1e-300));
    return {same && worst <= 1e-6,
            std::string(same ? "repeat CSV identical" : "repeat CSV differs") + ", 1 vs 8 threads max rel diff " +
                fmt("%.3e", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 theta closed form", c1_theta},
        {"2 delta vs explicit steering vectors", c2_delta_vs_explicit},
        {"3 delta decay in M", c3_decay},
        {"4 LOS subtraction exact", c4_perfect_location},
        {"5 LS exactness", c5_ls_exact},
        {"6 ZF array gain", c6_zf_gain},
        {"7 proposed beats random", c7_ordering},
        {"8 oracle ratio", c8_oracle},
        {"9 localization error", c9_locerr},
        {"10 worst-user CDF", c10_worst_cdf},
        {"11 determinism", c11_determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
