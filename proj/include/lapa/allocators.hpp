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
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "lapa/core.hpp"
#include "lapa/los_metric.hpp"
#include "lapa/model.hpp"
#include "lapa/pilots.hpp"

namespace lapa {

// Users of one cell grouped by estimated distance: tiers 1..n-1 hold ell users,
// tier n holds the remaining N - (n-1) ell.
struct TierPartition {
    std::vector<std::vector<int>> tiers;  // user indices, ascending d-hat

    int count() const { return static_cast<int>(tiers.size()); }
};

// Sort key (d-hat, theta-hat, index): the index only matters for exact location ties.
inline TierPartition partition_tiers(const CellUsers& users, int pilot_length) {
    if (pilot_length < 1)
        throw ConfigError("partition_tiers: pilot length must be >= 1");
    std::vector<int> order(users.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ua = users[static_cast<std::size_t>(a)];
        const auto& ub = users[static_cast<std::size_t>(b)];
        return std::make_tuple(ua.est_distance(), ua.est_aoa(), a) <
               std::make_tuple(ub.est_distance(), ub.est_aoa(), b);
    });
    TierPartition out;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(pilot_length)) {
        const auto stop = std::min(order.size(), start + static_cast<std::size_t>(pilot_length));
        out.tiers.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                               order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return out;
}

namespace detail {

inline AllocationPlan empty_plan(const Scenario& sc, const std::string& name) {
    AllocationPlan plan;
    plan.allocator = name;
    plan.cells.assign(static_cast<std::size_t>(sc.num_cells()),
                      std::vector<int>(static_cast<std::size_t>(sc.users_per_cell()), -1));
    return plan;
}

}  // namespace detail

// Mean LOS interference that co-pilot users already holding `pilot` would
// cause to `victim` at its serving BS. Returns 0 when nobody holds the pilot.
inline double mean_copilot_interference(const Scenario& sc, const AllocationPlan& plan, const UserRecord& victim,
                                        int pilot, int last_cell) {
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i <= last_cell; ++i) {
        for (int j = 0; j < sc.users_per_cell(); ++j) {
            if (plan.pilot(i, j) != pilot || (i == victim.cell && j == victim.index))
                continue;
            sum += los_interference(sc.user(i, j), victim, victim.cell, sc.cfg.num_antennas,
                                    sc.cfg.antenna_spacing_ratio)
                       .value();
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / n;
}

// Location-aware allocation. Cells in index order (cell 0 is the center
// cell). Per cell: tier 1 gets pilots 0..ell-1 in ascending d-hat; users of
// later tiers, in ascending d-hat, take the still-unused pilot of their tier
// with the lowest mean LOS interference from the users already holding it
// (same cell and previously allocated cells). Ties go to the lower pilot.
inline AllocationPlan allocate_proposed(const Scenario& sc) {
    const int ell = sc.cfg.pilot_length;
    AllocationPlan plan = detail::empty_plan(sc, "proposed");
    for (int c = 0; c < sc.num_cells(); ++c) {
        const auto& cell_users = sc.users[static_cast<std::size_t>(c)];
        const TierPartition tp = partition_tiers(cell_users, ell);
        auto& s = plan.cells[static_cast<std::size_t>(c)];
        for (std::size_t r = 0; r < tp.tiers.front().size(); ++r)
            s[static_cast<std::size_t>(tp.tiers.front()[r])] = static_cast<int>(r);
        for (int t = 1; t < tp.count(); ++t) {
            std::vector<bool> used(static_cast<std::size_t>(ell), false);
            for (int k : tp.tiers[static_cast<std::size_t>(t)]) {
                const UserRecord& victim = cell_users[static_cast<std::size_t>(k)];
                int best = -1;
                double best_score = std::numeric_limits<double>::infinity();
                for (int p = 0; p < ell; ++p) {
                    if (used[static_cast<std::size_t>(p)])
                        continue;
                    const double score = mean_copilot_interference(sc, plan, victim, p, c);
                    if (score < best_score) {
                        best_score = score;
                        best = p;
                    }
                }
                s[static_cast<std::size_t>(k)] = best;
                used[static_cast<std::size_t>(best)] = true;
            }
        }
    }
    return plan;
}

// Sum over users of the mean LOS interference from their co-pilot users in
// the same cell and in lower-indexed cells; the quantity the proposed
// allocator greedily minimizes.
inline double proposed_objective(const Scenario& sc, const AllocationPlan& plan) {
    double total = 0.0;
    for (int c = 0; c < sc.num_cells(); ++c) {
        const auto& cell_users = sc.users[static_cast<std::size_t>(c)];
        const TierPartition tp = partition_tiers(cell_users, sc.cfg.pilot_length);
        // Only users outside tier 1 are scored; tier-1 users of cell c face
        // no earlier same-cell co-pilot users by construction.
        for (int t = 1; t < tp.count(); ++t) {
            for (int k : tp.tiers[static_cast<std::size_t>(t)]) {
                AllocationPlan masked = plan;
                // Hide same-cell users of this and later tiers.
                for (int t2 = t; t2 < tp.count(); ++t2)
                    for (int k2 : tp.tiers[static_cast<std::size_t>(t2)])
                        masked.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k2)] = -1;
                total += mean_copilot_interference(sc, masked, cell_users[static_cast<std::size_t>(k)],
                                                   plan.pilot(c, k), c);
            }
        }
    }
    return total;
}

// Uniformly random balanced assignment per cell.
inline AllocationPlan allocate_random(const Scenario& sc, Rng& rng) {
    const int ell = sc.cfg.pilot_length;
    const int N = sc.users_per_cell();
    AllocationPlan plan = detail::empty_plan(sc, "random");
    auto shuffle = [&rng](std::vector<int>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(v[i - 1], v[pick(rng)]);
        }
    };
    for (auto& cell : plan.cells) {
        // floor(N/ell) full copies plus N mod ell distinct leftover pilots
        std::vector<int> extra(static_cast<std::size_t>(ell));
        std::iota(extra.begin(), extra.end(), 0);
        shuffle(extra);
        std::vector<int> pool;
        pool.reserve(static_cast<std::size_t>(N));
        for (int r = 0; r < N / ell; ++r)
            for (int p = 0; p < ell; ++p)
                pool.push_back(p);
        pool.insert(pool.end(), extra.begin(), extra.begin() + N % ell);
        shuffle(pool);
        cell = std::move(pool);
    }
    return plan;
}

// ell equal angular sectors; sector floor(theta-hat / (2*pi/ell)) uses that pilot.
inline int sector_of(double aoa, int pilot_length) {
    const double width = kTwoPi / pilot_length;
    const int s = static_cast<int>(std::floor(wrap_angle(aoa) / width));
    return std::clamp(s, 0, pilot_length - 1);
}

inline AllocationPlan allocate_sector(const Scenario& sc) {
    AllocationPlan plan = detail::empty_plan(sc, "sector");
    for (int c = 0; c < sc.num_cells(); ++c)
        for (int k = 0; k < sc.users_per_cell(); ++k)
            plan.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
                sector_of(sc.user(c, k).est_aoa(), sc.cfg.pilot_length);
    return plan;
}

// Large-scale interference proxy of user (l, k): sum over co-pilot users of
// alpha-hat_ijl / alpha-hat_lkl + delta_ij^lk.
inline double greedy_proxy(const Scenario& sc, const AllocationPlan& plan, int l, int k) {
    const UserRecord& victim = sc.user(l, k);
    const int p = plan.pilot(l, k);
    const double own = victim.links[static_cast<std::size_t>(l)].est_gain;
    double total = 0.0;
    for (int i = 0; i < sc.num_cells(); ++i) {
        for (int j = 0; j < sc.users_per_cell(); ++j) {
            if ((i == l && j == k) || plan.pilot(i, j) != p)
                continue;
            const UserRecord& u = sc.user(i, j);
            total += u.links[static_cast<std::size_t>(l)].est_gain / own;
            total += los_interference(u, victim, l, sc.cfg.num_antennas, sc.cfg.antenna_spacing_ratio).value();
        }
    }
    return total;
}

struct GreedyTrace {
    std::vector<double> max_proxy;  // network-wide worst proxy before each iteration and at exit
    int iterations = 0;             // reassignment attempts
    int accepted = 0;
};

// Starts from a random balanced plan; each iteration takes the user with the
// largest proxy and moves it to the pilot that minimizes its own proxy,
// swapping with a same-cell holder of that pilot when a plain move would
// break balance. A move is kept only if the network-wide worst proxy strictly
// drops; otherwise the search stops.
inline AllocationPlan allocate_greedy(const Scenario& sc, int max_iters, Rng& rng, GreedyTrace* trace = nullptr) {
    if (max_iters < 1)
        throw ConfigError("allocate_greedy: max_iters must be >= 1");
    const int ell = sc.cfg.pilot_length;
    const int L = sc.num_cells();
    const int N = sc.users_per_cell();
    AllocationPlan plan = allocate_random(sc, rng);
    plan.allocator = "greedy";

    auto worst = [&](const AllocationPlan& p) {
        double best = -1.0;
        int wl = 0, wk = 0;
        for (int l = 0; l < L; ++l)
            for (int k = 0; k < N; ++k) {
                const double v = greedy_proxy(sc, p, l, k);
                if (v > best) {
                    best = v;
                    wl = l;
                    wk = k;
                }
            }
        return std::make_tuple(best, wl, wk);
    };

    GreedyTrace local;
    GreedyTrace& tr = trace ? *trace : local;
    auto [current, wl, wk] = worst(plan);
    tr.max_proxy.push_back(current);
    for (int it = 0; it < max_iters; ++it) {
        ++tr.iterations;
        auto& cell = plan.cells[static_cast<std::size_t>(wl)];
        const int own = cell[static_cast<std::size_t>(wk)];
        std::vector<int> count(static_cast<std::size_t>(ell), 0);
        for (int p : cell)
            ++count[static_cast<std::size_t>(p)];
        const int lo = N / ell;
        const int hi = (N + ell - 1) / ell;

        std::optional<AllocationPlan> best_plan;
        double best_own = std::numeric_limits<double>::infinity();
        for (int p = 0; p < ell; ++p) {
            if (p == own)
                continue;
            // Plain move if balance survives it.
            if (count[static_cast<std::size_t>(own)] - 1 >= lo && count[static_cast<std::size_t>(p)] + 1 <= hi) {
                AllocationPlan trial = plan;
                trial.cells[static_cast<std::size_t>(wl)][static_cast<std::size_t>(wk)] = p;
                const double v = greedy_proxy(sc, trial, wl, wk);
                if (v < best_own) {
                    best_own = v;
                    best_plan = std::move(trial);
                }
            }
            for (int partner = 0; partner < N; ++partner) {
                if (cell[static_cast<std::size_t>(partner)] != p)
                    continue;
                AllocationPlan trial = plan;
                trial.cells[static_cast<std::size_t>(wl)][static_cast<std::size_t>(wk)] = p;
                trial.cells[static_cast<std::size_t>(wl)][static_cast<std::size_t>(partner)] = own;
                const double v = greedy_proxy(sc, trial, wl, wk);
                if (v < best_own) {
                    best_own = v;
                    best_plan = std::move(trial);
                }
            }
        }
        if (!best_plan)
            break;
        const auto [next, nl, nk] = worst(*best_plan);
        if (!(next < current))
            break;
        plan = std::move(*best_plan);
        ++tr.accepted;
        current = next;
        wl = nl;
        wk = nk;
        tr.max_proxy.push_back(current);
    }
    return plan;
}

// Thrown when the exhaustive space exceeds the guard.
class SearchSpaceTooLarge : public ConfigError {
  public:
    explicit SearchSpaceTooLarge(double cardinality)
        : ConfigError("exhaustive search space too large: " + std::to_string(cardinality) + " plans"),
          cardinality_(cardinality) {}
    double cardinality() const { return cardinality_; }

  private:
    double cardinality_;
};

struct ExhaustiveResult {
    AllocationPlan plan;
    double score = -std::numeric_limits<double>::infinity();
    long long evaluated = 0;
    double space_size = 0.0;    // ell^(N L)
    double naive_count = 0.0;  // L * N^ell, logged for comparison
};

struct ExhaustiveOptions {
    bool balanced_only = false;
    double max_space = 1e6;
};

using PlanEvaluator = std::function<double(const AllocationPlan&)>;

// Enumerates every assignment of a pilot to each user of each cell in
// lexicographic order and keeps the first plan with the highest score.
inline ExhaustiveResult allocate_exhaustive(const Scenario& sc, const PlanEvaluator& evaluate,
                                            const ExhaustiveOptions& opts = {}) {
    const int ell = sc.cfg.pilot_length;
    const int L = sc.num_cells();
    const int N = sc.users_per_cell();
    const int slots = L * N;
    ExhaustiveResult res;
    res.space_size = std::pow(static_cast<double>(ell), slots);
    res.naive_count = L * std::pow(static_cast<double>(N), ell);
    if (res.space_size > opts.max_space)
        throw SearchSpaceTooLarge(res.space_size);

    std::vector<int> digits(static_cast<std::size_t>(slots), 0);
    AllocationPlan trial = detail::empty_plan(sc, "exhaustive");
    bool have = false;
    while (true) {
        for (int c = 0; c < L; ++c)
            for (int k = 0; k < N; ++k)
                trial.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
                    digits[static_cast<std::size_t>(c * N + k)];
        if (!opts.balanced_only || is_balanced(trial, ell)) {
            const double score = evaluate(trial);
            ++res.evaluated;
            if (!have || score > res.score) {
                res.score = score;
                res.plan = trial;
                have = true;
            }
        }
        // Increment, last slot fastest (lexicographic order).
        int pos = slots - 1;
        while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == ell) {
            digits[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0)
            break;
    }
    return res;
}

enum class AllocatorKind { proposed, random, greedy, sector };

inline std::string to_string(AllocatorKind k) {
    switch (k) {
    case AllocatorKind::proposed: return "proposed";
    case AllocatorKind::random: return "random";
    case AllocatorKind::greedy: return "greedy";
    case AllocatorKind::sector: return "sector";
    }
    return "?";
}

inline AllocatorKind allocator_from_string(const std::string& s) {
    if (s == "proposed")
        return AllocatorKind::proposed;
    if (s == "random")
        return AllocatorKind::random;
    if (s == "greedy")
        return AllocatorKind::greedy;
    if (s == "sector")
        return AllocatorKind::sector;
    throw ConfigError("unknown allocator '" + s + "'");
}

inline AllocationPlan allocate(AllocatorKind kind, const Scenario& sc, Rng& rng, int greedy_iters = 10) {
    switch (kind) {
    case AllocatorKind::proposed: return allocate_proposed(sc);
    case AllocatorKind::random: return allocate_random(sc, rng);
    case AllocatorKind::greedy: return allocate_greedy(sc, greedy_iters, rng);
    case AllocatorKind::sector: return allocate_sector(sc);
    }
    throw ConfigError("unknown allocator");
}

}  // namespace lapa
