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
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lapa/allocators.hpp"
#include "lapa/config.hpp"
#include "lapa/core.hpp"
#include "lapa/detection.hpp"
#include "lapa/model.hpp"
#include "lapa/stats.hpp"

namespace lapa {

// Runs fn(0..n-1) on `threads` workers. The first exception is rethrown.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err)
                        err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

struct SweepAxis {
    std::string name = "none";  // "M", "sigma2_error" or "none"
    std::vector<double> values{0.0};
};

struct ExperimentSpec {
    std::string id = "experiment";
    NetworkConfig base;
    SweepAxis sweep;
    std::vector<AllocatorKind> allocators{AllocatorKind::proposed, AllocatorKind::random};
    int drops = 200;
    int trials = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output;
    int worst_count = 5;
    int greedy_iters = 10;
    int bootstrap_resamples = 1000;
    bool record_timing = true;

    void validate() const {
        base.validate();
        if (sweep.values.empty())
            throw ConfigError("sweep values must be nonempty");
        if (sweep.name != "M" && sweep.name != "sigma2_error" && sweep.name != "none")
            throw ConfigError("unknown sweep axis '" + sweep.name + "'");
        if (allocators.empty())
            throw ConfigError("allocator list must be nonempty");
        if (drops < 1)
            throw ConfigError("drops must be >= 1");
        if (trials < 2)
            throw ConfigError("trials must be >= 2");
        if (threads < 1)
            throw ConfigError("threads must be >= 1");
        if (greedy_iters < 1)
            throw ConfigError("greedy_iters must be >= 1");
        if (base.pilot_length >= base.coherence_length)
            throw ConfigError("pilot length must be below the coherence length");
    }

    NetworkConfig config_at(double sweep_value) const {
        NetworkConfig c = base;
        if (sweep.name == "M")
            c.num_antennas = static_cast<int>(std::lround(sweep_value));
        else if (sweep.name == "sigma2_error")
            c.localization_error_var = sweep_value;
        c.validate();
        return c;
    }
};

inline ExperimentSpec spec_from_json(const nlohmann::json& root, ExperimentSpec spec = {}) {
    spec.base = config_from_json(root, spec.base);
    if (root.contains("experiment")) {
        const auto& e = root.at("experiment");
        try {
            spec.id = e.value("id", spec.id);
            if (e.contains("sweep")) {
                spec.sweep.name = e.at("sweep").value("name", spec.sweep.name);
                spec.sweep.values = e.at("sweep").value("values", spec.sweep.values);
            }
            if (e.contains("allocators")) {
                spec.allocators.clear();
                for (const auto& a : e.at("allocators"))
                    spec.allocators.push_back(allocator_from_string(a.get<std::string>()));
            }
            spec.drops = e.value("drops", spec.drops);
            spec.trials = e.value("trials", spec.trials);
            spec.seed = e.value("seed", spec.seed);
            spec.threads = e.value("threads", spec.threads);
            spec.output = e.value("output", spec.output);
            spec.worst_count = e.value("worst_count", spec.worst_count);
            spec.greedy_iters = e.value("greedy_iters", spec.greedy_iters);
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError(std::string("malformed experiment JSON: ") + ex.what());
        }
    }
    return spec;
}

struct ResultRow {
    std::string experiment;
    std::string allocator;
    std::string sweep_name;
    double sweep_value = 0.0;
    int cell = 0;
    double sum_se = 0.0;             // mean over drops, bits/s/Hz
    double stderr_se = 0.0;          // bootstrap standard error
    std::vector<double> per_user_se; // mean over drops, per user slot
    int drops = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

// Per-drop outcome of one allocator: SE[cell][user].
struct DropOutcome {
    std::vector<std::vector<double>> se;

    double cell_sum(int cell) const {
        const auto& v = se[static_cast<std::size_t>(cell)];
        return std::accumulate(v.begin(), v.end(), 0.0);
    }
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<ResultRow> rows;
    // outcomes[sweep][allocator][drop]
    std::vector<std::vector<std::vector<DropOutcome>>> outcomes;

    // Per-drop sum SE of `cell` for one (sweep index, allocator index).
    std::vector<double> drop_sums(std::size_t sweep_idx, std::size_t alloc_idx, int cell = 0) const {
        std::vector<double> out;
        for (const auto& d : outcomes[sweep_idx][alloc_idx])
            out.push_back(d.cell_sum(cell));
        return out;
    }
};

inline std::uint64_t drop_seed(std::uint64_t seed, int drop) {
    return derive_seed(seed, {kTagDrop, static_cast<std::uint64_t>(drop)});
}

// Evaluates every allocator on every drop at one configuration. Allocators of
// the same drop share the scenario and all fading/noise realizations.
inline std::vector<std::vector<DropOutcome>> run_drops(const ExperimentSpec& spec, const NetworkConfig& cfg,
                                                       std::vector<double>* alloc_ms = nullptr) {
    const std::size_t A = spec.allocators.size();
    std::vector<std::vector<DropOutcome>> out(A, std::vector<DropOutcome>(static_cast<std::size_t>(spec.drops)));
    std::vector<std::vector<double>> ms(A, std::vector<double>(static_cast<std::size_t>(spec.drops), 0.0));
    parallel_for(spec.drops, spec.threads, [&](int d) {
        const std::uint64_t ds = drop_seed(spec.seed, d);
        const Scenario sc = make_scenario(cfg, ds);
        const std::uint64_t fading = derive_seed(ds, {kTagFading});
        for (std::size_t a = 0; a < A; ++a) {
            const auto t0 = std::chrono::steady_clock::now();
            Rng rng = make_stream(ds, {kTagAllocator, static_cast<std::uint64_t>(spec.allocators[a])});
            const AllocationPlan plan = allocate(spec.allocators[a], sc, rng, spec.greedy_iters);
            const SeReport rep = estimate_sinr(sc, plan, spec.trials, fading);
            out[a][static_cast<std::size_t>(d)].se = rep.se;
            ms[a][static_cast<std::size_t>(d)] =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
    });
    if (alloc_ms) {
        alloc_ms->assign(A, 0.0);
        for (std::size_t a = 0; a < A; ++a)
            for (double v : ms[a])
                (*alloc_ms)[a] += v;
    }
    return out;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult res;
    res.spec = spec;
    for (double value : spec.sweep.values) {
        const NetworkConfig cfg = spec.config_at(value);
        std::vector<double> ms;
        auto outcomes = run_drops(spec, cfg, &ms);
        for (std::size_t a = 0; a < spec.allocators.size(); ++a) {
            for (int c = 0; c < cfg.num_cells; ++c) {
                ResultRow row;
                row.experiment = spec.id;
                row.allocator = to_string(spec.allocators[a]);
                row.sweep_name = spec.sweep.name;
                row.sweep_value = value;
                row.cell = c;
                row.drops = spec.drops;
                row.trials = spec.trials;
                row.seed = spec.seed;
                row.wall_ms = spec.record_timing ? ms[a] : 0.0;
                std::vector<double> sums;
                row.per_user_se.assign(static_cast<std::size_t>(cfg.users_per_cell), 0.0);
                for (const auto& d : outcomes[a]) {
                    sums.push_back(d.cell_sum(c));
                    for (int k = 0; k < cfg.users_per_cell; ++k)
                        row.per_user_se[static_cast<std::size_t>(k)] +=
                            d.se[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] / spec.drops;
                }
                row.sum_se = stats::mean(sums);
                row.stderr_se = stats::bootstrap_stderr(
                    sums, spec.bootstrap_resamples,
                    derive_seed(spec.seed, {static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(c)}));
                res.rows.push_back(std::move(row));
            }
        }
        res.outcomes.push_back(std::move(outcomes));
    }
    return res;
}

// Center-cell sum SE versus M.
inline ExperimentResult run_sum_se_sweep(ExperimentSpec spec) {
    if (spec.sweep.name != "M" && spec.sweep.name != "none")
        throw ConfigError("sum-SE sweep runs over M");
    return run_experiment(spec);
}

// Sum SE versus localization error variance, distance-dependent K and LOS probability.
inline ExperimentResult run_locerr_sweep(ExperimentSpec spec) {
    if (spec.sweep.name != "sigma2_error")
        throw ConfigError("localization-error sweep runs over sigma2_error");
    if (spec.base.los_model != LosModel::linear_prob || spec.base.k_model != KModel::distance)
        throw ConfigError("localization-error sweep needs los_model=linear_prob and k_model=distance");
    return run_experiment(spec);
}

struct CdfSeries {
    std::string allocator;
    std::vector<double> samples;                       // per drop
    std::vector<std::pair<double, double>> points;     // (value, cumulative probability)
};

// Sum of the `count` smallest per-user SEs.
inline double worst_users_sum(std::vector<double> se, int count) {
    std::sort(se.begin(), se.end());
    const auto n = std::min<std::size_t>(se.size(), static_cast<std::size_t>(std::max(count, 0)));
    return std::accumulate(se.begin(), se.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
}

// Empirical CDF of the worst-users sum SE in the center cell. Uses the first
// sweep value only.
inline std::vector<CdfSeries> run_worst_user_cdf(const ExperimentSpec& spec) {
    spec.validate();
    const NetworkConfig cfg = spec.config_at(spec.sweep.values.front());
    const auto outcomes = run_drops(spec, cfg);
    std::vector<CdfSeries> out;
    for (std::size_t a = 0; a < spec.allocators.size(); ++a) {
        CdfSeries s;
        s.allocator = to_string(spec.allocators[a]);
        for (const auto& d : outcomes[a])
            s.samples.push_back(worst_users_sum(d.se.front(), spec.worst_count));
        s.points = stats::empirical_cdf(s.samples);
        out.push_back(std::move(s));
    }
    return out;
}

struct OracleReport {
    std::vector<double> ratios;        // per drop
    std::vector<double> optimal_sum;   // per drop
    std::vector<double> proposed_sum;  // per drop
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double space_size = 0.0;
    double naive_count = 0.0;
    long long evaluated_per_drop = 0;
};

// Network sum SE of a plan with common random numbers.
inline double plan_sum_se(const Scenario& sc, const AllocationPlan& plan, int trials, std::uint64_t fading_seed) {
    const SeReport rep = estimate_sinr(sc, plan, trials, fading_seed);
    return std::accumulate(rep.sum_se.begin(), rep.sum_se.end(), 0.0);
}

// Ratio of the proposed plan's sum SE to the exhaustive optimum, per drop.
inline OracleReport run_oracle_compare(const ExperimentSpec& spec, ExhaustiveOptions opts = {}) {
    spec.validate();
    const NetworkConfig cfg = spec.config_at(spec.sweep.values.front());
    OracleReport rep;
    rep.ratios.assign(static_cast<std::size_t>(spec.drops), 0.0);
    rep.optimal_sum = rep.ratios;
    rep.proposed_sum = rep.ratios;
    std::vector<long long> evaluated(static_cast<std::size_t>(spec.drops), 0);
    std::vector<double> space(static_cast<std::size_t>(spec.drops), 0.0), naive = space;
    parallel_for(spec.drops, spec.threads, [&](int d) {
        const std::uint64_t ds = drop_seed(spec.seed, d);
        const Scenario sc = make_scenario(cfg, ds);
        const std::uint64_t fading = derive_seed(ds, {kTagFading});
        const auto eval = [&](const AllocationPlan& p) { return plan_sum_se(sc, p, spec.trials, fading); };
        const ExhaustiveResult best = allocate_exhaustive(sc, eval, opts);
        const double prop = eval(allocate_proposed(sc));
        const auto i = static_cast<std::size_t>(d);
        rep.optimal_sum[i] = best.score;
        rep.proposed_sum[i] = prop;
        rep.ratios[i] = best.score > 0.0 ? prop / best.score : 1.0;
        evaluated[i] = best.evaluated;
        space[i] = best.space_size;
        naive[i] = best.naive_count;
    });
    rep.mean = stats::mean(rep.ratios);
    rep.min = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    rep.max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.space_size = space.front();
    rep.naive_count = naive.front();
    rep.evaluated_per_drop = evaluated.front();
    return rep;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline const char* kResultCsvHeader =
    "experiment,allocator,sweep_name,sweep_value,cell,sum_se_bits_hz,stderr,drops,trials,seed,wall_ms";

inline void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool header = true) {
    if (header)
        os << kResultCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.experiment << ',' << r.allocator << ',' << r.sweep_name << ',' << format_number(r.sweep_value) << ','
           << r.cell << ',' << format_number(r.sum_se) << ',' << format_number(r.stderr_se) << ',' << r.drops << ','
           << r.trials << ',' << r.seed << ',' << format_number(r.wall_ms) << '\n';
    }
}

inline void write_cdf_csv(std::ostream& os, const std::vector<CdfSeries>& series) {
    os << "allocator,value_bits_hz,cum_prob\n";
    for (const auto& s : series)
        for (const auto& [v, p] : s.points)
            os << s.allocator << ',' << format_number(v) << ',' << format_number(p) << '\n';
}

}  // namespace lapa
