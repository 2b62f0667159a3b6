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
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lapa/checks.hpp"
#include "lapa/lapa.hpp"

namespace {

using namespace lapa;

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> drops;
    std::optional<int> trials;
    std::optional<int> threads;
    std::string out;
    bool no_timing = false;
};

nlohmann::json load_config(const GlobalOptions& g) {
    return g.config.empty() ? nlohmann::json::object() : read_json_file(g.config);
}

void apply_flags(ExperimentSpec& spec, const GlobalOptions& g) {
    if (g.seed)
        spec.seed = *g.seed;
    if (g.drops)
        spec.drops = *g.drops;
    if (g.trials)
        spec.trials = *g.trials;
    if (g.threads)
        spec.threads = *g.threads;
    if (!g.out.empty())
        spec.output = g.out;
    if (g.no_timing)
        spec.record_timing = false;
}

// Writes through `fn` to spec.output, or stdout when no path is set.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    fn(os);
}

ExperimentSpec table_defaults() {
    ExperimentSpec spec;
    spec.base.num_cells = 2;
    spec.base.users_per_cell = 36;
    spec.base.pilot_length = 12;
    spec.base.coherence_length = 196;
    spec.base.snr = db_to_linear(10.0);
    spec.drops = 200;
    spec.trials = 100;
    return spec;
}

int run_fig3a(const GlobalOptions& g) {
    const auto root = load_config(g);
    ExperimentSpec spec = table_defaults();
    spec.sweep = {"M", {50, 100, 150, 200}};
    spec.allocators = {AllocatorKind::proposed, AllocatorKind::random, AllocatorKind::greedy};
    spec = spec_from_json(root, spec);
    apply_flags(spec, g);
    std::vector<double> k_list{0.0, 10.0};
    if (root.contains("experiment") && root["experiment"].contains("k_db_list"))
        k_list = root["experiment"]["k_db_list"].get<std::vector<double>>();

    std::vector<ResultRow> rows;
    for (double k : k_list) {
        ExperimentSpec s = spec;
        s.base.k_model = KModel::fixed;
        s.base.k_db = k;
        s.id = "fig3a_k" + format_number(k) + "db";
        auto res = run_sum_se_sweep(s);
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
    }
    emit(spec.output, [&](std::ostream& os) { write_rows_csv(os, rows); });
    return 0;
}

int run_fig3b(const GlobalOptions& g) {
    ExperimentSpec spec = table_defaults();
    spec.base.num_antennas = 100;
    spec.base.k_db = 10.0;
    spec.sweep = {"none", {0.0}};
    spec.allocators = {AllocatorKind::proposed, AllocatorKind::random, AllocatorKind::greedy};
    spec = spec_from_json(load_config(g), spec);
    apply_flags(spec, g);
    const auto series = run_worst_user_cdf(spec);
    emit(spec.output, [&](std::ostream& os) { write_cdf_csv(os, series); });
    for (std::size_t a = 1; a < series.size(); ++a) {
        const auto ks = stats::ks_greater(series[0].samples, series[a].samples);
        std::cerr << series[0].allocator << " vs " << series[a].allocator << ": KS D+=" << ks.statistic
                  << " p=" << ks.p_value << '\n';
    }
    return 0;
}

int run_fig3c(const GlobalOptions& g) {
    ExperimentSpec spec = table_defaults();
    spec.base.num_antennas = 100;
    spec.base.k_model = KModel::distance;
    spec.base.los_model = LosModel::linear_prob;
    spec.sweep = {"sigma2_error", {0, 3, 6, 9, 12, 15}};
    spec.allocators = {AllocatorKind::proposed, AllocatorKind::random, AllocatorKind::greedy, AllocatorKind::sector};
    spec.id = "fig3c";
    spec = spec_from_json(load_config(g), spec);
    apply_flags(spec, g);
    const auto res = run_locerr_sweep(spec);
    emit(spec.output, [&](std::ostream& os) { write_rows_csv(os, res.rows); });
    return 0;
}

int run_oracle(const GlobalOptions& g) {
    ExperimentSpec spec;
    spec.base.num_cells = 1;
    spec.base.users_per_cell = 4;
    spec.base.pilot_length = 2;
    spec.base.num_antennas = 32;
    spec.base.k_db = 10.0;
    spec.sweep = {"none", {0.0}};
    spec.drops = 100;
    spec.id = "oracle";
    spec = spec_from_json(load_config(g), spec);
    apply_flags(spec, g);
    const OracleReport rep = run_oracle_compare(spec);
    std::ostringstream line;
    line << "oracle ratio mean=" << format_number(rep.mean) << " min=" << format_number(rep.min)
         << " max=" << format_number(rep.max) << " drops=" << rep.ratios.size()
         << " plans_per_drop=" << rep.evaluated_per_drop << " space=ell^(N*L)=" << format_number(rep.space_size)
         << " L*N^ell=" << format_number(rep.naive_count);
    std::cout << line.str() << '\n';
    if (!spec.output.empty()) {
        emit(spec.output, [&](std::ostream& os) {
            os << "drop,proposed_sum_se,optimal_sum_se,ratio\n";
            for (std::size_t d = 0; d < rep.ratios.size(); ++d)
                os << d << ',' << format_number(rep.proposed_sum[d]) << ',' << format_number(rep.optimal_sum[d])
                   << ',' << format_number(rep.ratios[d]) << '\n';
        });
    }
    return 0;
}

int run_check(const GlobalOptions& g) {
    const auto results = checks::run_all(g.seed.value_or(1));
    int failed = 0;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        failed += r.passed ? 0 : 1;
    }
    std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " checks passed\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Location-aware pilot allocation simulator for multi-cell massive MIMO uplinks"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config, "NetworkConfig JSON with optional \"experiment\" object");
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--drops", g.drops, "Location drops D")->check(CLI::PositiveNumber);
    app.add_option("--trials", g.trials, "Fading realizations T per drop");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output path (CSV); stdout when omitted");
    app.add_flag("--no-timing", g.no_timing, "Write wall_ms as 0 for byte-reproducible CSV");

    auto* fig3a = app.add_subcommand("fig3a", "Sum SE versus M for fixed K values");
    auto* fig3b = app.add_subcommand("fig3b", "CDF of the worst-5-user sum SE");
    auto* fig3c = app.add_subcommand("fig3c", "Sum SE versus localization error variance");
    auto* oracle = app.add_subcommand("oracle", "Proposed versus exhaustive-search optimum");
    auto* check = app.add_subcommand("check", "Run the built-in invariant checks");
    for (auto* sub : {fig3a, fig3b, fig3c, oracle, check})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*fig3a)
            return run_fig3a(g);
        if (*fig3b)
            return run_fig3b(g);
        if (*fig3c)
            return run_fig3c(g);
        if (*oracle)
            return run_oracle(g);
        if (*check)
            return run_check(g);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
