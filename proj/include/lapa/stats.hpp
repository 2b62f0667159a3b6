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
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "lapa/core.hpp"

namespace lapa::stats {

inline double mean(std::span<const double> x) {
    if (x.empty())
        return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2)
        return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x)
        acc += (v - m) * (v - m);
    return acc / static_cast<double>(x.size() - 1);
}

// Bootstrap standard error of the mean.
inline double bootstrap_stderr(std::span<const double> x, int resamples, std::uint64_t seed) {
    if (x.size() < 2)
        return 0.0;
    Rng rng(derive_seed(seed, {kTagBootstrap}));
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            acc += x[pick(rng)];
        means.push_back(acc / static_cast<double>(x.size()));
    }
    return std::sqrt(sample_variance(means));
}

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sided paired t-test of H1: mean(a - b) > 0.
inline TestResult paired_t_greater(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("paired_t_greater: need two equally sized samples, n >= 2");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    const double m = mean(d);
    const double sd = std::sqrt(sample_variance(d));
    TestResult r;
    if (sd == 0.0) {
        r.statistic = m > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        r.p_value = m > 0.0 ? 0.0 : 1.0;
        return r;
    }
    r.statistic = m / (sd / std::sqrt(static_cast<double>(d.size())));
    boost::math::students_t dist(static_cast<double>(d.size() - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

// One-sided two-sample Kolmogorov-Smirnov test of H1: `a` is stochastically
// larger than `b` (F_a lies below / right of F_b). Statistic
// D+ = sup_t (F_b(t) - F_a(t)). Asymptotic p with the finite-sample
// correction of the one-sided Smirnov limit (same as scipy's "asymp" mode).
inline TestResult ks_greater(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_greater: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d_plus = 0.0;
    while (ia < a.size() || ib < b.size()) {
        double t;
        if (ib >= b.size() || (ia < a.size() && a[ia] <= b[ib]))
            t = a[ia];
        else
            t = b[ib];
        while (ia < a.size() && a[ia] <= t)
            ++ia;
        while (ib < b.size() && b[ib] <= t)
            ++ib;
        d_plus = std::max(d_plus, ib / m - ia / n);
    }
    TestResult r;
    r.statistic = d_plus;
    const double big = std::max(n, m), sm = std::min(n, m);
    const double z = std::sqrt(big * sm / (big + sm)) * d_plus;
    const double expt = -2.0 * z * z - 2.0 * z * (big + 2.0 * sm) / std::sqrt(big * sm * (big + sm)) / 3.0;
    r.p_value = std::min(1.0, std::exp(expt));
    return r;
}

// Empirical CDF points (value, P[X <= value]) at each distinct sample value.
inline std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i + 1 < x.size() && x[i + 1] == x[i])
            continue;
        out.emplace_back(x[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

}  // namespace lapa::stats
