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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lapa/core.hpp"

namespace lapa {

// ell orthogonal sequences of length ell with unit-modulus symbols. Row a is
// sequence a; rows of the ell-point DFT matrix, so Phi Phi^H = ell * I.
struct PilotBook {
    int length = 0;
    CMatrix sequences;
};

inline PilotBook build_pilot_book(int length) {
    if (length < 1)
        throw ConfigError("pilot length must be >= 1");
    PilotBook book;
    book.length = length;
    book.sequences.resize(length, length);
    for (int a = 0; a < length; ++a) {
        for (int n = 0; n < length; ++n) {
            // Reduce the exponent first so that e.g. ell = 2 yields exact +-1.
            const long long k = (static_cast<long long>(a) * n) % length;
            if (k == 0)
                book.sequences(a, n) = 1.0;
            else if (2 * k == length)
                book.sequences(a, n) = -1.0;
            else
                book.sequences(a, n) = std::polar(1.0, -kTwoPi * static_cast<double>(k) / length);
        }
    }
    return book;
}

// Pilot index per user, per cell: cells[l][k] in [0, ell).
struct AllocationPlan {
    std::vector<std::vector<int>> cells;
    std::string allocator;

    int num_cells() const { return static_cast<int>(cells.size()); }
    int pilot(int cell, int user) const {
        return cells[static_cast<std::size_t>(cell)][static_cast<std::size_t>(user)];
    }

    friend bool operator==(const AllocationPlan& a, const AllocationPlan& b) { return a.cells == b.cells; }
};

// Every pilot appears floor(N/ell) or ceil(N/ell) times in every cell.
inline bool is_balanced(const AllocationPlan& plan, int pilot_length) {
    for (const auto& cell : plan.cells) {
        std::vector<int> count(static_cast<std::size_t>(pilot_length), 0);
        for (int p : cell) {
            if (p < 0 || p >= pilot_length)
                return false;
            ++count[static_cast<std::size_t>(p)];
        }
        const int n = static_cast<int>(cell.size());
        const int lo = n / pilot_length;
        const int hi = (n + pilot_length - 1) / pilot_length;
        for (int c : count)
            if (c < lo || c > hi)
                return false;
    }
    return true;
}

inline void validate_plan(const AllocationPlan& plan, int num_cells, int users_per_cell, int pilot_length) {
    if (plan.num_cells() != num_cells)
        throw StructuralError("plan covers " + std::to_string(plan.num_cells()) + " cells, expected " +
                              std::to_string(num_cells));
    for (const auto& cell : plan.cells) {
        if (static_cast<int>(cell.size()) != users_per_cell)
            throw StructuralError("plan cell has wrong user count");
        for (int p : cell)
            if (p < 0 || p >= pilot_length)
                throw StructuralError("pilot index " + std::to_string(p) + " out of range");
    }
}

// Lambda_i (N x ell): row j is the book sequence s_i[j].
inline CMatrix pilot_matrix(const AllocationPlan& plan, int cell, const PilotBook& book) {
    if (cell < 0 || cell >= plan.num_cells())
        throw StructuralError("plan does not cover cell " + std::to_string(cell));
    const auto& s = plan.cells[static_cast<std::size_t>(cell)];
    CMatrix lambda(static_cast<Eigen::Index>(s.size()), book.length);
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] < 0 || s[j] >= book.length)
            throw StructuralError("pilot index " + std::to_string(s[j]) + " out of range");
        lambda.row(static_cast<Eigen::Index>(j)) = book.sequences.row(s[j]);
    }
    return lambda;
}

// R_il = Lambda_i Lambda_l^H.
inline CMatrix correlation(const CMatrix& lambda_i, const CMatrix& lambda_l) {
    if (lambda_i.cols() != lambda_l.cols())
        throw StructuralError("correlation: pilot lengths differ");
    return lambda_i * lambda_l.adjoint();
}

inline nlohmann::json plan_to_json(const AllocationPlan& plan) {
    return nlohmann::json{{"cells", plan.cells}, {"allocator", plan.allocator}};
}

inline AllocationPlan plan_from_json(const nlohmann::json& j) {
    AllocationPlan plan;
    try {
        plan.cells = j.at("cells").get<std::vector<std::vector<int>>>();
        plan.allocator = j.value("allocator", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed plan JSON: ") + e.what());
    }
    return plan;
}

}  // namespace lapa
