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

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lapa/core.hpp"
#include "lapa/model.hpp"

namespace lapa {

inline std::string to_string(KModel k) { return k == KModel::fixed ? "fixed" : "distance"; }
inline std::string to_string(LosModel m) { return m == LosModel::always ? "always" : "linear_prob"; }

inline nlohmann::json config_to_json(const NetworkConfig& c) {
    return nlohmann::json{
        {"L", c.num_cells},
        {"N", c.users_per_cell},
        {"M", c.num_antennas},
        {"ell", c.pilot_length},
        {"ell_c", c.coherence_length},
        {"snr_db", linear_to_db(c.snr)},
        {"d_bs", c.cell_radius},
        {"d_min", c.min_distance},
        {"v", c.pathloss_exponent},
        {"pathloss_sign", c.pathloss_sign},
        {"k_model", to_string(c.k_model)},
        {"k_db", c.k_db},
        {"k_a", c.k_intercept_db},
        {"k_b", c.k_slope_db_per_m},
        {"los_model", to_string(c.los_model)},
        {"antenna_spacing_ratio", c.antenna_spacing_ratio},
        {"sigma2_error", c.localization_error_var},
        {"bs_spacing", c.bs_spacing},
        {"seed", c.seed},
    };
}

// Reads the keys present in `j` on top of `base`; unknown keys are ignored.
inline NetworkConfig config_from_json(const nlohmann::json& j, NetworkConfig c = {}) {
    try {
        c.num_cells = j.value("L", c.num_cells);
        c.users_per_cell = j.value("N", c.users_per_cell);
        c.num_antennas = j.value("M", c.num_antennas);
        c.pilot_length = j.value("ell", c.pilot_length);
        c.coherence_length = j.value("ell_c", c.coherence_length);
        if (j.contains("snr_db"))
            c.snr = db_to_linear(j.at("snr_db").get<double>());
        c.cell_radius = j.value("d_bs", c.cell_radius);
        c.min_distance = j.value("d_min", c.min_distance);
        c.pathloss_exponent = j.value("v", c.pathloss_exponent);
        c.pathloss_sign = j.value("pathloss_sign", c.pathloss_sign);
        if (j.contains("k_model")) {
            const auto s = j.at("k_model").get<std::string>();
            if (s == "fixed")
                c.k_model = KModel::fixed;
            else if (s == "distance")
                c.k_model = KModel::distance;
            else
                throw ConfigError("unknown k_model '" + s + "'");
        }
        c.k_db = j.value("k_db", c.k_db);
        c.k_intercept_db = j.value("k_a", c.k_intercept_db);
        c.k_slope_db_per_m = j.value("k_b", c.k_slope_db_per_m);
        if (j.contains("los_model")) {
            const auto s = j.at("los_model").get<std::string>();
            if (s == "always")
                c.los_model = LosModel::always;
            else if (s == "linear_prob")
                c.los_model = LosModel::linear_prob;
            else
                throw ConfigError("unknown los_model '" + s + "'");
        }
        c.antenna_spacing_ratio = j.value("antenna_spacing_ratio", c.antenna_spacing_ratio);
        c.localization_error_var = j.value("sigma2_error", c.localization_error_var);
        c.bs_spacing = j.value("bs_spacing", c.bs_spacing);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
}

}  // namespace lapa
