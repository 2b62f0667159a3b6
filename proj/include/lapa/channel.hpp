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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapa/core.hpp"
#include "lapa/model.hpp"

namespace lapa {

// ULA response: entry m is exp(-j * m * 2*pi * (r/lambda) * sin(theta)).
inline CVector steering_vector(int num_antennas, double theta, double spacing_ratio) {
    CVector h(num_antennas);
    const double phase = kTwoPi * spacing_ratio * std::sin(theta);
    for (int m = 0; m < num_antennas; ++m)
        h(m) = std::polar(1.0, -phase * m);
    return h;
}

namespace detail {

inline CVector rician_combine(const CVector& los_dir, const CVector& nlos, double gain, double k) {
    const double los_w = std::sqrt(k / (1.0 + k));
    const double nlos_w = std::sqrt(1.0 / (1.0 + k));
    return std::sqrt(gain) * (los_w * los_dir + nlos_w * nlos);
}

inline CVector draw_nlos(int num_antennas, Rng& rng) {
    CVector h(num_antennas);
    for (int m = 0; m < num_antennas; ++m)
        h(m) = complex_normal(rng);
    return h;
}

}  // namespace detail

// One Rician draw g_ijl built from the TRUE location of `user` towards BS `bs`.
inline CVector draw_channel(const UserRecord& user, int bs, int num_antennas, double spacing_ratio, Rng& rng) {
    const BsLink& link = user.links[static_cast<std::size_t>(bs)];
    const CVector nlos = detail::draw_nlos(num_antennas, rng);
    return detail::rician_combine(steering_vector(num_antennas, link.aoa, spacing_ratio), nlos, link.gain,
                                  link.k_factor);
}

// Channels from all users of cell i to BS l.
struct ChannelBlock {
    CMatrix los_dirs;  // H-bar, M x N
    CMatrix nlos;      // H-tilde, M x N
    RVector k;         // diag(Omega)
    RVector gain;      // diag(D)
    CMatrix g;         // G = H D^(1/2)
};

struct ChannelSet {
    int num_cells = 0;
    int num_antennas = 0;
    int users_per_cell = 0;
    std::vector<ChannelBlock> blocks;  // index source * L + bs

    const ChannelBlock& at(int source, int bs) const {
        return blocks[static_cast<std::size_t>(source * num_cells + bs)];
    }
    ChannelBlock& at(int source, int bs) { return blocks[static_cast<std::size_t>(source * num_cells + bs)]; }
};

// NLOS stream for the (source cell, BS) pair of one realization.
inline Rng channel_stream(std::uint64_t realization_seed, int source, int bs) {
    return make_stream(realization_seed,
                       {kTagChannelPair, static_cast<std::uint64_t>(source), static_cast<std::uint64_t>(bs)});
}

// Stacks per-user draws into G_il for every (i, l).
inline ChannelSet assemble_channels(const Scenario& sc, std::uint64_t realization_seed) {
    const int L = sc.num_cells();
    const int N = sc.users_per_cell();
    const int M = sc.cfg.num_antennas;
    const double spacing = sc.cfg.antenna_spacing_ratio;

    ChannelSet set;
    set.num_cells = L;
    set.num_antennas = M;
    set.users_per_cell = N;
    set.blocks.resize(static_cast<std::size_t>(L * L));
    for (int i = 0; i < L; ++i) {
        for (int l = 0; l < L; ++l) {
            ChannelBlock& b = set.at(i, l);
            b.los_dirs.resize(M, N);
            b.nlos.resize(M, N);
            b.g.resize(M, N);
            b.k.resize(N);
            b.gain.resize(N);
            Rng rng = channel_stream(realization_seed, i, l);
            for (int j = 0; j < N; ++j) {
                const BsLink& link = sc.user(i, j).links[static_cast<std::size_t>(l)];
                b.los_dirs.col(j) = steering_vector(M, link.aoa, spacing);
                b.nlos.col(j) = detail::draw_nlos(M, rng);
                b.k(j) = link.k_factor;
                b.gain(j) = link.gain;
                b.g.col(j) = detail::rician_combine(b.los_dirs.col(j), b.nlos.col(j), link.gain, link.k_factor);
            }
        }
    }
    return set;
}

// Debug dump: per block a 16-byte header (M, N, i, l as little-endian int32)
// followed by G_il row-major as little-endian complex64 pairs.
inline void write_channel_dump(std::ostream& os, const ChannelSet& set) {
    auto put_u32 = [&os](std::uint32_t v) {
        const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
        os.write(b, 4);
    };
    auto put_f32 = [&](float f) {
        std::uint32_t bits;
        static_assert(sizeof(bits) == sizeof(f));
        std::memcpy(&bits, &f, sizeof(f));
        put_u32(bits);
    };
    for (int i = 0; i < set.num_cells; ++i) {
        for (int l = 0; l < set.num_cells; ++l) {
            const CMatrix& g = set.at(i, l).g;
            put_u32(static_cast<std::uint32_t>(g.rows()));
            put_u32(static_cast<std::uint32_t>(g.cols()));
            put_u32(static_cast<std::uint32_t>(i));
            put_u32(static_cast<std::uint32_t>(l));
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                for (Eigen::Index c = 0; c < g.cols(); ++c) {
                    put_f32(static_cast<float>(g(r, c).real()));
                    put_f32(static_cast<float>(g(r, c).imag()));
                }
            }
        }
    }
}

inline void write_channel_dump(const std::string& path, const ChannelSet& set) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path);
    write_channel_dump(os, set);
}

}  // namespace lapa
