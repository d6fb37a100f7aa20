/*
   Copyright 2026 The atomchip Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace atomchip {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless: every
/// (counter, key) pair maps to four independent 32-bit words.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter c, Key k)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return c;
    }
};

/// Purpose tags keep the streams of different random decisions apart.
enum class RngPurpose : std::uint16_t { sampling = 1, background = 2, noise = 3, user = 100 };

/// Random numbers for one (seed, stream, purpose, step) tuple. Draws walk through
/// successive Philox blocks; results never depend on which thread asks.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream, RngPurpose purpose, std::uint64_t step = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          purpose_(static_cast<std::uint32_t>(purpose) << 16),
          step_(step)
    {
    }

    std::uint32_t next_u32()
    {
        if (used_ == 4) {
            buffer_ = Philox4x32::block(
                {stream_, purpose_ | block_, static_cast<std::uint32_t>(step_), static_cast<std::uint32_t>(step_ >> 32)},
                key_);
            ++block_;
            used_ = 0;
        }
        return buffer_[used_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform()
    {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

    /// Standard normal by Box-Muller; the second variate is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint32_t purpose_;
    std::uint64_t step_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace atomchip
