#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bgch {

using Rng = std::mt19937_64;

// Named sub-streams derived from one run seed. Each consumer draws from its
// own stream so enabling one feature never shifts another's draws.
Rng make_stream(std::uint64_t seed, std::string_view name);

// Same as above with an extra integer salt (per-shard or per-epoch streams).
Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t salt);

}  // namespace bgch
