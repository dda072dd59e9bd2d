#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace eastlab::cli
{

inline constexpr std::string_view kVersion = "0.1.0";

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 2 on invalid arguments (usage on `err`), 1 on runtime failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a, hex encoded; used for the RunSpec hash in output headers.
std::string fnv1a_hex(std::string_view text);

// Seed used when --seed is absent: EASTLAB_SEED if set, else 1.
std::uint64_t default_seed();

} // namespace eastlab::cli
