#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "katlas/groundstate.hpp"

namespace katlas::cache {

/// $KATLAS_CACHE, or ./.katlas-cache when unset or empty.
std::filesystem::path default_dir();

/// Hex SHA-256 of the canonical JSON of everything the solve depends on.
std::string key(const PowerNonlinearity& nl, int N, int k, const ShootingConfig& cfg);

/// nullopt on a miss or on an unreadable entry.
std::optional<BoundState> load(const std::filesystem::path& dir, const std::string& key, int N);

void store(const std::filesystem::path& dir, const std::string& key, const BoundState& bs);

}  // namespace katlas::cache
