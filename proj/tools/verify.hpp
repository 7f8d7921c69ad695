#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace sandpile::cli {

/// Runs the property suites (conservation, Abelian property, least action,
/// permutation audit, Green residual, barrier bounds). Failing cases leave
/// sfield dumps of their inputs under `dump_dir`.
nlohmann::ordered_json run_verify(std::uint64_t seed, const std::string& dump_dir, bool* passed);

}  // namespace sandpile::cli
