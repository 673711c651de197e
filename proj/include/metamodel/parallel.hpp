#pragma once

#include <optional>

namespace metamodel {

/// Thread count for the OpenMP kernels: an explicit request wins, then the
/// METAMODEL_THREADS environment variable, then the OpenMP default.
/// Always >= 1.
int resolve_threads(std::optional<int> requested = std::nullopt);

}  // namespace metamodel
