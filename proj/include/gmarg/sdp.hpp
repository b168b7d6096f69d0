#pragma once

#include <cstdlib>

#include "gmarg/conic.hpp"
#include "gmarg/ipm.hpp"
#include "gmarg/toybackend.hpp"

namespace gmarg::conic {

// Backend selected by the GMARG_BACKEND environment variable ("ipm", "toy").
inline Backend& backend_from_env() {
    const char* env = std::getenv("GMARG_BACKEND");
    if (env != nullptr && std::string(env) == "toy") return toy_backend();
    return default_backend();
}

inline SdpSolution solve(const ConicProgram& p, const SolveOptions& opt = {},
                         Backend* backend = nullptr) {
    return solve_with(backend != nullptr ? *backend : backend_from_env(), p, opt);
}

}  // namespace gmarg::conic
