#pragma once

#include <stdexcept>
#include <string>

namespace precess {

enum class errc {
    invalid_argument,
    singularity,
    aliasing,
    step_underflow,
    unattainable,
    indeterminate,
    sampling,
    domain,
    io,
    internal,
};

struct error : std::runtime_error {
    errc code;
    error(errc c, const std::string& what) : std::runtime_error(what), code(c) {}
};

} // namespace precess
