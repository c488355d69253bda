#pragma once

#include <stdexcept>
#include <string>

namespace maestro {

struct InvalidLength : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ShapeMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedFormat : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TileTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyTraceSet : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonPositivePower : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace maestro
