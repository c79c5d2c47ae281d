#pragma once

#include <stdexcept>
#include <string>

namespace noisyal {

// Configuration, schema, or usage problems (bad config file, unknown strategy
// name, malformed CSV, missing input file). The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Data-dependent failures that occur while running with a valid configuration
// (fit on a single class, infeasible blob placement, exhausted pools). The CLI
// maps these to exit code 1.
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace noisyal
