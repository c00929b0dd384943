#ifndef AIF_ERRORS_HPP
#define AIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aif {

struct NormalizationError : std::runtime_error {
    explicit NormalizationError(const std::string& what) : std::runtime_error(what) {}
};

struct ParameterError : std::runtime_error {
    explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

struct PolicyExplosionError : std::runtime_error {
    explicit PolicyExplosionError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateLikelihoodError : std::runtime_error {
    explicit DegenerateLikelihoodError(const std::string& what) : std::runtime_error(what) {}
};

struct OracleCapacityError : std::runtime_error {
    explicit OracleCapacityError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

struct CornerSolutionError : std::runtime_error {
    explicit CornerSolutionError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace aif

#endif
