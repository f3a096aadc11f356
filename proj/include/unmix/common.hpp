#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace unmix {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Coefficient matrices are 2 x N throughout (two inner columns [f 1]).
using CoefMat = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// ============================================================================
// Errors
// ============================================================================

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IdentifiabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularTransformError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleTransformError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RescaleRequiredError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDirectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateConeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyOracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an objective turns non-finite; carries the sweep index.
struct NumericError : std::runtime_error {
    long iteration;
    NumericError(const std::string& msg, long iter)
        : std::runtime_error(msg + " (iteration " + std::to_string(iter) + ")"),
          iteration(iter) {}
};

/// File parse failure; carries the byte offset where the problem was found.
struct FormatError : std::runtime_error {
    std::uint64_t byte_offset;
    FormatError(const std::string& msg, std::uint64_t offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
};

struct SchemaError : std::runtime_error {
    std::string field_path;
    SchemaError(const std::string& msg, std::string path)
        : std::runtime_error(msg + " (at " + path + ")"), field_path(std::move(path)) {}
};

}  // namespace unmix
