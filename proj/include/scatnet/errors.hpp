#pragma once

#include <stdexcept>
#include <string>

namespace scatnet {

// Error taxonomy shared by the whole library. The CLI maps kinds to exit
// codes: usage errors are handled by the argument parser (exit 1),
// input/structure problems exit 2, numeric failures exit 3.
enum class ErrorKind {
    parse,            // malformed text input (names the offending line)
    format,           // malformed binary container
    data,             // well-formed input with unusable content (NaN, bad label)
    shape,            // dimension mismatch / divisibility violation
    parameter,        // out-of-range argument
    filter_integrity, // coefficient file fails its reconstruction self-check
    divergence,       // optimizer lost control of the loss
    numeric,          // any other numeric-quality failure
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

    static int exit_code(ErrorKind k) {
        switch (k) {
        case ErrorKind::parse:
        case ErrorKind::format:
        case ErrorKind::data:
        case ErrorKind::shape:
        case ErrorKind::parameter:
            return 2;
        case ErrorKind::filter_integrity:
        case ErrorKind::divergence:
        case ErrorKind::numeric:
            return 3;
        }
        return 3;
    }

  private:
    ErrorKind kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorKind::parse, w) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(ErrorKind::format, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorKind::data, w) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorKind::shape, w) {}
};
struct ParameterError : Error {
    explicit ParameterError(const std::string& w) : Error(ErrorKind::parameter, w) {}
};
struct FilterIntegrityError : Error {
    explicit FilterIntegrityError(const std::string& w) : Error(ErrorKind::filter_integrity, w) {}
};
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& w) : Error(ErrorKind::divergence, w) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

} // namespace scatnet
