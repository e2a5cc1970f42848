#ifndef PHONET_ERROR_HPP
#define PHONET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace phonet {

/// Malformed input text (corpus file, network file, config file).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a data invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical routine failed: non-convergence, zero variance, empty denominators.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace phonet

#endif // PHONET_ERROR_HPP
