#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stabkit {

// Input could not be tokenized or does not follow the grammar / file format.
// Carries a position: byte offset for expression text, line/column for files.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string msg, std::size_t offset,
                std::vector<std::string> expected = {})
        : std::runtime_error(std::move(msg)), offset_(offset),
          expected_(std::move(expected)) {}

    parse_error(std::string msg, std::size_t line, std::size_t column)
        : std::runtime_error(std::move(msg)), offset_(0), line_(line),
          column_(column) {}

    std::size_t offset() const { return offset_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_ = 0;
    std::size_t line_ = 0;   // 1-based, 0 when not applicable
    std::size_t column_ = 0; // 1-based, 0 when not applicable
    std::vector<std::string> expected_;
};

// Well-formed input that violates a domain invariant (range, shape, index).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(std::string msg)
        : std::runtime_error(std::move(msg)) {}
};

// Arithmetic failure during evaluation (division by zero, NaN from pow).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(std::string msg)
        : std::runtime_error(std::move(msg)) {}
};

} // namespace stabkit
