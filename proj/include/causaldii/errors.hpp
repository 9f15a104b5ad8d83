#pragma once

#include <stdexcept>
#include <string>

namespace causaldii {

// Invalid input data or arguments. The CLI maps this family to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure on structurally valid input. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroPriceError : public ValidationError {
public:
    ZeroPriceError(std::size_t row, const std::string& column)
        : ValidationError("zero price at row " + std::to_string(row) +
                          ", column '" + column + "': returns are undefined") {}
};

class NonFiniteError : public ValidationError {
public:
    NonFiniteError(const std::string& what) : ValidationError(what) {}
    NonFiniteError(std::size_t row, const std::string& column)
        : ValidationError("non-finite value at row " + std::to_string(row) +
                          ", column '" + column + "'") {}
};

class ConstantColumnError : public ValidationError {
public:
    explicit ConstantColumnError(const std::string& column)
        : ValidationError("column '" + column +
                          "' is constant: standardisation is undefined") {}
};

class SeriesTooShortError : public ValidationError {
public:
    SeriesTooShortError(const std::string& op, std::size_t have, std::size_t need)
        : ValidationError(op + ": series has " + std::to_string(have) +
                          " observations, needs at least " + std::to_string(need)) {}
};

class DimensionMismatchError : public ValidationError {
public:
    explicit DimensionMismatchError(const std::string& what) : ValidationError(what) {}
};

class UnknownVariableError : public ValidationError {
public:
    explicit UnknownVariableError(const std::string& name)
        : ValidationError("unknown variable '" + name + "'") {}
};

class CsvFormatError : public ValidationError {
public:
    explicit CsvFormatError(const std::string& what) : ValidationError(what) {}
};

class MaskMismatchError : public ValidationError {
public:
    explicit MaskMismatchError(const std::string& what) : ValidationError(what) {}
};

class TooFewAdmissiblePairsError : public ValidationError {
public:
    TooFewAdmissiblePairsError(std::size_t row, std::size_t count)
        : ValidationError("row " + std::to_string(row) + " has only " +
                          std::to_string(count) +
                          " admissible neighbours; need at least 2 (exclusion window "
                          "too wide for the sample)") {}
};

class InsufficientDataError : public ValidationError {
public:
    explicit InsufficientDataError(const std::string& what) : ValidationError(what) {}
};

class DegenerateScaleError : public NumericError {
public:
    explicit DegenerateScaleError(std::size_t row)
        : NumericError("all admissible neighbour distances of row " +
                       std::to_string(row) +
                       " are zero: softmax scale is degenerate") {}
};

class SingularDesignError : public NumericError {
public:
    explicit SingularDesignError(const std::string& what) : NumericError(what) {}
};

class DegenerateRssError : public NumericError {
public:
    explicit DegenerateRssError(const std::string& what) : NumericError(what) {}
};

class NonFiniteLossError : public NumericError {
public:
    explicit NonFiniteLossError(std::size_t epoch)
        : NumericError("optimisation loss became non-finite at epoch " +
                       std::to_string(epoch)) {}
};

} // namespace causaldii
