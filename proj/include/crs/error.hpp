#pragma once

#include <stdexcept>
#include <string>

namespace crs {

enum class ErrorCode {
    Io = 1,
    Schema,
    Parse,
    Shape,
    Parameter,
    Stratification,
    DegenerateData,
    Admission,
    DegenerateWeights,
    Domain,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace crs
