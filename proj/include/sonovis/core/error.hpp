#pragma once

#include <stdexcept>
#include <string>

namespace sonovis {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCode {
    InvalidInput = 2,
    MissingInput = 3,
    Incompatible = 4,
    Runtime = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    const char* code_name() const {
        switch (code_) {
            case ErrorCode::InvalidInput: return "invalid-input";
            case ErrorCode::MissingInput: return "missing-input";
            case ErrorCode::Incompatible: return "incompatible";
            case ErrorCode::Runtime: return "runtime";
        }
        return "unknown";
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool cond, ErrorCode code, const std::string& message) {
    if (!cond) fail(code, message);
}

}  // namespace sonovis
