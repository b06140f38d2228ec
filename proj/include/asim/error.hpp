#pragma once

#include <stdexcept>
#include <string>

namespace asim {

// Base class for all errors raised by the library. CLI maps these to exit code 2.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error("parse error: " + msg) {}
};

class validation_error : public error {
public:
    explicit validation_error(const std::string& msg) : error("validation error: " + msg) {}
};

}  // namespace asim
