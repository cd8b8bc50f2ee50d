#pragma once

#include <stdexcept>
#include <string>

namespace synthact {

// Malformed or invariant-violating input data. Messages carry the offending
// file/field path where one exists.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace synthact
