#pragma once

#include <stdexcept>
#include <string>

namespace uiq {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Bad argument or violated precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

// A sampler or search hit its configured resource cap.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace uiq
