#ifndef FCERT_ERROR_HPP
#define FCERT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fcert {

// Caller passed something the math does not define (bad dimensions,
// out-of-range budgets, zero vectors under cosine, ...).
class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// External data is malformed (unparseable file, mixed dimensions, ...).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fcert

#endif
