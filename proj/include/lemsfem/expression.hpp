#ifndef LEMSFEM_EXPRESSION_HPP_
#define LEMSFEM_EXPRESSION_HPP_

#include <functional>
#include <string>

namespace lemsfem {

/**
 * Compiles an arithmetic expression in the variables x and y.
 *
 * Grammar: numbers, x, y, pi, + - * / ^ (right associative), unary minus,
 * parentheses and the functions sin cos tan exp log sqrt abs.
 * Throws ConfigError with the offending column on malformed input.
 */
std::function<double(double, double)> compile_expression(const std::string& text);

}  // namespace lemsfem

#endif  // LEMSFEM_EXPRESSION_HPP_
