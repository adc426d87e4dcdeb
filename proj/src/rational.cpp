#include "fuller/rational.hpp"

#include "fuller/error.hpp"

namespace fuller {

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational parse_rational(const std::string& text) {
  try {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(text));
    auto den = std::stoll(text.substr(slash + 1));
    if (den == 0) fail(ErrorKind::InvalidInput, "zero denominator in '" + text + "'");
    return Rational(std::stoll(text.substr(0, slash)), den);
  } catch (const std::logic_error&) {
    fail(ErrorKind::InvalidInput, "not a rational: '" + text + "'");
  }
}

}  // namespace fuller
