#pragma once

#include <cstdint>
#include <string>

#include <boost/rational.hpp>

namespace fuller {

using Rational = boost::rational<std::int64_t>;

// "p/q", or "p" when q = 1
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& text);

}  // namespace fuller
