#include "fhn/interval.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace fhn {

Interval interval_from_decimal(const std::string& text) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) throw std::invalid_argument("not a decimal literal: " + text);
  return Interval(v).widened_ulp();
}

std::string to_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double from_hex(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

std::string interval_to_string(const Interval& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << v.lo() << ", " << v.hi() << "]";
  return os.str();
}

}  // namespace fhn
