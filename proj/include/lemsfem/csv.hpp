#ifndef LEMSFEM_CSV_HPP_
#define LEMSFEM_CSV_HPP_

#include <cmath>
#include <cstdio>
#include <string>

namespace lemsfem {

/// 17 significant digits, '.' separator; "inf", "-inf" and "nan" spelled out.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace lemsfem

#endif  // LEMSFEM_CSV_HPP_
