#include "poisonbench/common.hpp"

#include <cmath>
#include <cstdio>

namespace poisonbench {

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

DivergenceError::DivergenceError(int epoch, const std::string& what)
    : Error("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.hex();
}

std::size_t floor_fraction(double frac, std::size_t n) {
  const double x = frac * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(x + 1e-9));
}

}  // namespace poisonbench
