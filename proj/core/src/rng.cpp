#include "gepa/rng.hpp"

#include <limits>
#include <sstream>

#include "gepa/digest.hpp"
#include "gepa/error.hpp"

namespace gepa {

std::uint64_t Rng::bounded(std::uint64_t n) {
  if (n == 0) raise(ErrorKind::invalid_argument, "bounded draw with n = 0");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::string Rng::state_digest() const {
  // operator<< emits the engine state as standard-specified decimal words.
  std::ostringstream os;
  os << engine_;
  return digest_hex(os.str());
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace gepa
