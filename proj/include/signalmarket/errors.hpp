#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace signalmarket {

// Bad configuration, malformed input or an infeasible request. CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to converge or produced a degenerate result.
// CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string to_piece(const std::string& s) { return s; }
inline std::string to_piece(const char* s) { return s; }
inline std::string to_piece(std::string_view s) { return std::string(s); }
template <typename T>
std::string to_piece(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

template <typename... Parts>
std::string concat(const Parts&... parts) {
  std::string out;
  (out.append(to_piece(parts)), ...);
  return out;
}

}  // namespace detail

template <typename... Parts>
[[noreturn]] void throw_input(const Parts&... parts) {
  throw InputError(detail::concat(parts...));
}

template <typename... Parts>
[[noreturn]] void throw_numerical(const Parts&... parts) {
  throw NumericalError(detail::concat(parts...));
}

}  // namespace signalmarket
