#pragma once

#include <stdexcept>
#include <string>

namespace olabuf {

/// Invalid construction or query parameter (bin size, moment count, arity).
class parameter_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Index or range outside the valid extent of an array or buffer.
class bounds_error : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operation not supported by this backing (e.g. set on a read-only array).
class unsupported_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void check_range(long long lo, long long hi, long long n, const char *what) {
  if (lo < 0 || hi < lo || hi >= n) {
    throw bounds_error(std::string(what) + ": range [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "] outside [0, " + std::to_string(n) + ")");
  }
}

inline void check_index(long long i, long long n, const char *what) {
  if (i < 0 || i >= n) {
    throw bounds_error(std::string(what) + ": index " + std::to_string(i) + " outside [0, " +
                       std::to_string(n) + ")");
  }
}

} // namespace detail
} // namespace olabuf
