#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include "olabuf/error.hpp"

namespace olabuf {

using index_t = std::int64_t;

/// Indexed source of reals. Every algorithm in the library reads its input
/// through this interface so that access counts can be instrumented.
template <class A>
concept ReadableArray = requires(const A &a, index_t i) {
  { a.size() } -> std::convertible_to<index_t>;
  { a.get(i) } -> std::convertible_to<double>;
};

template <class A>
concept WritableArray = ReadableArray<A> && requires(A &a, index_t i, double v) { a.set(i, v); };

/// Plain in-memory array.
class MemoryArray {
public:
  MemoryArray() = default;
  explicit MemoryArray(index_t n, double fill = 0.0) : data_(static_cast<std::size_t>(n), fill) {}
  explicit MemoryArray(std::vector<double> values) : data_(std::move(values)) {}
  MemoryArray(std::initializer_list<double> values) : data_(values) {}

  index_t size() const { return static_cast<index_t>(data_.size()); }

  double get(index_t i) const {
    detail::check_index(i, size(), "MemoryArray::get");
    return data_[static_cast<std::size_t>(i)];
  }

  void set(index_t i, double v) {
    detail::check_index(i, size(), "MemoryArray::set");
    data_[static_cast<std::size_t>(i)] = v;
  }

  std::span<const double> values() const { return data_; }

private:
  std::vector<double> data_;
};

/// Synthetic read-only array a_i = sin(i), the benchmark source.
class VirtualSineArray {
public:
  explicit VirtualSineArray(index_t n) : n_(n) {}

  index_t size() const { return n_; }

  double get(index_t i) const {
    detail::check_index(i, n_, "VirtualSineArray::get");
    return std::sin(static_cast<double>(i));
  }

  [[noreturn]] void set(index_t, double) {
    throw unsupported_error("VirtualSineArray is read-only");
  }

private:
  index_t n_;
};

/// Decorator counting every get and set on the wrapped array. Counters are
/// relaxed atomics, so concurrent readers may share one instance.
template <ReadableArray A>
class CountingArray {
public:
  explicit CountingArray(A &inner) : inner_(&inner) {}

  CountingArray(const CountingArray &other)
      : inner_(other.inner_), reads_(other.reads()), writes_(other.writes()) {}

  CountingArray &operator=(const CountingArray &other) {
    inner_ = other.inner_;
    reads_.store(other.reads(), std::memory_order_relaxed);
    writes_.store(other.writes(), std::memory_order_relaxed);
    return *this;
  }

  index_t size() const { return static_cast<index_t>(inner_->size()); }

  double get(index_t i) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    return inner_->get(i);
  }

  void set(index_t i, double v)
    requires WritableArray<A>
  {
    writes_.fetch_add(1, std::memory_order_relaxed);
    inner_->set(i, v);
  }

  std::uint64_t reads() const { return reads_.load(std::memory_order_relaxed); }
  std::uint64_t writes() const { return writes_.load(std::memory_order_relaxed); }

  void reset() {
    reads_.store(0, std::memory_order_relaxed);
    writes_.store(0, std::memory_order_relaxed);
  }

  A &inner() const { return *inner_; }

private:
  A *inner_;
  mutable std::atomic<std::uint64_t> reads_{0};
  std::atomic<std::uint64_t> writes_{0};
};

namespace detail {

template <class T>
T from_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
T to_little_endian(T v) {
  return from_little_endian(v);
}

} // namespace detail

/// Element encoding of a raw array file.
enum class ElementWidth : int { f64 = 8, f32 = 4 };

/// Memory-mapped raw array file: no header, packed little-endian IEEE-754
/// values. The default width is 8 bytes; the 4-byte mode exists for size
/// parity with single-precision datasets.
class FileArray {
public:
  enum class Mode { read_only, read_write };

  explicit FileArray(const std::filesystem::path &path, Mode mode = Mode::read_only,
                     ElementWidth width = ElementWidth::f64)
      : width_(static_cast<int>(width)), writable_(mode == Mode::read_write) {
    fd_ = ::open(path.c_str(), writable_ ? O_RDWR : O_RDONLY);
    if (fd_ < 0) {
      throw io_error("cannot open array file " + path.string());
    }
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
      ::close(fd_);
      throw io_error("cannot stat array file " + path.string());
    }
    bytes_ = static_cast<std::size_t>(st.st_size);
    if (bytes_ % static_cast<std::size_t>(width_) != 0) {
      ::close(fd_);
      throw io_error("array file length " + std::to_string(bytes_) +
                     " is not a multiple of the element width");
    }
    n_ = static_cast<index_t>(bytes_ / static_cast<std::size_t>(width_));
    if (bytes_ > 0) {
      int prot = PROT_READ | (writable_ ? PROT_WRITE : 0);
      void *p = ::mmap(nullptr, bytes_, prot, MAP_SHARED, fd_, 0);
      if (p == MAP_FAILED) {
        ::close(fd_);
        throw io_error("cannot map array file " + path.string());
      }
      base_ = static_cast<unsigned char *>(p);
    }
  }

  FileArray(const FileArray &) = delete;
  FileArray &operator=(const FileArray &) = delete;

  FileArray(FileArray &&other) noexcept
      : fd_(std::exchange(other.fd_, -1)), base_(std::exchange(other.base_, nullptr)),
        bytes_(std::exchange(other.bytes_, 0)), n_(std::exchange(other.n_, 0)),
        width_(other.width_), writable_(other.writable_) {}

  ~FileArray() {
    if (base_ != nullptr) {
      ::munmap(base_, bytes_);
    }
    if (fd_ >= 0) {
      ::close(fd_);
    }
  }

  index_t size() const { return n_; }

  double get(index_t i) const {
    detail::check_index(i, n_, "FileArray::get");
    const unsigned char *p = base_ + static_cast<std::size_t>(i) * static_cast<std::size_t>(width_);
    if (width_ == 8) {
      double v;
      std::memcpy(&v, p, sizeof v);
      return detail::from_little_endian(v);
    }
    float v;
    std::memcpy(&v, p, sizeof v);
    return static_cast<double>(detail::from_little_endian(v));
  }

  void set(index_t i, double v) {
    if (!writable_) {
      throw unsupported_error("FileArray opened read-only");
    }
    detail::check_index(i, n_, "FileArray::set");
    unsigned char *p = base_ + static_cast<std::size_t>(i) * static_cast<std::size_t>(width_);
    if (width_ == 8) {
      double le = detail::to_little_endian(v);
      std::memcpy(p, &le, sizeof le);
    } else {
      float le = detail::to_little_endian(static_cast<float>(v));
      std::memcpy(p, &le, sizeof le);
    }
  }

private:
  int fd_ = -1;
  unsigned char *base_ = nullptr;
  std::size_t bytes_ = 0;
  index_t n_ = 0;
  int width_;
  bool writable_;
};

/// Writes values as a raw array file readable by FileArray.
inline void write_array_file(const std::filesystem::path &path, std::span<const double> values,
                             ElementWidth width = ElementWidth::f64) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create array file " + path.string());
  }
  for (double v : values) {
    if (width == ElementWidth::f64) {
      double le = detail::to_little_endian(v);
      out.write(reinterpret_cast<const char *>(&le), sizeof le);
    } else {
      float le = detail::to_little_endian(static_cast<float>(v));
      out.write(reinterpret_cast<const char *>(&le), sizeof le);
    }
  }
  if (!out) {
    throw io_error("write failed for " + path.string());
  }
}

/// Copies any readable array into memory.
template <ReadableArray A>
MemoryArray materialize(const A &a) {
  std::vector<double> v(static_cast<std::size_t>(a.size()));
  for (index_t i = 0; i < a.size(); ++i) {
    v[static_cast<std::size_t>(i)] = a.get(i);
  }
  return MemoryArray(std::move(v));
}

} // namespace olabuf
