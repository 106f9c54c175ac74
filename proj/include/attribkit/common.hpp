#pragma once
// Shared infrastructure: error types, a pinned deterministic RNG, byte-level
// IO helpers, a minimal dense matrix, and number formatting.
//
// Everything that must be reproducible bit-for-bit across runs goes through
// the primitives in this header: random draws, shuffles, binary encoding and
// decimal formatting are all pinned here rather than left to
// implementation-defined library behavior.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace attribkit {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------
// IoError / FormatError / ValidationError are data errors (CLI exit 2);
// NumericError is a numerical failure (CLI exit 3).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File cannot be opened, magic mismatch, truncation.
class IoError : public Error {
 public:
  using Error::Error;
};

// File opened but its content does not parse.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Parsed data violates a domain invariant (duplicate id, off-simplex slice,
// unknown attack id, shape mismatch).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced during computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Dense row-major matrix of doubles
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix{};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw ValidationError("Matrix::from_rows: ragged input at row " +
                              std::to_string(i));
      std::copy(rows[i].begin(), rows[i].end(), m.row_ptr(i));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<double> row(std::size_t i) { return {row_ptr(i), cols_}; }
  std::span<const double> row(std::size_t i) const { return {row_ptr(i), cols_}; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void push_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_)
      throw ValidationError("Matrix::push_row: expected " + std::to_string(cols_) +
                            " columns, got " + std::to_string(r.size()));
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }
  void push_row(std::initializer_list<double> r) {
    push_row(std::span<const double>(r.begin(), r.size()));
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

// ---------------------------------------------------------------------------
// Hashing and seed derivation
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derives a sub-seed from a base seed and a list of string tags. A zero byte
// is folded after every part so ("ab","c") and ("a","bc") differ.
inline std::uint64_t mix_seed(std::uint64_t seed,
                              std::initializer_list<std::string_view> parts) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  for (std::string_view p : parts) {
    h = fnv1a64(p, h);
    h ^= 0u;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Pinned RNG
// ---------------------------------------------------------------------------
// mt19937_64 has a standardized output sequence; distributions do not. All
// derived draws (uniform, normal, bounded, shuffle) are implemented here so
// that results are identical across standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0,1); safe for log().
  double uniform_open() {
    return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Standard normal via Box-Muller, spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n). Multiply-shift map; bias is < 2^-64 and
  // irrelevant for tie-breaking, determinism is what matters.
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Fisher-Yates; std::shuffle is implementation-defined, this is not.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Little-endian byte IO
// ---------------------------------------------------------------------------
// Explicit byte assembly; no dependence on host endianness or struct layout.

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    offset_ += n;
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str16(std::string_view s) {
    if (s.size() > 0xffff)
      throw ValidationError("string too long for u16-length encoding");
    u16(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::uint64_t offset() const { return offset_; }

 private:
  void put_le(std::uint64_t v, int n) {
    unsigned char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    bytes(buf, static_cast<std::size_t>(n));
  }
  std::ostream& out_;
  std::uint64_t offset_ = 0;
};

class ByteReader {
 public:
  ByteReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw IoError("truncated file at byte offset " + std::to_string(offset_) +
                    " in " + name_);
    offset_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str16() {
    const std::uint16_t n = u16();
    std::string s(n, '\0');
    if (n > 0) bytes(s.data(), n);
    return s;
  }
  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }
  std::uint64_t offset() const { return offset_; }
  const std::string& name() const { return name_; }

 private:
  std::uint64_t get_le(int n) {
    unsigned char buf[8];
    bytes(buf, static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
  std::string name_;
  std::uint64_t offset_ = 0;
};

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

// Canonical 9-significant-digit form used by CSV embedding files.
inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Round-trip-exact form for doubles in text reports.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Parallelism cap
// ---------------------------------------------------------------------------
// ATTRIB_TRACE_THREADS caps worker threads; 0 or unset picks the hardware
// count. Work is split into contiguous chunks so reduction order stays fixed.

inline int trace_threads() {
  const char* env = std::getenv("ATTRIB_TRACE_THREADS");
  int v = env ? std::atoi(env) : 0;
  if (v <= 0) {
    v = static_cast<int>(std::thread::hardware_concurrency());
    if (v <= 0) v = 1;
  }
  return v;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(trace_threads()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace attribkit
