#pragma once

// Little-endian binary encoding used by the bundle container.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "espin/core.hpp"

namespace espin::io {

static_assert(std::endian::native == std::endian::little, "bundle encoding assumes a little-endian host");

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void size(std::size_t v) { u64(static_cast<std::uint64_t>(v)); }

  void str(std::string_view s) {
    size(s.size());
    buf_.append(s.data(), s.size());
  }

  void f64s(const std::vector<double>& v) {
    size(v.size());
    for (double x : v) f64(x);
  }

  void sizes(const std::vector<std::size_t>& v) {
    size(v.size());
    for (auto x : v) size(x);
  }

  void strs(const std::vector<std::string>& v) {
    size(v.size());
    for (const auto& s : v) str(s);
  }

  void matrix(const Eigen::MatrixXd& m) {
    size(static_cast<std::size_t>(m.rows()));
    size(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }

  void vector(const Eigen::VectorXd& v) {
    size(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }

  void raw(std::string_view s) { buf_.append(s.data(), s.size()); }

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  std::int64_t i64() { return scalar<std::int64_t>(); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool boolean() { return u8() != 0; }

  std::size_t size() {
    const auto v = u64();
    if (v > data_.size()) throw Error("bundle_corrupt", "length field exceeds payload");
    return static_cast<std::size_t>(v);
  }

  std::string str() {
    const auto n = size();
    return std::string(take(n));
  }

  std::vector<double> f64s() {
    std::vector<double> v(size());
    for (auto& x : v) x = f64();
    return v;
  }

  std::vector<std::size_t> sizes() {
    std::vector<std::size_t> v(size());
    for (auto& x : v) x = static_cast<std::size_t>(u64());
    return v;
  }

  std::vector<std::string> strs() {
    std::vector<std::string> v(size());
    for (auto& s : v) s = str();
    return v;
  }

  Eigen::MatrixXd matrix() {
    const auto r = size();
    const auto c = size();
    if (r * c * 8 > remaining()) throw Error("bundle_corrupt", "matrix exceeds payload");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = f64();
    return m;
  }

  Eigen::VectorXd vector() {
    const auto n = size();
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

  std::string_view take(std::size_t n) {
    if (n > remaining()) throw Error("bundle_corrupt", "unexpected end of payload");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  template <typename T>
  T scalar() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace espin::io
