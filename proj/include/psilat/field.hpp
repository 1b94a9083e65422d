#pragma once

// Arithmetic in k = F_{p^m}, given by an explicit monic irreducible modulus.

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psilat/errors.hpp"

namespace psilat {

/// An element of k, packed as sum c_i p^i of its coordinates w.r.t. 1, u, ..., u^{m-1}.
struct FieldElem {
  std::uint32_t v = 0;

  friend bool operator==(FieldElem a, FieldElem b) { return a.v == b.v; }
  friend bool operator!=(FieldElem a, FieldElem b) { return a.v != b.v; }
  friend bool operator<(FieldElem a, FieldElem b) { return a.v < b.v; }
};

struct FieldParams {
  int p = 2;
  int m = 1;
  /// Monic modulus, coefficients from degree 0 to degree m. Empty: pick the default.
  std::vector<int> modulus;
  /// Residue degree of F, f | m; q = p^f.
  int f = 1;
};

namespace detail {

inline bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Remainder of a modulo monic b over F_p; coefficient vectors low to high.
inline std::vector<int> poly_mod(std::vector<int> a, const std::vector<int>& b, int p) {
  const int db = static_cast<int>(b.size()) - 1;
  for (int i = static_cast<int>(a.size()) - 1; i >= db; --i) {
    const int c = a[i] % p;
    if (c == 0) continue;
    for (int j = 0; j <= db; ++j) a[i - db + j] = ((a[i - db + j] - c * b[j]) % p + p) % p;
  }
  a.resize(std::max(db, 0));
  return a;
}

inline bool is_irreducible(const std::vector<int>& poly, int p) {
  const int m = static_cast<int>(poly.size()) - 1;
  // Trial division by every monic polynomial of degree 1..m/2.
  for (int d = 1; 2 * d <= m; ++d) {
    const long count = ipow(p, d);
    for (long code = 0; code < count; ++code) {
      std::vector<int> div(d + 1, 0);
      long c = code;
      for (int i = 0; i < d; ++i) {
        div[i] = static_cast<int>(c % p);
        c /= p;
      }
      div[d] = 1;
      auto r = poly_mod(poly, div, p);
      bool zero = true;
      for (int x : r) zero = zero && x == 0;
      if (zero) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Lexicographically first monic irreducible polynomial of degree m over F_p.
inline std::vector<int> default_modulus(int p, int m) {
  if (m == 1) return {0, 1};
  const long count = detail::ipow(p, m);
  for (long code = 0; code < count; ++code) {
    std::vector<int> poly(m + 1, 0);
    long c = code;
    for (int i = 0; i < m; ++i) {
      poly[i] = static_cast<int>(c % p);
      c /= p;
    }
    poly[m] = 1;
    if (detail::is_irreducible(poly, p)) return poly;
  }
  throw InvalidArgument("no irreducible polynomial found");
}

class Field {
public:
  explicit Field(FieldParams params) : params_(std::move(params)) {
    const int p = params_.p;
    const int m = params_.m;
    if (!detail::is_prime(p)) throw InvalidArgument("p must be prime");
    if (m < 1) throw InvalidArgument("m must be >= 1");
    if (params_.f < 1 || m % params_.f != 0) throw InvalidArgument("f must divide m");
    if (params_.modulus.empty()) params_.modulus = default_modulus(p, m);
    auto& mod = params_.modulus;
    if (static_cast<int>(mod.size()) != m + 1 || mod[m] % p != 1)
      throw InvalidArgument("modulus must be monic of degree m");
    for (int& c : mod) c = ((c % p) + p) % p;
    if (!detail::is_irreducible(mod, p)) throw InvalidArgument("modulus is not irreducible");
    order_ = static_cast<std::uint32_t>(detail::ipow(p, m));
    q_ = detail::ipow(p, params_.f);
    if (order_ <= kTableLimit) build_tables();
  }

  const FieldParams& params() const { return params_; }
  int characteristic() const { return params_.p; }
  int degree() const { return params_.m; }
  std::uint32_t order() const { return order_; }
  long q() const { return q_; }

  FieldElem zero() const { return {0}; }
  FieldElem one() const { return {1}; }
  FieldElem from_int(long n) const {
    const long p = params_.p;
    return {static_cast<std::uint32_t>(((n % p) + p) % p)};
  }
  /// The class of u (the root of the modulus); equals from_int(-mod[0]) when m = 1.
  FieldElem generator() const {
    if (params_.m == 1) return from_int(-params_.modulus[0]);
    return {static_cast<std::uint32_t>(params_.p)};
  }
  FieldElem from_coords(const std::vector<int>& c) const {
    std::uint32_t v = 0, w = 1;
    const int p = params_.p;
    for (int i = 0; i < params_.m; ++i) {
      const int x = i < static_cast<int>(c.size()) ? ((c[i] % p) + p) % p : 0;
      v += static_cast<std::uint32_t>(x) * w;
      w *= static_cast<std::uint32_t>(p);
    }
    return {v};
  }
  std::vector<int> coords(FieldElem a) const {
    std::vector<int> c(params_.m);
    for (int i = 0; i < params_.m; ++i) {
      c[i] = static_cast<int>(a.v % params_.p);
      a.v /= params_.p;
    }
    return c;
  }

  bool is_zero(FieldElem a) const { return a.v == 0; }

  FieldElem add(FieldElem a, FieldElem b) const {
    if (!add_.empty()) return {add_[a.v * order_ + b.v]};
    auto x = coords(a), y = coords(b);
    for (int i = 0; i < params_.m; ++i) x[i] += y[i];
    return from_coords(x);
  }
  FieldElem neg(FieldElem a) const {
    if (!neg_.empty()) return {neg_[a.v]};
    auto x = coords(a);
    for (int& c : x) c = -c;
    return from_coords(x);
  }
  FieldElem sub(FieldElem a, FieldElem b) const { return add(a, neg(b)); }
  FieldElem mul(FieldElem a, FieldElem b) const {
    if (!mul_.empty()) return {mul_[a.v * order_ + b.v]};
    return mul_slow(a, b);
  }
  FieldElem inv(FieldElem a) const {
    if (a.v == 0) throw DivisionByZero("inverse of zero in F_" + std::to_string(order_));
    if (!inv_.empty()) return {inv_[a.v]};
    return pow(a, static_cast<long>(order_) - 2);
  }
  FieldElem div(FieldElem a, FieldElem b) const { return mul(a, inv(b)); }
  FieldElem pow(FieldElem a, long e) const {
    if (e < 0) return pow(inv(a), -e);
    FieldElem r = one();
    while (e > 0) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  FieldElem frobenius_q(FieldElem a) const { return pow(a, q_); }

  /// Coordinates as "c0" for prime fields and "[c0,c1,...]" otherwise.
  std::string to_string(FieldElem a) const {
    auto c = coords(a);
    if (params_.m == 1) return std::to_string(c[0]);
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < params_.m; ++i) os << (i ? "," : "") << c[i];
    os << ']';
    return os.str();
  }
  FieldElem parse(const std::string& s) const {
    std::string t;
    for (char ch : s)
      if (ch != ' ') t += ch;
    try {
      if (!t.empty() && t.front() == '[') {
        if (t.back() != ']') throw ParseError("bad field literal '" + s + "'");
        std::vector<int> c;
        std::stringstream ss(t.substr(1, t.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) c.push_back(std::stoi(item));
        if (static_cast<int>(c.size()) > params_.m)
          throw ParseError("too many coordinates in '" + s + "'");
        return from_coords(c);
      }
      std::size_t used = 0;
      const long n = std::stol(t, &used);
      if (used != t.size()) throw ParseError("bad field literal '" + s + "'");
      return from_int(n);
    } catch (const std::logic_error&) {
      throw ParseError("bad field literal '" + s + "'");
    }
  }

private:
  static constexpr std::uint32_t kTableLimit = 256;

  FieldElem mul_slow(FieldElem a, FieldElem b) const {
    const int p = params_.p, m = params_.m;
    auto x = coords(a), y = coords(b);
    std::vector<int> prod(2 * m - 1, 0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
    return from_coords(detail::poly_mod(prod, params_.modulus, p));
  }

  void build_tables() {
    const std::uint32_t n = order_;
    add_.resize(n * n);
    mul_.resize(n * n);
    neg_.resize(n);
    inv_.assign(n, 0);
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = 0; b < n; ++b) {
        auto x = coords({a}), y = coords({b});
        for (int i = 0; i < params_.m; ++i) x[i] += y[i];
        add_[a * n + b] = static_cast<std::uint16_t>(from_coords(x).v);
        mul_[a * n + b] = static_cast<std::uint16_t>(mul_slow({a}, {b}).v);
      }
    }
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b) {
        if (add_[a * n + b] == 0) neg_[a] = static_cast<std::uint16_t>(b);
        if (mul_[a * n + b] == 1) inv_[a] = static_cast<std::uint16_t>(b);
      }
  }

  FieldParams params_;
  std::uint32_t order_ = 0;
  long q_ = 0;
  std::vector<std::uint16_t> add_, mul_, neg_, inv_;
};

using FieldPtr = std::shared_ptr<const Field>;

inline FieldPtr make_field(int p, int m = 1, int f = 1, std::vector<int> modulus = {}) {
  return std::make_shared<const Field>(FieldParams{p, m, std::move(modulus), f});
}

}  // namespace psilat
