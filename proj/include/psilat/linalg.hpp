#pragma once

// Dense linear algebra over k: incremental reduced row echelon spaces, kernels
// and linear solves.

#include <algorithm>
#include <optional>
#include <vector>

#include "psilat/field.hpp"

namespace psilat {

using KVec = std::vector<FieldElem>;

inline bool is_zero_vec(const KVec& v) {
  return std::all_of(v.begin(), v.end(), [](FieldElem x) { return x.v == 0; });
}

/// a += c * b
inline void axpy(const Field& k, KVec& a, FieldElem c, const KVec& b, std::size_t from = 0) {
  if (c.v == 0) return;
  for (std::size_t i = from; i < a.size(); ++i)
    if (b[i].v != 0) a[i] = k.add(a[i], k.mul(c, b[i]));
}

/// A subspace of k^dim kept in reduced row echelon form; pivot = first nonzero
/// column. Rows are sorted by pivot.
class KSpace {
public:
  KSpace() = default;
  KSpace(const Field* k, std::size_t dim) : k_(k), dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return rows_.size(); }
  const std::vector<KVec>& rows() const { return rows_; }
  const std::vector<std::size_t>& pivots() const { return piv_; }
  const Field& field() const { return *k_; }

  /// Remainder of v after elimination against the pivots.
  KVec reduce(KVec v) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const FieldElem c = v[piv_[r]];
      if (c.v != 0) axpy(*k_, v, k_->neg(c), rows_[r], piv_[r]);
    }
    return v;
  }
  bool contains(const KVec& v) const { return is_zero_vec(reduce(v)); }

  /// Adds v; returns true iff the rank grew.
  bool insert(KVec v) {
    v = reduce(std::move(v));
    std::size_t p = 0;
    while (p < dim_ && v[p].v == 0) ++p;
    if (p == dim_) return false;
    const FieldElem inv = k_->inv(v[p]);
    for (std::size_t i = p; i < dim_; ++i) v[i] = k_->mul(v[i], inv);
    for (auto& row : rows_) {
      const FieldElem c = row[p];
      if (c.v != 0) axpy(*k_, row, k_->neg(c), v, p);
    }
    auto it = std::lower_bound(piv_.begin(), piv_.end(), p);
    const auto pos = it - piv_.begin();
    piv_.insert(it, p);
    rows_.insert(rows_.begin() + pos, std::move(v));
    return true;
  }

  bool contains_space(const KSpace& other) const {
    for (const auto& r : other.rows_)
      if (!contains(r)) return false;
    return true;
  }
  friend bool operator==(const KSpace& a, const KSpace& b) {
    return a.dim_ == b.dim_ && a.piv_ == b.piv_ && a.rows_ == b.rows_;
  }

  KSpace intersect(const KSpace& other) const {
    // Zassenhaus: rows (u | u) for u in this, (w | 0) for w in other.
    KSpace big(k_, 2 * dim_);
    for (const auto& r : rows_) {
      KVec v(2 * dim_);
      std::copy(r.begin(), r.end(), v.begin());
      std::copy(r.begin(), r.end(), v.begin() + dim_);
      big.insert(std::move(v));
    }
    for (const auto& r : other.rows_) {
      KVec v(2 * dim_);
      std::copy(r.begin(), r.end(), v.begin());
      big.insert(std::move(v));
    }
    KSpace out(k_, dim_);
    for (std::size_t i = 0; i < big.rank(); ++i) {
      if (big.piv_[i] < dim_) continue;
      out.insert(KVec(big.rows_[i].begin() + dim_, big.rows_[i].end()));
    }
    return out;
  }

private:
  const Field* k_ = nullptr;
  std::size_t dim_ = 0;
  std::vector<KVec> rows_;
  std::vector<std::size_t> piv_;
};

/// Kernel of the map e_i -> images[i] (each of length target_dim).
inline std::vector<KVec> kernel(const Field& k, const std::vector<KVec>& images, std::size_t target_dim) {
  const std::size_t n = images.size();
  KSpace aug(&k, target_dim + n);
  for (std::size_t i = 0; i < n; ++i) {
    KVec v(target_dim + n);
    std::copy(images[i].begin(), images[i].end(), v.begin());
    v[target_dim + i] = k.one();
    aug.insert(std::move(v));
  }
  std::vector<KVec> out;
  for (std::size_t r = 0; r < aug.rank(); ++r)
    if (aug.pivots()[r] >= target_dim) out.emplace_back(aug.rows()[r].begin() + target_dim, aug.rows()[r].end());
  return out;
}

/// Some c with sum c_i vecs[i] = target, or nullopt.
inline std::optional<KVec> solve(const Field& k, const std::vector<KVec>& vecs, const KVec& target) {
  const std::size_t dim = target.size(), n = vecs.size();
  KSpace aug(&k, dim + n);
  for (std::size_t i = 0; i < n; ++i) {
    KVec v(dim + n);
    std::copy(vecs[i].begin(), vecs[i].end(), v.begin());
    v[dim + i] = k.one();
    aug.insert(std::move(v));
  }
  KVec t(dim + n);
  std::copy(target.begin(), target.end(), t.begin());
  t = aug.reduce(std::move(t));
  for (std::size_t i = 0; i < dim; ++i)
    if (t[i].v != 0) return std::nullopt;
  // target - sum(-t_tail) ... reduce gives t = target - sum c_i (v_i | e_i)
  KVec c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = k.neg(t[dim + i]);
  return c;
}

/// Solve an affine system M x = b given by equation rows (coefficients | rhs).
/// Returns one solution or nullopt.
inline std::optional<KVec> solve_equations(const Field& k, const std::vector<KVec>& rows, const KVec& rhs, std::size_t nvars) {
  KSpace sp(&k, nvars + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    KVec v(nvars + 1);
    std::copy(rows[i].begin(), rows[i].end(), v.begin());
    v[nvars] = rhs[i];
    sp.insert(std::move(v));
  }
  KVec x(nvars, k.zero());
  for (std::size_t r = 0; r < sp.rank(); ++r) {
    const std::size_t p = sp.pivots()[r];
    if (p == nvars) return std::nullopt;
    x[p] = sp.rows()[r][nvars];
  }
  return x;
}

}  // namespace psilat
