#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reprocg/errors.hpp"
#include "reprocg/repro_reduce.hpp"

namespace reprocg {

/// Immutable compressed-sparse-row matrix for symmetric positive definite
/// systems. Construction validates the structure the solver relies on:
/// monotone row offsets, strictly increasing columns per row, structural
/// symmetry and a strictly positive diagonal in every row.
class CsrMatrix {
 public:
  using index_type = std::int32_t;

  CsrMatrix() = default;

  CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<index_type> col_idx,
            std::vector<double> values)
      : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    validate();
  }

  [[nodiscard]] std::size_t rows() const noexcept { return n_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  [[nodiscard]] std::span<const index_type> col_idx() const noexcept { return col_idx_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  [[nodiscard]] std::span<const index_type> row_cols(std::size_t i) const noexcept {
    return std::span(col_idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  [[nodiscard]] std::span<const double> row_values(std::size_t i) const noexcept {
    return std::span(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }

  /// a(i, j), or 0.0 when (i, j) is not stored.
  [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept {
    const auto cols = row_cols(i);
    std::size_t lo = 0, hi = cols.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (static_cast<std::size_t>(cols[mid]) < j) lo = mid + 1;
      else hi = mid;
    }
    return lo < cols.size() && static_cast<std::size_t>(cols[lo]) == j ? row_values(i)[lo] : 0.0;
  }

  [[nodiscard]] double diagonal(std::size_t i) const noexcept { return at(i, i); }

  /// Numerical symmetry: a(i, j) == a(j, i) bit for bit.
  [[nodiscard]] bool is_symmetric() const noexcept {
    for (std::size_t i = 0; i < n_; ++i) {
      const auto cols = row_cols(i);
      const auto vals = row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (at(static_cast<std::size_t>(cols[k]), i) != vals[k]) return false;
    }
    return true;
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  void validate() const {
    if (n_ > static_cast<std::size_t>(std::numeric_limits<index_type>::max()))
      throw usage_error("CsrMatrix: dimension exceeds the 32-bit index range");
    if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
        col_idx_.size() != values_.size())
      throw precondition_error("CsrMatrix: inconsistent array sizes");
    for (std::size_t i = 0; i < n_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1]) throw precondition_error("CsrMatrix: row offsets not monotone");
      bool diag = false;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const auto c = col_idx_[k];
        if (c < 0 || static_cast<std::size_t>(c) >= n_) throw precondition_error("CsrMatrix: column out of range");
        if (k > row_ptr_[i] && col_idx_[k - 1] >= c)
          throw precondition_error("CsrMatrix: columns not strictly increasing in row " + std::to_string(i));
        if (!std::isfinite(values_[k])) throw precondition_error("CsrMatrix: non-finite entry");
        if (static_cast<std::size_t>(c) == i) {
          diag = true;
          if (!(values_[k] > 0.0))
            throw precondition_error("CsrMatrix: non-positive diagonal in row " + std::to_string(i));
        }
      }
      if (!diag) throw precondition_error("CsrMatrix: missing diagonal in row " + std::to_string(i));
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (auto c : row_cols(i))
        if (!has_entry(static_cast<std::size_t>(c), i))
          throw precondition_error("CsrMatrix: not structurally symmetric");
  }

  [[nodiscard]] bool has_entry(std::size_t i, std::size_t j) const noexcept {
    const auto cols = row_cols(i);
    return std::binary_search(cols.begin(), cols.end(), static_cast<index_type>(j));
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<index_type> col_idx_;
  std::vector<double> values_;
};

/// Triplet assembly: entries sorted per row, duplicates summed.
struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

[[nodiscard]] inline CsrMatrix assemble_csr(std::size_t n, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<CsrMatrix::index_type> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& t = entries[k];
    if (t.row >= n || t.col >= n) throw precondition_error("assemble_csr: index out of range");
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(static_cast<CsrMatrix::index_type>(t.col));
    vals.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
  return CsrMatrix(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

namespace detail {

inline void spmv_rows(const CsrMatrix& a, std::span<const double> x, std::span<double> y, std::size_t begin,
                      std::size_t end) noexcept {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto va = a.values();
  for (std::size_t i = begin; i < end; ++i) {
    double w = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) w = std::fma(va[k], x[static_cast<std::size_t>(ci[k])], w);
    y[i] = w;
  }
}

}  // namespace detail

/// y := A x. Each row is one left-to-right fma chain from +0.0, so the
/// result does not depend on how rows are distributed.
inline void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.rows() || y.size() != a.rows()) throw usage_error("spmv: dimension mismatch");
  detail::spmv_rows(a, x, y, 0, a.rows());
}

/// Row-partitioned y := A x: rows split into process blocks, each block
/// tiled into chunks of `chunk` rows run by the scheduled workers.
inline void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y, const Topology& topo,
                 Schedule& sched) {
  topo.validate();
  if (x.size() != a.rows() || y.size() != a.rows()) throw usage_error("spmv: dimension mismatch");
  struct NoState {};
  std::vector<NoState> workers(topo.workers);
  for (std::size_t k = 0; k < topo.processes; ++k) {
    const auto r = topo.process_range(a.rows(), k);
    detail::for_each_chunk(topo, sched, r.begin, r.end, workers,
                           [&](NoState&, std::size_t b, std::size_t e) { detail::spmv_rows(a, x, y, b, e); });
  }
}

/// Rows assigned by an arbitrary owner map: owner[i] is the block that
/// computes row i. Blocks are executed in ascending order.
inline void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
                 std::span<const std::size_t> owner, std::size_t blocks) {
  if (x.size() != a.rows() || y.size() != a.rows() || owner.size() != a.rows())
    throw usage_error("spmv: dimension mismatch");
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t i = 0; i < a.rows(); ++i)
      if (owner[i] == b) detail::spmv_rows(a, x, y, i, i + 1);
}

[[nodiscard]] inline std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  spmv(a, x, y);
  return y;
}

}  // namespace reprocg
