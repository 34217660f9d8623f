#pragma once

#include "wcert/module.hpp"
#include "wcert/orbifold.hpp"

#include <map>
#include <optional>

namespace wcert {

/// Coordinate in a direct sum: (slot, monomial).
struct Coord {
  std::size_t slot = 0;
  Monomial mono;

  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

using SparseVector = std::map<Coord, Scalar>;

SparseVector to_sparse(const ModuleVector& v, std::size_t slot = 0);
SparseVector to_sparse(const DirectSumVector& v);
DirectSumVector from_sparse(const SparseVector& v, std::size_t slots);

void axpy(SparseVector& y, const Scalar& a, const SparseVector& x);
bool sparse_equal(const SparseVector& a, const SparseVector& b);

/// Exact row-reduced basis of a growing subspace. Each row remembers how it
/// was combined from the vectors handed to insert(), so membership comes with
/// an explicit expression in those inputs.
class SpanBasis {
public:
  using Combination = std::map<std::size_t, Scalar>;

  /// Returns true iff the rank grew; only then does the input get the next
  /// raw id.
  bool insert(const SparseVector& v);
  bool contains(const SparseVector& v) const;
  /// Coefficients c with v = sum c[k] raw_k, if v is in the span.
  std::optional<Combination> express(const SparseVector& v) const;

  std::size_t rank() const { return rows_.size(); }
  std::size_t raw_count() const { return raw_count_; }
  /// Pivot coordinates in increasing order.
  std::vector<Coord> pivots() const;

private:
  struct Row {
    SparseVector vec; // pivot coefficient is 1
    Combination combo;
  };
  // Reduces v against every row; returns the combination that was subtracted.
  void reduce(SparseVector& v, Combination& combo) const;

  std::map<Coord, Row> rows_;
  std::size_t raw_count_ = 0;
};

/// Rank of a dense matrix by Gaussian elimination; test oracle.
std::size_t dense_rank(std::vector<std::vector<Scalar>> rows);

} // namespace wcert
