#include "wcert/span.hpp"

namespace wcert {

SparseVector to_sparse(const ModuleVector& v, std::size_t slot) {
  SparseVector out;
  for (const auto& [u, c] : v.terms()) out.emplace_hint(out.end(), Coord{slot, u}, c);
  return out;
}

SparseVector to_sparse(const DirectSumVector& v) {
  SparseVector out;
  for (std::size_t s = 0; s < v.components.size(); ++s)
    for (const auto& [u, c] : v.components[s].terms()) out.emplace_hint(out.end(), Coord{s, u}, c);
  return out;
}

DirectSumVector from_sparse(const SparseVector& v, std::size_t slots) {
  DirectSumVector out;
  out.components.resize(slots);
  for (const auto& [k, c] : v) out.components.at(k.slot).add_term(k.mono, c);
  return out;
}

void axpy(SparseVector& y, const Scalar& a, const SparseVector& x) {
  if (a.is_zero()) return;
  for (const auto& [k, c] : x) {
    auto [it, inserted] = y.try_emplace(k, a * c);
    if (!inserted) {
      it->second += a * c;
      if (it->second.is_zero()) y.erase(it);
    }
  }
}

bool sparse_equal(const SparseVector& a, const SparseVector& b) {
  if (a.size() != b.size()) return false;
  auto ib = b.begin();
  for (const auto& [k, c] : a) {
    if (!(k == ib->first) || !(c == ib->second)) return false;
    ++ib;
  }
  return true;
}

namespace {

void combo_axpy(SpanBasis::Combination& y, const Scalar& a, const SpanBasis::Combination& x) {
  if (a.is_zero()) return;
  for (const auto& [k, c] : x) {
    auto [it, inserted] = y.try_emplace(k, a * c);
    if (!inserted) {
      it->second += a * c;
      if (it->second.is_zero()) y.erase(it);
    }
  }
}

} // namespace

void SpanBasis::reduce(SparseVector& v, Combination& combo) const {
  // Rows are fully reduced, so one pass over the pivots suffices: eliminating
  // pivot p never reintroduces another pivot.
  for (const auto& [pivot, row] : rows_) {
    auto it = v.find(pivot);
    if (it == v.end()) continue;
    const Scalar a = -it->second;
    axpy(v, a, row.vec);
    combo_axpy(combo, a, row.combo);
  }
}

bool SpanBasis::insert(const SparseVector& v) {
  SparseVector r = v;
  Combination combo;
  reduce(r, combo);
  if (r.empty()) return false;
  const std::size_t id = raw_count_++;
  // r = raw_id + sum a_k row_k, and combo already holds sum a_k row_k.combo.
  Combination row_combo;
  row_combo.emplace(id, Scalar(1));
  combo_axpy(row_combo, Scalar(1), combo);
  const Coord pivot = r.begin()->first;
  const Scalar inv = r.begin()->second.inverse();
  for (auto& [k, c] : r) c *= inv;
  for (auto& [k, c] : row_combo) c *= inv;
  for (auto& [p, row] : rows_) {
    auto it = row.vec.find(pivot);
    if (it == row.vec.end()) continue;
    const Scalar a = -it->second;
    axpy(row.vec, a, r);
    combo_axpy(row.combo, a, row_combo);
  }
  rows_.emplace(pivot, Row{std::move(r), std::move(row_combo)});
  return true;
}

bool SpanBasis::contains(const SparseVector& v) const {
  SparseVector r = v;
  Combination combo;
  reduce(r, combo);
  return r.empty();
}

std::optional<SpanBasis::Combination> SpanBasis::express(const SparseVector& v) const {
  SparseVector r = v;
  Combination combo;
  reduce(r, combo);
  if (!r.empty()) return std::nullopt;
  // v + sum a_k row_k = 0, so v = -sum a_k row_k.
  Combination out;
  combo_axpy(out, Scalar(-1), combo);
  return out;
}

std::vector<Coord> SpanBasis::pivots() const {
  std::vector<Coord> out;
  out.reserve(rows_.size());
  for (const auto& [p, row] : rows_) out.push_back(p);
  return out;
}

std::size_t dense_rank(std::vector<std::vector<Scalar>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c].is_zero()) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    const Scalar inv = rows[rank][c].inverse();
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c].is_zero()) continue;
      const Scalar f = rows[r][c] * inv;
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

} // namespace wcert
