#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wdiv/error.hpp"
#include "wdiv/poly_matrix.hpp"
#include "wdiv/poly_parse.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/scalar.hpp"

namespace wdiv {

/// H0: g(θ) = 0 with q polynomial restrictions in p parameters, to be tested
/// at the null point θ̄.
struct RestrictionSystem {
  std::vector<std::string> var_names;
  std::vector<Scalar> theta_bar;
  std::vector<MultiPoly> g;

  std::size_t p() const noexcept { return var_names.size(); }
  std::size_t q() const noexcept { return g.size(); }

  /// Throws dimension_mismatch unless the shapes agree and q ≤ p.
  void validate() const {
    if (theta_bar.size() != p()) {
      throw Error(ErrorCode::dimension_mismatch, "theta_bar has " + std::to_string(theta_bar.size()) +
                                                     " entries for " + std::to_string(p()) + " variables");
    }
    if (q() == 0) throw Error(ErrorCode::dimension_mismatch, "no restrictions");
    if (q() > p()) {
      throw Error(ErrorCode::dimension_mismatch,
                  std::to_string(q()) + " restrictions exceed " + std::to_string(p()) + " parameters");
    }
    for (const auto& gl : g) {
      if (gl.nvars() != p()) throw Error(ErrorCode::dimension_mismatch, "restriction variable count");
    }
  }

  bool null_holds() const {
    return std::all_of(g.begin(), g.end(), [&](const MultiPoly& gl) { return gl.evaluate(theta_bar).is_zero(); });
  }

  bool is_centered() const {
    return std::all_of(theta_bar.begin(), theta_bar.end(), [](const Scalar& s) { return s.is_zero(); });
  }
};

/// Rewrites the system in deviation coordinates u = θ − θ̄.
inline RestrictionSystem recenter(const RestrictionSystem& sys) {
  sys.validate();
  for (std::size_t l = 0; l < sys.q(); ++l) {
    Scalar v = sys.g[l].evaluate(sys.theta_bar);
    if (!v.is_zero()) {
      throw Error(ErrorCode::null_violated,
                  "restriction " + std::to_string(l + 1) + " equals " + to_string(v) + " at theta_bar");
    }
  }
  RestrictionSystem out;
  out.var_names = sys.var_names;
  out.theta_bar.assign(sys.p(), Scalar());
  for (const auto& gl : sys.g) out.g.push_back(gl.shift_origin(sys.theta_bar));
  return out;
}

/// Restrictions S·g with the same null point.
inline RestrictionSystem transform(const RestrictionSystem& sys, const ScalarMatrix& s) {
  if (s.rows() != sys.q() || s.cols() != sys.q()) throw Error(ErrorCode::dimension_mismatch, "transform size");
  RestrictionSystem out = sys;
  for (std::size_t i = 0; i < sys.q(); ++i) {
    MultiPoly row(sys.p());
    for (std::size_t k = 0; k < sys.q(); ++k) {
      if (!s(i, k).is_zero()) row += sys.g[k] * s(i, k);
    }
    out.g[i] = std::move(row);
  }
  return out;
}

/// q×p matrix of partial derivatives ∂g_l/∂θ_k.
inline PolyMatrix jacobian(const RestrictionSystem& sys) {
  PolyMatrix out(sys.q(), sys.p(), sys.p());
  for (std::size_t l = 0; l < sys.q(); ++l) {
    for (std::size_t k = 0; k < sys.p(); ++k) out(l, k) = sys.g[l].partial_derivative(k);
  }
  return out;
}

struct LowestSplit {
  PolyMatrix low;
  PolyMatrix rest;
  std::vector<Degree> row_degrees;
};

/// Row-wise lowest-degree split G = low + rest. Each row's degree is the
/// minimum over its entries; every entry contributes its component of that
/// degree, so an entry whose own lowest degree is higher contributes zero.
inline LowestSplit lowest_matrix(const PolyMatrix& g) {
  LowestSplit out{PolyMatrix(g.rows(), g.cols(), g.nvars()), g, {}};
  for (std::size_t i = 0; i < g.rows(); ++i) {
    Degree d = g.row_lowest_degree(i);
    if (d == kInfiniteDegree) {
      throw Error(ErrorCode::zero_row, "row " + std::to_string(i + 1) + " of the Jacobian is identically zero");
    }
    out.row_degrees.push_back(d);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      out.low(i, j) = g(i, j).homogeneous_component(d);
      out.rest(i, j) -= out.low(i, j);
    }
  }
  return out;
}

struct EchelonBlock {
  std::size_t rows;  ///< n_i
  Degree degree;     ///< s̄_i

  friend bool operator==(const EchelonBlock&, const EchelonBlock&) = default;
};

struct EchelonForm {
  ScalarMatrix s;                   ///< non-degenerate constant transformation
  std::vector<EchelonBlock> blocks;  ///< strictly increasing degrees
  PolyMatrix low_matrix;             ///< lowest-degree part of S·G
  PolyMatrix full_matrix;            ///< S·G
  std::vector<Degree> row_degrees;   ///< block degree of every row of S·G
};

namespace detail {

// Flattens a homogeneous row into coordinates over (column, monomial).
struct CoordLess {
  bool operator()(const std::pair<std::size_t, Monomial>& a, const std::pair<std::size_t, Monomial>& b) const {
    if (a.first != b.first) return a.first < b.first;
    return GradedLex{}(a.second, b.second);
  }
};
using RowCoords = std::map<std::pair<std::size_t, Monomial>, Scalar, CoordLess>;

inline RowCoords row_coords(const PolyMatrix& low, std::size_t row) {
  RowCoords out;
  for (std::size_t j = 0; j < low.cols(); ++j) {
    for (const auto& [m, c] : low(row, j).terms()) out.emplace(std::make_pair(j, m), c);
  }
  return out;
}

// Searches the rows of one degree class, in index order, for the first row
// whose lowest part is a combination of earlier rows. Returns the
// coefficients (indexed like `members`) of a relation Σ c_i L_i = 0 whose
// last non-zero coefficient is 1, or an empty vector when the class is
// independent.
inline std::vector<Scalar> find_dependency(const PolyMatrix& low, const std::vector<std::size_t>& members) {
  struct Basis {
    RowCoords vec;     // pivot entry normalised to 1
    std::vector<Scalar> comb;
  };
  std::vector<Basis> basis;
  for (std::size_t idx = 0; idx < members.size(); ++idx) {
    RowCoords v = row_coords(low, members[idx]);
    std::vector<Scalar> comb(members.size());
    comb[idx] = Scalar(1);
    for (const auto& b : basis) {
      const auto& pivot_key = b.vec.begin()->first;
      auto it = v.find(pivot_key);
      if (it == v.end()) continue;
      Scalar f = it->second;
      for (const auto& [key, c] : b.vec) {
        auto [pos, inserted] = v.try_emplace(key, Scalar());
        pos->second -= f * c;
        if (pos->second.is_zero()) v.erase(pos);
      }
      for (std::size_t i = 0; i < comb.size(); ++i) comb[i] -= f * b.comb[i];
    }
    if (v.empty()) return comb;
    Scalar inv = Scalar(1) / v.begin()->second;
    for (auto& [key, c] : v) c *= inv;
    for (auto& c : comb) c *= inv;
    basis.push_back({std::move(v), std::move(comb)});
  }
  return {};
}

}  // namespace detail

/// Finds a constant non-degenerate S such that the row-wise lowest parts of
/// S·G are linearly independent, then sorts rows by degree.
///
/// Each pass looks at the rows of equal lowest degree (rows of different
/// degrees are independent automatically). When one of them is a combination
/// of earlier ones, the highest-index row of the relation is replaced by the
/// combination that cancels its lowest part, which strictly raises that
/// row's degree. A row that cancels completely means G itself is rank
/// deficient.
inline EchelonForm echelonize(const PolyMatrix& g) {
  const std::size_t q = g.rows();
  PolyMatrix h = g;
  ScalarMatrix s = ScalarMatrix::identity(q);

  Degree max_degree = 0;
  for (std::size_t i = 0; i < q; ++i) {
    for (const auto& e : g.row(i)) {
      if (!e.is_zero()) max_degree = std::max(max_degree, e.total_degree());
    }
  }
  const std::size_t max_passes = q * (static_cast<std::size_t>(max_degree) + 2) + 1;

  for (std::size_t pass = 0;; ++pass) {
    if (pass > max_passes) throw Error(ErrorCode::rank_deficient_input, "echelonization did not terminate");
    for (std::size_t i = 0; i < q; ++i) {
      if (h.row_is_zero(i)) {
        throw Error(ErrorCode::rank_deficient_input,
                    "a combination of Jacobian rows vanishes identically; the Jacobian is not of full row rank");
      }
    }
    LowestSplit split = lowest_matrix(h);

    std::map<Degree, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < q; ++i) classes[split.row_degrees[i]].push_back(i);

    bool replaced = false;
    for (const auto& [deg, members] : classes) {
      if (members.size() < 2) continue;
      std::vector<Scalar> comb = detail::find_dependency(split.low, members);
      if (comb.empty()) continue;
      std::size_t last = 0;
      for (std::size_t k = 0; k < comb.size(); ++k) {
        if (!comb[k].is_zero()) last = k;
      }
      const std::size_t target = members[last];
      for (std::size_t k = 0; k < last; ++k) {
        if (comb[k].is_zero()) continue;
        const std::size_t src = members[k];
        for (std::size_t j = 0; j < h.cols(); ++j) h(target, j) += h(src, j) * comb[k];
        for (std::size_t j = 0; j < q; ++j) s(target, j) += s(src, j) * comb[k];
      }
      replaced = true;
      break;
    }
    if (replaced) continue;

    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return split.row_degrees[a] < split.row_degrees[b]; });

    EchelonForm out;
    out.s = ScalarMatrix(q, q);
    out.full_matrix = PolyMatrix(q, g.cols(), g.nvars());
    out.low_matrix = PolyMatrix(q, g.cols(), g.nvars());
    for (std::size_t r = 0; r < q; ++r) {
      const std::size_t src = order[r];
      for (std::size_t j = 0; j < q; ++j) out.s(r, j) = s(src, j);
      for (std::size_t j = 0; j < g.cols(); ++j) {
        out.full_matrix(r, j) = h(src, j);
        out.low_matrix(r, j) = split.low(src, j);
      }
      out.row_degrees.push_back(split.row_degrees[src]);
      if (out.blocks.empty() || out.blocks.back().degree != out.row_degrees.back()) {
        out.blocks.push_back({1, out.row_degrees.back()});
      } else {
        ++out.blocks.back().rows;
      }
    }
    return out;
  }
}

/// Random rational in ±range/[1, range].
template <typename Rng>
Rational random_rational(Rng& rng, std::int64_t range) {
  std::uniform_int_distribution<std::int64_t> num(-range, range);
  std::uniform_int_distribution<std::int64_t> den(1, range);
  Rational r(Integer(std::to_string(num(rng)), 10), Integer(std::to_string(den(rng)), 10));
  r.canonicalize();
  return r;
}

inline constexpr std::int64_t kRankSampleRange = 1'000'000;

/// Rank of a polynomial matrix (largest non-singular square submatrix),
/// estimated as the maximum exact rank over `trials` random rational points.
/// Never over-estimates; under-estimates only when every point lands on the
/// zero set of the relevant minors (Schwartz–Zippel: per trial at most
/// degree / (2·range + 1)).
template <typename Rng>
std::size_t poly_rank(const PolyMatrix& m, std::size_t trials, Rng& rng) {
  if (trials == 0) throw Error(ErrorCode::invalid_argument, "poly_rank needs at least one trial");
  std::size_t best = 0;
  std::vector<Scalar> point(m.nvars());
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& x : point) x = Scalar(random_rational(rng, kRankSampleRange));
    best = std::max(best, exact_rank(m.evaluate(point)));
    if (best == std::min(m.rows(), m.cols())) break;
  }
  return best;
}

inline std::size_t poly_rank(const PolyMatrix& m, std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return poly_rank(m, trials, rng);
}

struct FraldVerdict {
  std::size_t rank_r{0};
  bool frald_t_holds{false};
  EchelonForm echelon;
  RestrictionSystem recentered;  ///< g in deviation coordinates
  RestrictionSystem transformed;  ///< S·g in deviation coordinates
};

inline constexpr std::size_t kDefaultRankTrials = 3;

/// Recentres, differentiates, echelonizes, and takes the rank of the
/// lowest-degree matrix. FRALD-T holds iff that rank is q.
inline FraldVerdict frald_check(const RestrictionSystem& sys, std::size_t trials = kDefaultRankTrials,
                                std::uint64_t seed = 42) {
  FraldVerdict out;
  out.recentered = recenter(sys);
  out.echelon = echelonize(jacobian(out.recentered));
  out.rank_r = poly_rank(out.echelon.low_matrix, trials, seed);
  out.frald_t_holds = out.rank_r == sys.q();
  out.transformed = transform(out.recentered, out.echelon.s);
  return out;
}

}  // namespace wdiv
