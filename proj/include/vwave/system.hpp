#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "vwave/coefficients.hpp"
#include "vwave/core.hpp"

namespace vwave {

/// Pointwise coefficient data of a_1..a_n and their first and second
/// derivatives on a common set of grid points. Only values are needed by the
/// algebra; spatial structure is irrelevant here.
struct CoefficientSamples {
  int n = 1;
  std::size_t points = 0;
  std::vector<std::vector<double>> a;   // a[j][p]
  std::vector<std::vector<double>> da;  // da[i * n + j][p] = d_i a_j
  std::vector<std::vector<double>> d2a; // d2a[(i * n + k) * n + j][p] = d_i d_k a_j

  double value(int j, std::size_t p) const { return a[static_cast<std::size_t>(j)][p]; }
  double d1(int i, int j, std::size_t p) const { return da[static_cast<std::size_t>(i * n + j)][p]; }
  double d2(int i, int k, int j, std::size_t p) const { return d2a[static_cast<std::size_t>((i * n + k) * n + j)][p]; }

  void validate() const {
    if (n < 1) throw ConfigError("coefficient samples: n must be >= 1");
    const auto nn = static_cast<std::size_t>(n);
    if (a.size() != nn || da.size() != nn * nn || d2a.size() != nn * nn * nn)
      throw ConfigError("coefficient samples: wrong number of arrays");
    auto check = [this](const std::vector<std::vector<double>>& arrs) {
      for (const auto& v : arrs)
        if (v.size() != points) throw ConfigError("coefficient samples: mismatched grids");
    };
    check(a);
    check(da);
    check(d2a);
  }
};

/// Random non-negative a_j and arbitrary derivative samples (d_i d_k a_j
/// symmetric in i, k), reproducible from `seed`.
inline CoefficientSamples random_coefficients(int n, std::size_t points, std::uint64_t seed, bool constant = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 2.0), any(-1.0, 1.0);
  CoefficientSamples c;
  c.n = n;
  c.points = points;
  const auto nn = static_cast<std::size_t>(n);
  c.a.assign(nn, std::vector<double>(points));
  c.da.assign(nn * nn, std::vector<double>(points, 0.0));
  c.d2a.assign(nn * nn * nn, std::vector<double>(points, 0.0));
  for (auto& v : c.a) {
    const double base = pos(rng);
    for (auto& x : v) x = constant ? base : pos(rng);
  }
  if (constant) return c;
  for (auto& v : c.da)
    for (auto& x : v) x = any(rng);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (std::size_t p = 0; p < points; ++p) {
          const double v = any(rng);
          c.d2a[static_cast<std::size_t>((i * n + k) * n + j)][p] = v;
          c.d2a[static_cast<std::size_t>((k * n + i) * n + j)][p] = v;
        }
  return c;
}

/// One-dimensional samples (a, a', a'') from a regularized net entry.
inline CoefficientSamples samples_from_net(const RegularizedNet& net, std::size_t e) {
  if (net.k_max < 2) throw ConfigError("samples_from_net: net needs derivatives up to order 2");
  CoefficientSamples c;
  c.n = 1;
  c.points = net.grid.points;
  c.a = {net.derivative(e, 0)};
  c.da = {net.derivative(e, 1)};
  c.d2a = {net.derivative(e, 2)};
  return c;
}

/// Where a sparse matrix entry takes its value from.
struct EntrySource {
  enum class Kind : std::uint8_t { one, a, da, d2a } kind = Kind::one;
  int i = 0, k = 0, j = 0;

  double operator()(const CoefficientSamples& c, std::size_t p) const {
    switch (kind) {
      case Kind::one: return 1.0;
      case Kind::a: return c.value(j, p);
      case Kind::da: return c.d1(i, j, p);
      case Kind::d2a: return c.d2(i, k, j, p);
    }
    return 0.0;
  }
  static EntrySource one() { return {}; }
  static EntrySource coeff(int j) { return {Kind::a, 0, 0, j}; }
  static EntrySource first(int i, int j) { return {Kind::da, i, 0, j}; }
  static EntrySource second(int i, int k, int j) { return {Kind::d2a, i, k, j}; }
};

struct SparseEntry {
  std::size_t row = 0, col = 0;
  EntrySource source;
};

using SparseMatrix = std::vector<SparseEntry>;

/// Grid function with `components` components stored component-major:
/// v[r * points + p].
struct GridVector {
  std::size_t components = 0;
  std::size_t points = 0;
  std::vector<double> data;

  GridVector() = default;
  GridVector(std::size_t m, std::size_t p) : components(m), points(p), data(m * p, 0.0) {}
  double& operator()(std::size_t r, std::size_t p) { return data[r * points + p]; }
  double operator()(std::size_t r, std::size_t p) const { return data[r * points + p]; }
};

/// L2 pairing on the common grid with unit cell volume.
inline double inner(const GridVector& u, const GridVector& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.data.size(); ++i) s += u.data[i] * v.data[i];
  return s;
}

inline GridVector random_grid_vector(std::size_t m, std::size_t points, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  GridVector v(m, points);
  for (auto& x : v.data) x = nd(rng);
  return v;
}

/// First-order reduction of d_t^2 u - sum a_i d_i^2 u = f and its lifts.
///
/// Level 0 acts on U = (d_1 u, ..., d_n u, d_t u):
///   A_k has (k, n) = 1 and (n, k) = a_k (0-based), Q = diag(a_1..a_n, 1).
/// Level 1 acts on V = (d_1 U, ..., d_n U); level 2 on W = (d_1 V, ..., d_n V):
///   principal matrices are block-diagonal copies of A_k,
///   level 1:  B block (i, j) = d_i A_j,
///   level 2:  B block (i, k) = d_i A~_k + delta_ik B~,
///   level-2 forcing adds (d_i B~) V to block i.
/// Matrices are lists of sparse entries; nothing is stored densely.
class HyperbolicSystem {
 public:
  int level() const noexcept { return level_; }
  int dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t points() const noexcept { return coeffs_->points; }
  const CoefficientSamples& coefficients() const noexcept { return *coeffs_; }
  bool has_lower_order() const noexcept { return level_ > 0; }
  /// Size of the level-0 block, n + 1.
  std::size_t block() const noexcept { return static_cast<std::size_t>(n_) + 1; }
  /// Number of level-0 blocks, n^level.
  std::size_t copies() const noexcept { return size_ / block(); }

  const SparseMatrix& A(int k) const { return A_.at(static_cast<std::size_t>(k)); }
  const SparseMatrix& B() const {
    if (level_ == 0) throw UnsupportedError("level-0 system has no lower-order matrix");
    return B_;
  }
  const SparseMatrix& Q() const noexcept { return Q_; }
  /// d_k Q~ (diagonal).
  const SparseMatrix& dQ(int k) const { return dQ_.at(static_cast<std::size_t>(k)); }
  /// d_i A~_k.
  const SparseMatrix& dA(int i, int k) const { return dA_.at(static_cast<std::size_t>(i * n_ + k)); }
  /// d_i B~_{level-1}: the level-2 forcing coupling acting on the level-1 state.
  const SparseMatrix& coupling(int i) const {
    if (level_ != 2) throw UnsupportedError("forcing coupling exists only at level 2");
    return coupling_.at(static_cast<std::size_t>(i));
  }

  /// Human-readable forcing descriptor.
  std::string forcing() const {
    switch (level_) {
      case 0: return "(0, ..., 0, f)";
      case 1: return "grad F";
      default: return "grad F~ + (d_i B~) V";
    }
  }

  /// y = M v pointwise, or y = M^T v when `transpose`.
  GridVector apply(const SparseMatrix& M, const GridVector& v, bool transpose = false) const {
    check(v);
    GridVector y(size_, points());
    for (const auto& e : M) {
      const std::size_t r = transpose ? e.col : e.row;
      const std::size_t c = transpose ? e.row : e.col;
      for (std::size_t p = 0; p < points(); ++p) y(r, p) += e.source(*coeffs_, p) * v(c, p);
    }
    return y;
  }

  GridVector apply_A(int k, const GridVector& v) const { return apply(A(k), v); }
  GridVector apply_B(const GridVector& v, bool transpose = false) const { return apply(B(), v, transpose); }
  GridVector apply_Q(const GridVector& v) const { return apply(Q_, v); }

  /// Level-2 coupling (d_i B~) V stacked over i; `v` is the level-1 state.
  GridVector forcing_coupling(const GridVector& v) const {
    if (level_ != 2) throw UnsupportedError("forcing coupling exists only at level 2");
    const std::size_t m1 = size_ / static_cast<std::size_t>(n_);
    if (v.components != m1 || v.points != points()) throw ConfigError("forcing_coupling: expects the level-1 state");
    GridVector y(size_, points());
    for (int i = 0; i < n_; ++i)
      for (const auto& e : coupling_[static_cast<std::size_t>(i)])
        for (std::size_t p = 0; p < points(); ++p)
          y(static_cast<std::size_t>(i) * m1 + e.row, p) += e.source(*coeffs_, p) * v(e.col, p);
    return y;
  }

  /// Entries of the (bi, bj) block of B~, re-indexed to the full matrix.
  SparseMatrix B_block(int bi, int bj) const {
    const std::size_t m = size_ / static_cast<std::size_t>(n_);
    SparseMatrix out;
    for (const auto& e : B())
      if (e.row / m == static_cast<std::size_t>(bi) && e.col / m == static_cast<std::size_t>(bj)) out.push_back(e);
    return out;
  }

  friend HyperbolicSystem build_system(int, std::shared_ptr<const CoefficientSamples>);
  friend HyperbolicSystem derive_system(const HyperbolicSystem&);

 private:
  void check(const GridVector& v) const {
    if (v.components != size_ || v.points != points()) throw ConfigError("system: state vector has the wrong shape");
  }

  // Principal, symmetriser and derivative entries for `copies` level-0 blocks.
  void assemble_blockdiag() {
    const int n = n_;
    const std::size_t b = block(), nb = copies();
    const auto nu = static_cast<std::size_t>(n);
    A_.assign(nu, {});
    dQ_.assign(nu, {});
    dA_.assign(nu * nu, {});
    Q_.clear();
    for (std::size_t s = 0; s < nb; ++s) {
      const std::size_t o = s * b;
      for (int j = 0; j < n; ++j) Q_.push_back({o + static_cast<std::size_t>(j), o + static_cast<std::size_t>(j), EntrySource::coeff(j)});
      Q_.push_back({o + nu, o + nu, EntrySource::one()});
      for (int k = 0; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        A_[ku].push_back({o + ku, o + nu, EntrySource::one()});
        A_[ku].push_back({o + nu, o + ku, EntrySource::coeff(k)});
        for (int j = 0; j < n; ++j)
          dQ_[ku].push_back({o + static_cast<std::size_t>(j), o + static_cast<std::size_t>(j), EntrySource::first(k, j)});
        for (int i = 0; i < n; ++i)
          dA_[static_cast<std::size_t>(i * n + k)].push_back({o + nu, o + ku, EntrySource::first(i, k)});
      }
    }
  }

  int level_ = 0;
  int n_ = 1;
  std::size_t size_ = 0;
  std::shared_ptr<const CoefficientSamples> coeffs_;
  std::vector<SparseMatrix> A_, dQ_, dA_, coupling_;
  SparseMatrix B_, Q_;
};

inline HyperbolicSystem build_system(int n, std::shared_ptr<const CoefficientSamples> coefficients) {
  if (n < 1) throw ConfigError("build_system: n must be >= 1");
  if (!coefficients) throw ConfigError("build_system: missing coefficients");
  if (coefficients->n != n) throw ConfigError("build_system: coefficient dimension differs from n");
  coefficients->validate();
  HyperbolicSystem s;
  s.level_ = 0;
  s.n_ = n;
  s.size_ = static_cast<std::size_t>(n) + 1;
  s.coeffs_ = std::move(coefficients);
  s.assemble_blockdiag();
  return s;
}

inline HyperbolicSystem build_system(int n, CoefficientSamples coefficients) {
  return build_system(n, std::make_shared<const CoefficientSamples>(std::move(coefficients)));
}

inline HyperbolicSystem derive_system(const HyperbolicSystem& sys) {
  if (sys.level_ >= 2) throw UnsupportedError("derive_system: lifts beyond level 2 are not implemented");
  HyperbolicSystem out;
  const int n = sys.n_;
  const auto nu = static_cast<std::size_t>(n);
  const std::size_t b = nu + 1;
  out.level_ = sys.level_ + 1;
  out.n_ = n;
  out.size_ = sys.size_ * nu;
  out.coeffs_ = sys.coeffs_;
  out.assemble_blockdiag();
  if (out.level_ == 1) {
    // block (i, j) = d_i A_j: single entry (n, j) in level-0 indexing
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
        out.B_.push_back({iu * b + nu, ju * b + ju, EntrySource::first(i, j)});
      }
  } else {
    const std::size_t m1 = sys.size_;  // level-1 size n (n + 1)
    for (int i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      // d_i A~_k in block (i, k)
      for (int k = 0; k < n; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t s = 0; s < nu; ++s)
          out.B_.push_back({iu * m1 + s * b + nu, ku * m1 + s * b + ku, EntrySource::first(i, k)});
      }
      // delta_ik B~ in block (i, i)
      for (const auto& e : sys.B_) out.B_.push_back({iu * m1 + e.row, iu * m1 + e.col, e.source});
    }
    // (d_i B~) V: B~ entry (l, j) carries d_l a_j, so its d_i derivative is d_i d_l a_j
    out.coupling_.assign(nu, {});
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) {
          const auto lu = static_cast<std::size_t>(l), ju = static_cast<std::size_t>(j);
          out.coupling_[static_cast<std::size_t>(i)].push_back({lu * b + nu, ju * b + ju, EntrySource::second(i, l, j)});
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct SymmetriserReport {
  int n = 0;
  int level = 0;
  double residual = 0.0;
  std::size_t entries_checked = 0;

  nlohmann::json to_json() const {
    return {{"identity", "QA_k = A_k^T Q"}, {"n", n}, {"level", level}, {"max_residual", residual},
            {"entries_checked", entries_checked}};
  }
};

/// max over grid points, k and entries of |(Q A_k - A_k^T Q)_{rc}|. Q is
/// diagonal, so (Q A)_{rc} = q_r A_{rc} and (A^T Q)_{rc} = A_{cr} q_c; both
/// are evaluated at every nonzero position of A_k and of A_k^T.
inline SymmetriserReport verify_symmetriser(const HyperbolicSystem& sys, bool throw_on_failure = true) {
  SymmetriserReport rep{sys.dimension(), sys.level(), 0.0, 0};
  const auto& c = sys.coefficients();
  std::vector<const EntrySource*> qdiag(sys.size(), nullptr);
  for (const auto& e : sys.Q()) qdiag[e.row] = &e.source;
  for (int k = 0; k < sys.dimension(); ++k) {
    const auto& A = sys.A(k);
    auto lookup = [&A, &c](std::size_t r, std::size_t col, std::size_t p) {
      double v = 0.0;
      for (const auto& e : A)
        if (e.row == r && e.col == col) v += e.source(c, p);
      return v;
    };
    for (const auto& e : A) {
      for (const auto& [r, col] : {std::pair{e.row, e.col}, std::pair{e.col, e.row}}) {
        for (std::size_t p = 0; p < sys.points(); ++p) {
          const double qr = qdiag[r] ? (*qdiag[r])(c, p) : 0.0;
          const double qc = qdiag[col] ? (*qdiag[col])(c, p) : 0.0;
          const double lhs = qr * lookup(r, col, p);
          const double rhs = lookup(col, r, p) * qc;
          rep.residual = std::max(rep.residual, std::abs(lhs - rhs));
          ++rep.entries_checked;
        }
      }
    }
  }
  if (throw_on_failure && rep.residual != 0.0)
    throw VerificationFailure("symmetriser residual " + std::to_string(rep.residual) + " is not zero");
  return rep;
}

struct IdentityTerm {
  std::string name;
  int k = 0, j = 0;  // j = -1 when the term is indexed by k alone
  double max_relative_error = 0.0;
};

struct IdentityReport {
  int n = 0;
  int level = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  std::vector<IdentityTerm> terms;

  double max_error(const std::string& name) const {
    double m = 0.0;
    for (const auto& t : terms)
      if (t.name == name) m = std::max(m, t.max_relative_error);
    return m;
  }
  double max_error() const {
    double m = 0.0;
    for (const auto& t : terms) m = std::max(m, t.max_relative_error);
    return m;
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"n", n}, {"level", level}, {"trials", trials}, {"seed", seed}, {"tolerance", tolerance}};
    for (const std::string name : {"principal", "lower_order"}) j[name] = {{"max_relative_error", max_error(name)}};
    j["max_relative_error"] = max_error();
    return j;
  }
};

namespace detail {

inline double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Component of the state: sub-block s of W-block w (level 2), sub-block s
// (level 1), entry r of the level-0 block.
inline std::size_t comp(const HyperbolicSystem& sys, std::size_t s, std::size_t r) { return s * sys.block() + r; }

}  // namespace detail

/// Closed form of (d_k(Q~A~_k) V, V): 2 sum over level-0 blocks s of
/// (d_k a_k V_{s,k}, V_{s,n}).
inline double principal_energy_term(const HyperbolicSystem& sys, int k, const GridVector& v) {
  const auto& c = sys.coefficients();
  const std::size_t nu = static_cast<std::size_t>(sys.dimension());
  double acc = 0.0;
  for (std::size_t s = 0; s < sys.copies(); ++s)
    for (std::size_t p = 0; p < sys.points(); ++p)
      acc += c.d1(k, k, p) * v(detail::comp(sys, s, static_cast<std::size_t>(k)), p) * v(detail::comp(sys, s, nu), p);
  return 2.0 * acc;
}

/// Closed form of the (i, j) block contribution to ((Q~B~ + B~^T Q~) V, V).
///   level 1: 2 (d_i a_j V_{j,j}, V_{i,n})
///   level 2: 2 sum_s (d_i a_j W_{i,s,n}, W_{j,s,j}) + delta_ij 2 sum_{l,m} (d_l a_m W_{i,l,n}, W_{i,m,m})
inline double lower_order_energy_term(const HyperbolicSystem& sys, int i, int j, const GridVector& v) {
  const auto& c = sys.coefficients();
  const int n = sys.dimension();
  const auto nu = static_cast<std::size_t>(n);
  const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
  double acc = 0.0;
  if (sys.level() == 1) {
    for (std::size_t p = 0; p < sys.points(); ++p) acc += c.d1(i, j, p) * v(detail::comp(sys, ju, ju), p) * v(detail::comp(sys, iu, nu), p);
    return 2.0 * acc;
  }
  if (sys.level() != 2) throw UnsupportedError("lower-order energy term needs level 1 or 2");
  for (std::size_t s = 0; s < nu; ++s)
    for (std::size_t p = 0; p < sys.points(); ++p)
      acc += c.d1(i, j, p) * v(detail::comp(sys, iu * nu + s, nu), p) * v(detail::comp(sys, ju * nu + s, ju), p);
  if (i == j)
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m)
        for (std::size_t p = 0; p < sys.points(); ++p)
          acc += c.d1(l, m, p) * v(detail::comp(sys, iu * nu + static_cast<std::size_t>(l), nu), p) *
                 v(detail::comp(sys, iu * nu + static_cast<std::size_t>(m), static_cast<std::size_t>(m)), p);
  return 2.0 * acc;
}

/// (d_k(Q~A~_k) V, V) through the sparse operators and the product rule
/// d_k(Q~A~_k) = (d_k Q~) A~_k + Q~ (d_k A~_k).
inline double principal_energy_structured(const HyperbolicSystem& sys, int k, const GridVector& v) {
  auto w = sys.apply(sys.dQ(k), sys.apply_A(k, v));
  const auto z = sys.apply_Q(sys.apply(sys.dA(k, k), v));
  for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] += z.data[i];
  return inner(w, v);
}

/// ((Q~ B_ij + B_ij^T Q~) V, V) for one block of B~ through the sparse operators.
inline double lower_order_energy_structured(const HyperbolicSystem& sys, int i, int j, const GridVector& v) {
  const auto Bij = sys.B_block(i, j);
  auto w = sys.apply_Q(sys.apply(Bij, v));
  const auto z = sys.apply(Bij, sys.apply_Q(v), true);
  for (std::size_t r = 0; r < w.data.size(); ++r) w.data[r] += z.data[r];
  return inner(w, v);
}

/// Checks both energy identities on random states: the sparse-operator value of
/// each term against its closed form, per k (principal) and per block (i, j)
/// (lower order).
inline IdentityReport verify_energy_identities(const HyperbolicSystem& sys, std::size_t trials, std::uint64_t seed,
                                               double tolerance = 1e-10, bool throw_on_failure = true) {
  if (sys.level() < 1) throw ConfigError("verify_energy_identities: needs a lifted system (level >= 1)");
  IdentityReport rep;
  rep.n = sys.dimension();
  rep.level = sys.level();
  rep.trials = trials;
  rep.seed = seed;
  rep.tolerance = tolerance;
  const int n = sys.dimension();
  for (int k = 0; k < n; ++k) rep.terms.push_back({"principal", k, -1, 0.0});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rep.terms.push_back({"lower_order", i, j, 0.0});
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto v = random_grid_vector(sys.size(), sys.points(), rng);
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k, ++idx) {
      const double gap = detail::relative_gap(principal_energy_structured(sys, k, v), principal_energy_term(sys, k, v));
      rep.terms[idx].max_relative_error = std::max(rep.terms[idx].max_relative_error, gap);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j, ++idx) {
        const double gap =
            detail::relative_gap(lower_order_energy_structured(sys, i, j, v), lower_order_energy_term(sys, i, j, v));
        rep.terms[idx].max_relative_error = std::max(rep.terms[idx].max_relative_error, gap);
      }
  }
  if (throw_on_failure)
    for (const auto& term : rep.terms)
      if (term.max_relative_error > tolerance) {
        throw VerificationFailure("energy identity '" + term.name + "' fails at (k, j) = (" + std::to_string(term.k) +
                                  ", " + std::to_string(term.j) + "): relative error " +
                                  std::to_string(term.max_relative_error));
      }
  return rep;
}

/// Diagonal cancellation: the block-k part of (d_k(Q~A~_k)V, V) equals the
/// (k, k) block term of ((Q~B~ + B~^T Q~)V, V). Returns the largest relative
/// gap over k. For n = 1 this is the full cancellation of the two terms.
inline double diagonal_cancellation_gap(const HyperbolicSystem& sys, const GridVector& v) {
  if (sys.level() != 1) throw UnsupportedError("diagonal cancellation is stated for level 1");
  const std::size_t b = sys.block();
  double worst = 0.0;
  for (int k = 0; k < sys.dimension(); ++k) {
    GridVector masked(sys.size(), sys.points());
    const auto ku = static_cast<std::size_t>(k);
    for (std::size_t r = ku * b; r < (ku + 1) * b; ++r)
      for (std::size_t p = 0; p < sys.points(); ++p) masked(r, p) = v(r, p);
    const double principal = principal_energy_structured(sys, k, masked);
    const double lower = lower_order_energy_structured(sys, k, k, v);
    worst = std::max(worst, detail::relative_gap(principal, lower));
  }
  return worst;
}

/// min over random v and grid points of <Q v, v> - sum_s |v_{s,n}|^2; it is
/// >= 0 whenever every a_k >= 0.
inline double q_lower_bound_margin(const HyperbolicSystem& sys, std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& c = sys.coefficients();
  const std::size_t nu = static_cast<std::size_t>(sys.dimension());
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto v = random_grid_vector(sys.size(), sys.points(), rng);
    for (std::size_t p = 0; p < sys.points(); ++p) {
      double qform = 0.0, last = 0.0;
      for (const auto& e : sys.Q()) qform += e.source(c, p) * v(e.row, p) * v(e.row, p);
      for (std::size_t s = 0; s < sys.copies(); ++s) last += v(detail::comp(sys, s, nu), p) * v(detail::comp(sys, s, nu), p);
      margin = std::min(margin, qform - last);
    }
  }
  return margin;
}

}  // namespace vwave
