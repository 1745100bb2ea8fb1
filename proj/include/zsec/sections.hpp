#ifndef ZSEC_SECTIONS_HPP
#define ZSEC_SECTIONS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsec/binomial.hpp"
#include "zsec/chi.hpp"
#include "zsec/theta.hpp"
#include "zsec/types.hpp"

namespace zsec {

// ===========================================================================
// Families
// ===========================================================================

enum class Family { classical, accelerated, dh };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::classical: return "classical";
    case Family::accelerated: return "accelerated";
    case Family::dh: return "dh";
  }
  return "?";
}

inline Family family_from_name(const std::string& name) {
  if (name == "classical") return Family::classical;
  if (name == "accelerated") return Family::accelerated;
  if (name == "dh") return Family::dh;
  throw domain_error("unknown family name: " + name);
}

// First summand index of a family: the classical section starts at n = 1,
// the transformed families at n = 0.
inline int family_first_index(Family f) {
  return f == Family::classical ? 1 : 0;
}

// ===========================================================================
// Rearrangement: a permutation of the summand indices
// ===========================================================================

// Piecewise reorder map on an integer domain [lo, hi]: identity except on
// explicitly listed pieces, each either identity (documentation value) or the
// reflection n -> c - n.  Outside the domain the map acts as the identity, so
// a rearrangement composes transparently with any longer summation range.
class Rearrangement {
 public:
  struct Piece {
    int from = 0;
    int to = 0;
    bool reflect = false;
    int c = 0;  // only meaningful when reflect
  };

  Rearrangement() = default;  // identity everywhere

  static Rearrangement identity(int lo, int hi) {
    Rearrangement r;
    r.lo_ = lo;
    r.hi_ = hi;
    r.has_domain_ = true;
    r.build_table();
    return r;
  }

  static Rearrangement piecewise(int lo, int hi, std::vector<Piece> pieces) {
    require(lo <= hi, "Rearrangement: empty domain");
    Rearrangement r;
    r.lo_ = lo;
    r.hi_ = hi;
    r.has_domain_ = true;
    r.pieces_ = std::move(pieces);
    for (const Piece& p : r.pieces_) {
      require(lo <= p.from && p.from <= p.to && p.to <= hi,
              "Rearrangement: piece outside domain");
    }
    r.build_table();
    return r;
  }

  // Explicit-table constructor: images[i] is the image of lo + i.
  static Rearrangement from_table(int lo, const std::vector<int>& images) {
    require(!images.empty(), "Rearrangement: empty table");
    Rearrangement r;
    r.lo_ = lo;
    r.hi_ = lo + static_cast<int>(images.size()) - 1;
    r.has_domain_ = true;
    r.table_ = images;
    r.verify_bijection();
    return r;
  }

  // Identity off the given intervals, n -> (a + b) - n inside each [a, b].
  static Rearrangement reverse_intervals(
      int lo, int hi, const std::vector<std::pair<int, int>>& intervals) {
    std::vector<Piece> pieces;
    std::vector<std::pair<int, int>> sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    int prev_hi = lo - 1;
    for (const auto& [a, b] : sorted) {
      require(a <= b, "reverse_intervals: inverted interval");
      require(a > prev_hi, "reverse_intervals: overlapping intervals");
      prev_hi = b;
      pieces.push_back(Piece{a, b, true, a + b});
    }
    return piecewise(lo, hi, std::move(pieces));
  }

  bool has_domain() const { return has_domain_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < table_.size(); ++i)
      if (table_[i] != lo_ + static_cast<int>(i)) return false;
    return true;
  }

  int operator()(int n) const {
    if (!has_domain_ || n < lo_ || n > hi_) return n;
    return table_[static_cast<std::size_t>(n - lo_)];
  }

  // Smallest C >= n such that the images of [lo, C] are exactly [lo, C]
  // (identity tail included); at such C a prefix sum covers a full range.
  int closure_at_least(int n) const {
    int c = std::max(n, lo_ - 1);
    if (!has_domain_) return c;
    for (;;) {
      int running_max = c;
      for (int i = lo_; i <= std::min(c, hi_); ++i)
        running_max = std::max(running_max, (*this)(i));
      if (running_max == c) return c;
      c = running_max;
    }
  }

 private:
  void build_table() {
    table_.resize(static_cast<std::size_t>(hi_ - lo_ + 1));
    for (int n = lo_; n <= hi_; ++n)
      table_[static_cast<std::size_t>(n - lo_)] = n;
    for (const Piece& p : pieces_) {
      for (int n = p.from; n <= p.to; ++n) {
        table_[static_cast<std::size_t>(n - lo_)] = p.reflect ? p.c - n : n;
      }
    }
    verify_bijection();
  }

  void verify_bijection() const {
    std::vector<char> seen(table_.size(), 0);
    for (int img : table_) {
      if (img < lo_ || img > hi_)
        throw domain_error("Rearrangement: image escapes the domain");
      char& flag = seen[static_cast<std::size_t>(img - lo_)];
      if (flag) throw domain_error("Rearrangement: not injective");
      flag = 1;
    }
  }

  int lo_ = 0;
  int hi_ = -1;
  bool has_domain_ = false;
  std::vector<Piece> pieces_;
  std::vector<int> table_;
};

// ===========================================================================
// SectionSpec
// ===========================================================================

struct SectionSpec {
  Family family = Family::classical;
  int n_terms = 1;  // the section index N
  std::optional<Rearrangement> rearrangement;

  bool valid() const {
    return n_terms >= family_first_index(family);
  }
};

// ===========================================================================
// Individual terms
// ===========================================================================

// Classical symmetrized term B_n(s) = (1/2)[n^{-s} + chi(s) n^{s-1}].
inline cplx b_term(int n, cplx s) {
  require(n >= 1, "b_term: n must be >= 1");
  const double ln_n = std::log(static_cast<double>(n));
  return 0.5 * (std::exp(-s * ln_n) + chi(s) * std::exp((s - 1.0) * ln_n));
}

// Transformed term A~(s,n) = 2^{-(n+1)} sum_k C(n,k) (k+1)^{-s}, evaluated
// over the mass-carrying window with ascending-k accumulation.
inline cplx accel_a_term(int n, cplx s) {
  require(n >= 0, "accel_a_term: n must be >= 0");
  const auto win = detail::weight_window(n);
  double w = win.w_lo;
  cplx sum = 0.0;
  for (int k = win.k_lo; k <= win.k_hi; ++k) {
    sum += w * std::exp(-s * std::log(static_cast<double>(k + 1)));
    w *= static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  return sum;
}

// Aggregated weight a~(k,N) = sum_{n=k}^N 2^{-(n+1)} C(n,k).  Evaluated
// through the binomial-tail identity a~(k,N) = 2^{-(N+1)} sum_{j>k} C(N+1,j),
// summing whichever side of the row is smaller.
inline double weight(int k, int N) {
  require(k >= 0 && N >= k, "weight: need 0 <= k <= N");
  const int rows = N + 1;  // binomial row C(N+1, .)
  auto log_c = [rows](int j) {
    return std::lgamma(rows + 1.0) - std::lgamma(j + 1.0) -
           std::lgamma(rows - j + 1.0) - rows * kLn2;
  };
  auto side_sum = [&](int j_lo, int j_hi) {
    // sum of 2^{-(N+1)} C(N+1,j) over [j_lo, j_hi], scaled ascending walk
    double total = 0.0;
    double w = std::exp(log_c(j_lo));
    for (int j = j_lo; j <= j_hi; ++j) {
      total += w;
      w *= static_cast<double>(rows - j) / static_cast<double>(j + 1);
    }
    return total;
  };
  if (k + 1 > rows - (k + 1)) {
    return side_sum(k + 1, rows);          // short upper tail, direct
  }
  return 1.0 - side_sum(0, k);             // short lower head, complement
}

// Transformed symmetrized term B~_n(s) = (1/2)[A~(s,n) + chi(s) A~(1-s,n)].
inline cplx accel_b_term(int n, cplx s) {
  return 0.5 * (accel_a_term(n, s) + chi(s) * accel_a_term(n, 1.0 - s));
}

// ===========================================================================
// Section evaluation (term-by-term reference path)
// ===========================================================================

// Sums the family's terms in the order prescribed by the rearrangement
// (identity if absent).  This is the direct, order-faithful evaluator; the
// StagedSection engine below is the fast path and must agree with it.
inline cplx section_eval(const SectionSpec& spec, cplx s) {
  require(spec.valid(), "section_eval: invalid SectionSpec");
  require(spec.family != Family::dh,
          "section_eval: dh family is evaluated by its own engine");
  const int first = family_first_index(spec.family);
  cplx sum = 0.0;
  for (int pos = first; pos <= spec.n_terms; ++pos) {
    const int n = spec.rearrangement ? (*spec.rearrangement)(pos) : pos;
    sum += spec.family == Family::classical ? b_term(n, s) : accel_b_term(n, s);
  }
  return sum;
}

// ===========================================================================
// Raw partial sums (figure data)
// ===========================================================================

enum class RawFamily { classical_raw, accelerated_raw };

// S_N(s) = sum_{n=1}^N n^{-s}  or  S~_N(s) = sum_{n=0}^N A~(s,n).
inline cplx partial_sum(RawFamily family, int N, cplx s) {
  if (family == RawFamily::classical_raw) {
    require(N >= 1, "partial_sum: classical needs N >= 1");
    cplx sum = 0.0;
    for (int n = 1; n <= N; ++n)
      sum += std::exp(-s * std::log(static_cast<double>(n)));
    return sum;
  }
  require(N >= 0, "partial_sum: accelerated needs N >= 0");
  cplx sum = 0.0;
  for (int n = 0; n <= N; ++n) sum += accel_a_term(n, s);
  return sum;
}

// Canonical good-approximation index of the transformed section at height t:
// N(1/2 + it) = [t/2].  Beyond it the section tracks zeta closely.
inline int good_index(double t) {
  return static_cast<int>(std::floor(std::abs(t) / 2.0));
}

// ===========================================================================
// Fluctuation intervals
// ===========================================================================

struct FluctuationInterval {
  int M = 0;
  long N_lo = 0;  // floor(t / (2 (M+1) pi))
  long N_hi = 0;  // floor(t / (2 M pi))

  // Number of integers in the real interval (t/(2(M+1)pi), t/(2M pi)].
  long integer_count(double t, double scale = 1.0) const {
    const double lo = scale * t / (kTwoPi * (M + 1));
    const double hi = scale * t / (kTwoPi * M);
    const long n_lo = static_cast<long>(std::ceil(lo));
    const long n_hi = static_cast<long>(std::floor(hi));
    return std::max(0L, n_hi - n_lo + 1);
  }
};

// The windows [t/(2(M+1)pi)] <= N <= [t/(2M pi)] for M = 1..M_max, clipped to
// those reaching N >= 1.
inline std::vector<FluctuationInterval> fluctuation_intervals(double t,
                                                              int M_max) {
  require(t > kTwoPi, "fluctuation_intervals: need t > 2 pi");
  require(M_max >= 1, "fluctuation_intervals: need M_max >= 1");
  std::vector<FluctuationInterval> out;
  for (int M = 1; M <= M_max; ++M) {
    FluctuationInterval iv;
    iv.M = M;
    iv.N_lo = static_cast<long>(std::floor(t / (kTwoPi * (M + 1))));
    iv.N_hi = static_cast<long>(std::floor(t / (kTwoPi * M)));
    if (iv.N_hi < 1) break;
    out.push_back(iv);
  }
  return out;
}

// ===========================================================================
// StagedSection: incremental prefix engine
// ===========================================================================

// Evaluates prefixes of a (possibly rearranged) section while terms are added
// one at a time, which is exactly the shape the homotopy tracker consumes.
//
// For the transformed family the prefix collapses over the summand index:
//   sum_{n in P} A~(s,n) = sum_k aP(k) (k+1)^{-s},
// where aP(k) accumulates the normalized binomial row weights of every added
// n.  That turns one evaluation into O(k_max) power calls regardless of how
// many terms are in the prefix, and one added term costs only its O(sqrt n)
// window row.  The collapsed weights depend on the prefix as a set, so any
// full-range rearrangement reproduces the identity-order section exactly.
//
// On the critical line the rotated value
//   e^{i theta(t)} F(1/2 + it)
// is real term by term (each symmetrized summand contributes
// cos(theta - t ln m) times a positive scale), so line_value sums the real
// cosine form directly instead of asserting smallness of a residual.
class StagedSection {
 public:
  StagedSection(Family family, std::optional<Rearrangement> rear = {})
      : family_(family), rear_(std::move(rear)) {
    require(family != Family::dh,
            "StagedSection: dh family has a dedicated engine");
    next_pos_ = family_first_index(family);
  }

  Family family() const { return family_; }

  // Index of the next term in summation order (the homotopy's added term).
  int next_index() const {
    return rear_ ? (*rear_)(next_pos_) : next_pos_;
  }

  // Number of terms added so far expressed as a section index: after
  // advance_to(N) the prefix is the family's full order up to position N.
  int stage() const { return next_pos_ - 1; }

  void advance() {
    add_index(next_index());
    ++next_pos_;
  }

  void advance_to(int N) {
    require(N >= stage(), "StagedSection: cannot rewind");
    while (stage() < N) advance();
  }

  // --- prefix evaluation ---------------------------------------------------

  cplx eval(cplx s) const {
    if (family_ == Family::classical) {
      cplx direct = 0.0, mirrored = 0.0;
      for (int n : prefix_) {
        const double ln_n = std::log(static_cast<double>(n));
        direct += std::exp(-s * ln_n);
        mirrored += std::exp((s - 1.0) * ln_n);
      }
      return 0.5 * (direct + chi(s) * mirrored);
    }
    cplx direct = 0.0, mirrored = 0.0;
    for (std::size_t k = 0; k < acc_w_.size(); ++k) {
      if (acc_w_[k] == 0.0) continue;
      const double ln_k1 = std::log(static_cast<double>(k + 1));
      direct += acc_w_[k] * std::exp(-s * ln_k1);
      mirrored += acc_w_[k] * std::exp((s - 1.0) * ln_k1);
    }
    return 0.5 * (direct + chi(s) * mirrored);
  }

  std::pair<cplx, cplx> eval_with_deriv(cplx s) const {
    const cplx chi_s = chi(s);
    const cplx chi_ld = chi_log_deriv(s);
    cplx f = 0.0, df = 0.0;
    auto fold = [&](double w, double ln_m) {
      const cplx p = w * std::exp(-s * ln_m);
      const cplx q = w * std::exp((s - 1.0) * ln_m);
      f += 0.5 * (p + chi_s * q);
      df += 0.5 * (-ln_m * p + chi_s * q * (chi_ld + ln_m));
    };
    if (family_ == Family::classical) {
      for (int n : prefix_) fold(1.0, std::log(static_cast<double>(n)));
    } else {
      for (std::size_t k = 0; k < acc_w_.size(); ++k)
        if (acc_w_[k] != 0.0)
          fold(acc_w_[k], std::log(static_cast<double>(k + 1)));
    }
    return {f, df};
  }

  double line_value(double t) const {
    const double th = rs_theta(t);
    double sum = 0.0;
    if (family_ == Family::classical) {
      for (int n : prefix_) {
        const double ln_n = std::log(static_cast<double>(n));
        sum += std::cos(th - t * ln_n) / std::sqrt(static_cast<double>(n));
      }
      return sum;
    }
    for (std::size_t k = 0; k < acc_w_.size(); ++k) {
      if (acc_w_[k] == 0.0) continue;
      const double ln_k1 = std::log(static_cast<double>(k + 1));
      sum += acc_w_[k] * std::cos(th - t * ln_k1) /
             std::sqrt(static_cast<double>(k + 1));
    }
    return sum;
  }

  // --- single terms (the homotopy's moving part) ---------------------------

  cplx term(int m, cplx s) const {
    return family_ == Family::classical ? b_term(m, s) : accel_b_term(m, s);
  }

  std::pair<cplx, cplx> term_with_deriv(int m, cplx s) const {
    const cplx chi_s = chi(s);
    const cplx chi_ld = chi_log_deriv(s);
    cplx f = 0.0, df = 0.0;
    auto fold = [&](double w, double ln_m) {
      const cplx p = w * std::exp(-s * ln_m);
      const cplx q = w * std::exp((s - 1.0) * ln_m);
      f += 0.5 * (p + chi_s * q);
      df += 0.5 * (-ln_m * p + chi_s * q * (chi_ld + ln_m));
    };
    if (family_ == Family::classical) {
      fold(1.0, std::log(static_cast<double>(m)));
    } else {
      const auto win = detail::weight_window(m);
      double w = win.w_lo;
      for (int k = win.k_lo; k <= win.k_hi; ++k) {
        fold(w, std::log(static_cast<double>(k + 1)));
        w *= static_cast<double>(m - k) / static_cast<double>(k + 1);
      }
    }
    return {f, df};
  }

  double term_line(int m, double t) const {
    const double th = rs_theta(t);
    if (family_ == Family::classical) {
      const double ln_m = std::log(static_cast<double>(m));
      return std::cos(th - t * ln_m) / std::sqrt(static_cast<double>(m));
    }
    const auto win = detail::weight_window(m);
    double w = win.w_lo;
    double sum = 0.0;
    for (int k = win.k_lo; k <= win.k_hi; ++k) {
      sum += w * std::cos(th - t * std::log(static_cast<double>(k + 1))) /
             std::sqrt(static_cast<double>(k + 1));
      w *= static_cast<double>(m - k) / static_cast<double>(k + 1);
    }
    return sum;
  }

 protected:
  void add_index(int n) {
    if (family_ == Family::classical) {
      prefix_.push_back(n);
      return;
    }
    const auto win = detail::weight_window(n);
    if (static_cast<int>(acc_w_.size()) <= win.k_hi)
      acc_w_.resize(static_cast<std::size_t>(win.k_hi) + 1, 0.0);
    double w = win.w_lo;
    for (int k = win.k_lo; k <= win.k_hi; ++k) {
      acc_w_[static_cast<std::size_t>(k)] += w;
      w *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
  }

  Family family_;
  std::optional<Rearrangement> rear_;
  int next_pos_ = 1;
  std::vector<int> prefix_;    // classical: summand indices in added order
  std::vector<double> acc_w_;  // transformed: collapsed weights over k
};

}  // namespace zsec

#endif  // ZSEC_SECTIONS_HPP
