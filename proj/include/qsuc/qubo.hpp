#ifndef QSUC_QUBO_HPP
#define QSUC_QUBO_HPP

// QUBO and Ising coefficient containers, the spin substitution between them,
// the z-basis Hamiltonian diagonal, binary encoding of a bounded continuous
// variable, and qubit accounting for the three master-problem formulations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qsuc/errors.hpp"
#include "qsuc/rng.hpp"

namespace qsuc {

using Bits = std::vector<std::uint8_t>;
using Spins = std::vector<int>;

/// Renders x[0] first, so "001101" means x0=0, x1=0, x2=1, ...
inline std::string to_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

inline Bits parse_bits(std::string_view s) {
  Bits b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw InvalidArgument("bitstring may only contain '0' and '1': " + std::string(s));
    b[i] = static_cast<std::uint8_t>(s[i] == '1');
  }
  return b;
}

/// Lexicographic order on bitstrings, x[0] most significant.
inline bool lex_less(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

using PairKey = std::pair<std::size_t, std::size_t>;

/// Quadratic pseudo-boolean function
///   sum_{i<j} B_ij x_i x_j + sum_i c_i x_i + offset,  x in {0,1}^n.
/// Quadratic keys are canonical (i<j); diagonal terms fold into the linear part.
class Qubo {
 public:
  Qubo() = default;
  explicit Qubo(std::size_t n) : linear_(n, 0.0) {}

  std::size_t size() const { return linear_.size(); }
  const std::vector<double>& linear() const { return linear_; }
  const std::map<PairKey, double>& quadratic() const { return quadratic_; }
  double offset() const { return offset_; }

  void add_linear(std::size_t i, double v) {
    check_index(i);
    check_finite(v);
    linear_[i] += v;
  }

  /// Accepts either orientation; (i,i) folds into the linear term since x^2 = x.
  void add_quadratic(std::size_t i, std::size_t j, double v) {
    check_index(i);
    check_index(j);
    check_finite(v);
    if (i == j) {
      linear_[i] += v;
      return;
    }
    if (i > j) std::swap(i, j);
    quadratic_[{i, j}] += v;
  }

  void add_offset(double v) {
    check_finite(v);
    offset_ += v;
  }

  /// Adds `other`, whose variable k maps to this->variable(k + shift).
  void add(const Qubo& other, std::size_t shift = 0) {
    for (std::size_t i = 0; i < other.size(); ++i)
      if (other.linear_[i] != 0.0) add_linear(i + shift, other.linear_[i]);
    for (const auto& [key, v] : other.quadratic_) add_quadratic(key.first + shift, key.second + shift, v);
    offset_ += other.offset_;
  }

  double quadratic_at(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    auto it = quadratic_.find({i, j});
    return it == quadratic_.end() ? 0.0 : it->second;
  }

  /// Drops exact-zero quadratic entries left behind by cancellation.
  void prune() { std::erase_if(quadratic_, [](const auto& kv) { return kv.second == 0.0; }); }

  friend bool operator==(const Qubo&, const Qubo&) = default;

 private:
  void check_index(std::size_t i) const {
    if (i >= linear_.size())
      throw InvalidArgument("QUBO index " + std::to_string(i) + " out of range [0, " +
                            std::to_string(linear_.size()) + ")");
  }
  static void check_finite(double v) {
    if (!std::isfinite(v)) throw InvalidArgument("QUBO coefficient must be finite");
  }

  std::vector<double> linear_;
  std::map<PairKey, double> quadratic_;
  double offset_ = 0.0;
};

inline double qubo_value(const Qubo& q, std::span<const std::uint8_t> x) {
  if (x.size() != q.size())
    throw InvalidArgument("bitstring length " + std::to_string(x.size()) + " does not match QUBO size " +
                          std::to_string(q.size()));
  double e = q.offset();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) e += q.linear()[i];
  for (const auto& [key, v] : q.quadratic())
    if (x[key.first] && x[key.second]) e += v;
  return e;
}

/// Spin model sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset, s in {+1,-1}^n.
struct IsingModel {
  std::size_t n = 0;
  std::vector<double> h;
  std::map<PairKey, double> J;
  double offset = 0.0;
};

/// |0> is spin up: x = 0 <-> s = +1, x = 1 <-> s = -1.
inline Spins spins_from_bits(std::span<const std::uint8_t> x) {
  Spins s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? -1 : 1;
  return s;
}

inline Bits bits_from_spins(std::span<const int> s) {
  Bits x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = static_cast<std::uint8_t>(s[i] == -1);
  return x;
}

/// Substitutes x = (1 - s)/2. With canonical i<j keys the combined
/// coefficient B_ij already holds B_ij + B_ji of the general form, so
/// J_ij = B_ij/4 and h_i = -c_i/2 - sum_{j~i} B_ij/4.
inline IsingModel qubo_to_ising(const Qubo& q) {
  IsingModel m;
  m.n = q.size();
  m.h.assign(m.n, 0.0);
  m.offset = q.offset();
  for (std::size_t i = 0; i < m.n; ++i) {
    m.h[i] -= q.linear()[i] / 2.0;
    m.offset += q.linear()[i] / 2.0;
  }
  for (const auto& [key, b] : q.quadratic()) {
    m.J[key] += b / 4.0;
    m.h[key.first] -= b / 4.0;
    m.h[key.second] -= b / 4.0;
    m.offset += b / 4.0;
  }
  return m;
}

inline double ising_energy(const IsingModel& m, std::span<const int> s) {
  if (s.size() != m.n) throw InvalidArgument("spin string length does not match model size");
  double e = m.offset;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 1 && s[i] != -1) throw InvalidArgument("spin values must be +1 or -1");
    e += m.h[i] * s[i];
  }
  for (const auto& [key, v] : m.J) e += v * s[key.first] * s[key.second];
  return e;
}

inline constexpr std::size_t kMaxDiagonalQubits = 20;

/// Diagonal of sum J_ij Z_i Z_j + sum h_i Z_i (+ offset * I) in the
/// computational basis. Qubit 0 is the leftmost tensor factor, i.e. the most
/// significant bit of the basis index.
inline std::vector<double> hamiltonian_diagonal(const IsingModel& m) {
  if (m.n > kMaxDiagonalQubits)
    throw SizeLimitError("Hamiltonian diagonal limited to " + std::to_string(kMaxDiagonalQubits) + " qubits");
  const std::size_t dim = std::size_t{1} << m.n;
  std::vector<double> diag(dim);
  auto z = [&](std::size_t b, std::size_t i) { return ((b >> (m.n - 1 - i)) & 1u) ? -1 : 1; };
  // Same summation order as ising_energy, so the two agree bit for bit.
  for (std::size_t b = 0; b < dim; ++b) {
    double e = m.offset;
    for (std::size_t i = 0; i < m.n; ++i) e += m.h[i] * z(b, i);
    for (const auto& [key, v] : m.J) e += v * z(b, key.first) * z(b, key.second);
    diag[b] = e;
  }
  return diag;
}

/// Basis index -> bitstring using the same qubit ordering as hamiltonian_diagonal.
inline Bits basis_bits(std::size_t index, std::size_t n) {
  Bits x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>((index >> (n - 1 - i)) & 1u);
  return x;
}

/// value = chi * sum_{j<levels} 2^j u_j over qubits [base_index, base_index + levels).
struct BinaryEncoding {
  double chi = 1.0;
  std::size_t levels = 1;
  std::size_t base_index = 0;

  void validate() const {
    if (!(chi > 0.0) || !std::isfinite(chi)) throw InvalidArgument("encoding precision chi must be positive");
    if (levels < 1 || levels > 52) throw InvalidArgument("encoding levels must be in [1, 52]");
  }
  double max_value() const { return chi * (std::ldexp(1.0, static_cast<int>(levels)) - 1.0); }
};

inline double encode_value(const BinaryEncoding& e, std::span<const std::uint8_t> bits) {
  if (bits.size() != e.levels) throw InvalidArgument("encoded bit count does not match encoding levels");
  double v = 0.0;
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) v += std::ldexp(1.0, static_cast<int>(j));
  return e.chi * v;
}

/// Reads the encoded value out of a full assignment.
inline double decode_from(const BinaryEncoding& e, std::span<const std::uint8_t> x) {
  if (e.base_index + e.levels > x.size()) throw InvalidArgument("encoding does not fit in assignment");
  return encode_value(e, x.subspan(e.base_index, e.levels));
}

inline std::vector<double> encoding_terms(const BinaryEncoding& e) {
  std::vector<double> t(e.levels);
  for (std::size_t j = 0; j < e.levels; ++j) t[j] = e.chi * std::ldexp(1.0, static_cast<int>(j));
  return t;
}

/// Smallest code whose value is >= v (v clipped below at 0).
inline Bits encode_ceil(const BinaryEncoding& e, double v) {
  if (v > e.max_value() + 1e-12) throw RangeError("value exceeds encoding range");
  auto code = static_cast<std::uint64_t>(std::ceil(std::max(0.0, v) / e.chi - 1e-9));
  Bits b(e.levels);
  for (std::size_t j = 0; j < e.levels; ++j) b[j] = static_cast<std::uint8_t>((code >> j) & 1u);
  return b;
}

/// Dense random QUBO with linear and pair coefficients uniform in [lo, hi).
inline Qubo random_qubo(std::size_t n, std::uint64_t seed, double lo = -10.0, double hi = 10.0) {
  Rng rng(seed);
  Qubo q(n);
  for (std::size_t i = 0; i < n; ++i) q.add_linear(i, lo + (hi - lo) * rng.uniform());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) q.add_quadratic(i, j, lo + (hi - lo) * rng.uniform());
  return q;
}

struct QubitAccount {
  std::size_t generators = 0, periods = 0, levels = 0, slack_levels = 0, iterations = 0;
  std::size_t basic = 0;  // slack-encoded cuts: NT + J + kF
  std::size_t phr = 0;    // slack-free: NT + J
  std::size_t admm = 0;   // largest unit block: max{T, J}
};

inline QubitAccount qubit_accounting(std::size_t N, std::size_t T, std::size_t J, std::size_t F, std::size_t k) {
  QubitAccount a{N, T, J, F, k};
  a.phr = N * T + J;
  a.basic = a.phr + k * F;
  a.admm = std::max(T, J);
  return a;
}

}  // namespace qsuc

#endif  // QSUC_QUBO_HPP
