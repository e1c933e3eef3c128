#include <gtest/gtest.h>

#include <algorithm>

#include "qsuc/reference.hpp"
#include "qsuc/qubo.hpp"

using namespace qsuc;

TEST(Qubo, ZeroVectorGivesOffset) {
  Qubo q(3);
  q.add_linear(0, 2.0);
  q.add_quadratic(1, 2, -4.0);
  q.add_offset(1.5);
  EXPECT_EQ(qubo_value(q, Bits{0, 0, 0}), 1.5);
}

TEST(Qubo, ReferenceObjectiveValue) {
  EXPECT_EQ(qubo_value(reference::lbo_objective(), parse_bits("001101")), -18.0);
}

TEST(Qubo, SingleVariable) {
  Qubo q(1);
  q.add_linear(0, 1.0);
  EXPECT_EQ(qubo_value(q, Bits{1}), 1.0);
}

TEST(Qubo, LengthMismatchThrows) { EXPECT_THROW(qubo_value(Qubo(2), Bits{1}), InvalidArgument); }

TEST(Qubo, DiagonalAndReversedKeysAreCanonicalized) {
  Qubo q(3);
  q.add_quadratic(2, 0, 3.0);
  q.add_quadratic(0, 2, 1.0);
  q.add_quadratic(1, 1, 5.0);
  EXPECT_EQ(q.quadratic().size(), 1u);
  EXPECT_EQ(q.quadratic_at(0, 2), 4.0);
  EXPECT_EQ(q.quadratic_at(2, 0), 4.0);
  EXPECT_EQ(q.linear()[1], 5.0);
}

TEST(Qubo, RejectsBadIndicesAndNonFinite) {
  Qubo q(2);
  EXPECT_THROW(q.add_linear(2, 1.0), InvalidArgument);
  EXPECT_THROW(q.add_quadratic(0, 5, 1.0), InvalidArgument);
  EXPECT_THROW(q.add_linear(0, std::nan("")), InvalidArgument);
}

TEST(Qubo, BitStringsRoundTrip) {
  EXPECT_EQ(to_string(parse_bits("0110")), "0110");
  EXPECT_THROW(parse_bits("01x"), InvalidArgument);
  EXPECT_TRUE(lex_less(parse_bits("0011"), parse_bits("0100")));
}

TEST(Ising, SingleVariableSubstitution) {
  Qubo q(1);
  q.add_linear(0, 1.0);
  const auto m = qubo_to_ising(q);
  ASSERT_EQ(m.h.size(), 1u);
  EXPECT_DOUBLE_EQ(m.h[0], -0.5);
  EXPECT_DOUBLE_EQ(m.offset, 0.5);
  EXPECT_DOUBLE_EQ(ising_energy(m, Spins{-1}), 1.0);
  EXPECT_DOUBLE_EQ(ising_energy(m, Spins{1}), 0.0);
}

TEST(Ising, PairSubstitution) {
  Qubo q(2);
  q.add_quadratic(0, 1, 4.0);
  const auto m = qubo_to_ising(q);
  EXPECT_DOUBLE_EQ(m.J.at({0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(m.h[0], -1.0);
  EXPECT_DOUBLE_EQ(m.h[1], -1.0);
  EXPECT_DOUBLE_EQ(m.offset, 1.0);
  for (std::uint64_t b = 0; b < 4; ++b) {
    const Bits x{static_cast<std::uint8_t>(b & 1), static_cast<std::uint8_t>(b >> 1)};
    EXPECT_DOUBLE_EQ(qubo_value(q, x), ising_energy(m, spins_from_bits(x)));
  }
}

TEST(Ising, RandomEightVariableEquivalence) {
  const Qubo q = random_qubo(8, 77);
  const auto m = qubo_to_ising(q);
  for (std::size_t b = 0; b < 256; ++b) {
    const Bits x = basis_bits(b, 8);
    EXPECT_NEAR(qubo_value(q, x), ising_energy(m, spins_from_bits(x)), 1e-9);
  }
}

TEST(Ising, AllUpSpinsSumCoefficients) {
  IsingModel m{3, {0.5, -1.0, 2.0}, {{{0, 2}, 1.5}}, 0.25};
  EXPECT_DOUBLE_EQ(ising_energy(m, Spins{1, 1, 1}), 0.5 - 1.0 + 2.0 + 1.5 + 0.25);
}

TEST(Ising, ZeroModelAndBadSpins) {
  IsingModel m{3, {0, 0, 0}, {}, 0.0};
  EXPECT_EQ(ising_energy(m, Spins{1, -1, 1}), 0.0);
  EXPECT_THROW(ising_energy(m, Spins{1, 0, 1}), InvalidArgument);
  EXPECT_THROW(ising_energy(m, Spins{1, 1}), InvalidArgument);
}

TEST(Ising, SpinBitMapping) {
  const Bits x = parse_bits("0110");
  EXPECT_EQ(spins_from_bits(x), (Spins{1, -1, -1, 1}));
  EXPECT_EQ(bits_from_spins(spins_from_bits(x)), x);
}

TEST(Hamiltonian, SingleQubitEigenvalues) {
  IsingModel m{1, {1.0}, {}, 0.5};
  const auto d = hamiltonian_diagonal(m);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d[0], 1.5);
  EXPECT_DOUBLE_EQ(d[1], -0.5);
}

TEST(Hamiltonian, ZeroModel) {
  const auto d = hamiltonian_diagonal(IsingModel{3, {0, 0, 0}, {}, 0.0});
  EXPECT_EQ(d, std::vector<double>(8, 0.0));
}

TEST(Hamiltonian, DiagonalMatchesSpinEnumeration) {
  const auto m = qubo_to_ising(random_qubo(6, 5));
  const auto d = hamiltonian_diagonal(m);
  double best = 1e300;
  for (std::size_t b = 0; b < 64; ++b) {
    const double e = ising_energy(m, spins_from_bits(basis_bits(b, 6)));
    EXPECT_DOUBLE_EQ(d[b], e);
    best = std::min(best, e);
  }
  EXPECT_EQ(*std::min_element(d.begin(), d.end()), best);
}

TEST(Hamiltonian, SizeGuard) {
  IsingModel m;
  m.n = 21;
  m.h.assign(21, 0.0);
  EXPECT_THROW(hamiltonian_diagonal(m), SizeLimitError);
}

TEST(Encoding, FullRangeValue) {
  BinaryEncoding e{0.004, 12, 0};
  EXPECT_NEAR(encode_value(e, Bits(12, 1)), 16.38, 1e-12);
  EXPECT_NEAR(e.max_value(), 16.38, 1e-12);
  EXPECT_EQ(encode_value(e, Bits(12, 0)), 0.0);
}

TEST(Encoding, PlaceValues) {
  BinaryEncoding e{1.0, 3, 0};
  EXPECT_EQ(encode_value(e, Bits{1, 0, 1}), 5.0);
  EXPECT_EQ(encoding_terms(e), (std::vector<double>{1.0, 2.0, 4.0}));
  EXPECT_THROW(encode_value(e, Bits{1, 0}), InvalidArgument);
}

TEST(Encoding, DecodeAtOffsetAndCeil) {
  BinaryEncoding e{0.5, 4, 2};
  EXPECT_EQ(decode_from(e, parse_bits("11" "0110")), 3.0);
  EXPECT_EQ(encode_value(e, encode_ceil(e, 2.2)), 2.5);
  EXPECT_EQ(encode_value(e, encode_ceil(e, 2.5)), 2.5);
  EXPECT_EQ(encode_value(e, encode_ceil(e, -1.0)), 0.0);
  EXPECT_THROW(encode_ceil(e, 8.0), RangeError);
}

TEST(Encoding, Validation) {
  EXPECT_THROW((BinaryEncoding{0.0, 3, 0}.validate()), InvalidArgument);
  EXPECT_THROW((BinaryEncoding{1.0, 0, 0}.validate()), InvalidArgument);
  EXPECT_NO_THROW((BinaryEncoding{0.1, 8, 0}.validate()));
}

TEST(QubitAccounting, DeskScaleFigures) {
  const auto a = qubit_accounting(4, 24, 12, 13, 0);
  EXPECT_EQ(a.basic, 108u);
  EXPECT_EQ(a.phr, 108u);
  EXPECT_EQ(a.admm, 24u);
  EXPECT_EQ(qubit_accounting(4, 24, 12, 13, 2).basic, 134u);
  const auto z = qubit_accounting(0, 0, 0, 0, 0);
  EXPECT_EQ(z.basic + z.phr + z.admm, 0u);
}

TEST(QubitAccounting, Ordering) {
  for (std::size_t k = 0; k < 5; ++k) {
    const auto a = qubit_accounting(3, 6, 8, 9, k);
    EXPECT_LE(a.admm, a.phr);
    EXPECT_LE(a.phr, a.basic);
  }
}
