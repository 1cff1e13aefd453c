#pragma once

#include <complex>
#include <map>
#include <string>

#include <Eigen/Dense>

namespace mondyn {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Index convention used throughout: qubit 0 is the MOST significant bit of
// the basis index. System qubits occupy positions 0..n_s-1 and bath qubits
// n_s..n_s+n_b-1, so the amplitudes of a fixed system configuration form one
// contiguous block of length 2^n_b in a joint state vector.

// Outcomes with probability below this are dropped from measurement
// distributions (they would produce ill-conditioned collapsed states).
inline constexpr double kOutcomeEpsilon = 1e-14;

struct StateVector {
  Vector amplitudes;
  int num_qubits = 0;

  Eigen::Index dim() const { return Eigen::Index{1} << num_qubits; }
  double norm() const { return amplitudes.norm(); }
};

struct QubitPartition {
  int n_s = 1;  // system qubits (high bits)
  int n_b = 1;  // bath qubits (low bits)

  int total() const { return n_s + n_b; }
  Eigen::Index system_dim() const { return Eigen::Index{1} << n_s; }
  Eigen::Index bath_dim() const { return Eigen::Index{1} << n_b; }
};

// One tensor-product Pauli word, one letter per qubit, with a real weight.
struct PauliString {
  std::string letters;  // over {I, X, Y, Z}; letters[q] acts on qubit q
  double coefficient = 1.0;
};

// |bits> as a computational basis state; bits[0] refers to qubit 0.
StateVector basis_state(int num_qubits, const std::string& bits);

// All-|0...0> state on num_qubits qubits.
StateVector zero_state(int num_qubits);

// Wraps a raw amplitude vector (length must be a power of two).
StateVector from_amplitudes(Vector amplitudes);

StateVector normalized(StateVector state);

Complex inner_product(const StateVector& a, const StateVector& b);

// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

// Dense matrix of coefficient * (letter_0 x letter_1 x ... x letter_{n-1}).
Matrix pauli_matrix(const PauliString& word);

struct BathOutcome {
  double probability = 0.0;
  StateVector system_state;  // collapsed and normalized
};

// Born distribution of a computational-basis measurement of the bath qubits
// of a normalized joint state, keyed by bath basis index. Entries with
// probability < kOutcomeEpsilon are omitted; the kept probabilities sum to 1
// up to that tolerance.
std::map<int, BathOutcome> measure_bath_distribution(const StateVector& joint,
                                                     const QubitPartition& part);

// system (x) reset, with the bath occupying the low bits.
StateVector attach_reset_bath(const StateVector& system, const QubitPartition& part,
                              const StateVector& reset);

}  // namespace mondyn
