#include "mondyn/spin_hilbert.hpp"

#include <cmath>
#include <stdexcept>

namespace mondyn {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(Eigen::Index n) {
  int k = 0;
  while ((Eigen::Index{1} << k) < n) ++k;
  return k;
}

void require_normalized(const StateVector& s, const char* who) {
  if (std::abs(s.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(who) + ": state is not normalized");
  }
}

}  // namespace

StateVector basis_state(int num_qubits, const std::string& bits) {
  if (num_qubits < 1) throw std::invalid_argument("basis_state: need at least one qubit");
  if (static_cast<int>(bits.size()) != num_qubits) {
    throw std::invalid_argument("basis_state: bit string length does not match qubit count");
  }
  Eigen::Index index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("basis_state: bits must be 0 or 1");
    index = (index << 1) | (c == '1' ? 1 : 0);
  }
  StateVector out;
  out.num_qubits = num_qubits;
  out.amplitudes = Vector::Zero(Eigen::Index{1} << num_qubits);
  out.amplitudes(index) = Complex{1.0, 0.0};
  return out;
}

StateVector zero_state(int num_qubits) {
  return basis_state(num_qubits, std::string(static_cast<size_t>(num_qubits), '0'));
}

StateVector from_amplitudes(Vector amplitudes) {
  if (!is_power_of_two(amplitudes.size())) {
    throw std::invalid_argument("from_amplitudes: length must be a power of two");
  }
  StateVector out;
  out.num_qubits = log2_exact(amplitudes.size());
  out.amplitudes = std::move(amplitudes);
  return out;
}

StateVector normalized(StateVector state) {
  const double n = state.norm();
  if (n <= 0.0) throw std::invalid_argument("normalized: zero vector");
  state.amplitudes /= n;
  return state;
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.num_qubits != b.num_qubits) {
    throw std::invalid_argument("inner_product: qubit counts differ");
  }
  return a.amplitudes.dot(b.amplitudes);  // Eigen's dot conjugates the left factor
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner_product(a, b));
}

Matrix pauli_matrix(const PauliString& word) {
  if (word.letters.empty()) throw std::invalid_argument("pauli_matrix: empty word");
  const Complex i{0.0, 1.0};
  Matrix x(2, 2), y(2, 2), z(2, 2), id(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  id << 1, 0, 0, 1;

  Matrix out = Matrix::Identity(1, 1);
  for (char c : word.letters) {
    const Matrix* factor = nullptr;
    switch (c) {
      case 'I': factor = &id; break;
      case 'X': factor = &x; break;
      case 'Y': factor = &y; break;
      case 'Z': factor = &z; break;
      default: throw std::invalid_argument("pauli_matrix: letters must be I, X, Y or Z");
    }
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index cidx = 0; cidx < out.cols(); ++cidx) {
        next.block(2 * r, 2 * cidx, 2, 2) = out(r, cidx) * (*factor);
      }
    }
    out = std::move(next);
  }
  return word.coefficient * out;
}

std::map<int, BathOutcome> measure_bath_distribution(const StateVector& joint,
                                                     const QubitPartition& part) {
  if (joint.num_qubits != part.total()) {
    throw std::invalid_argument("measure_bath_distribution: partition does not match state");
  }
  if (part.n_b < 1) throw std::invalid_argument("measure_bath_distribution: no bath qubits");
  require_normalized(joint, "measure_bath_distribution");

  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  std::map<int, BathOutcome> out;
  for (Eigen::Index m = 0; m < db; ++m) {
    Vector block(ds);
    for (Eigen::Index s = 0; s < ds; ++s) block(s) = joint.amplitudes(s * db + m);
    const double p = block.squaredNorm();
    if (p < kOutcomeEpsilon) continue;
    BathOutcome o;
    o.probability = p;
    o.system_state.num_qubits = part.n_s;
    o.system_state.amplitudes = block / std::sqrt(p);
    out.emplace(static_cast<int>(m), std::move(o));
  }
  return out;
}

StateVector attach_reset_bath(const StateVector& system, const QubitPartition& part,
                              const StateVector& reset) {
  if (system.num_qubits != part.n_s) {
    throw std::invalid_argument("attach_reset_bath: system size does not match partition");
  }
  if (reset.num_qubits != part.n_b) {
    throw std::invalid_argument("attach_reset_bath: reset size does not match partition");
  }
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  StateVector out;
  out.num_qubits = part.total();
  out.amplitudes = Vector(ds * db);
  for (Eigen::Index s = 0; s < ds; ++s) {
    out.amplitudes.segment(s * db, db) = system.amplitudes(s) * reset.amplitudes;
  }
  return out;
}

}  // namespace mondyn
