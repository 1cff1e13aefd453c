#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mondyn/spin_hilbert.hpp"

namespace mondyn {

// Model families on an open chain of n_s + n_b sites. All carry a transverse
// field (j_x), a longitudinal field (j_z) and nearest-neighbour ZZ bonds
// (j_zz); kYY adds nearest-neighbour YY bonds, kXXX adds three-site XXX terms
// centred on each interior site. Couplings irrelevant to the chosen family
// are ignored.
enum class Variant { kIsing, kYY, kXXX };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct CouplingSpec {
  int n_s = 1;
  int n_b = 1;
  double j_x = 1.05;
  double j_z = 0.5;
  double j_zz = 1.0;
  double j_yy = 0.5;   // kYY only
  double j_xxx = 0.5;  // kXXX only
  Variant variant = Variant::kIsing;

  int total_sites() const { return n_s + n_b; }
  QubitPartition partition() const { return QubitPartition{n_s, n_b}; }
};

// Dense joint-space operators for one model instance. h is always the sum
// h_s + h_b + h_c, where each term of the chain is assigned by support:
// entirely on system sites -> h_s, entirely on bath sites -> h_b, crossing
// -> h_c. The optional members are filled in by mean_field_shift (h_s0, h_c0)
// and bath_split (h_bm, v); both stages keep every matrix on the joint space.
struct HamiltonianSet {
  CouplingSpec spec;
  Matrix h;
  Matrix h_s;
  Matrix h_b;
  Matrix h_c;
  std::optional<Matrix> h_s0;              // h_s + <reset|h_c|reset>, embedded
  std::optional<Matrix> h_c0;              // h_c - <reset|h_c|reset>, embedded
  std::optional<Matrix> h_bm;              // diagonal part of h_b
  std::optional<Matrix> v;                 // h_b - h_bm
  std::optional<StateVector> reset_state;  // the bath state used for the shift

  Eigen::Index dim() const { return h.rows(); }
  QubitPartition partition() const { return spec.partition(); }
};

// Constructs the joint Hamiltonian and its support decomposition.
HamiltonianSet build(const CouplingSpec& spec);

// Splits the coupling into its bath mean field over phi0 plus a remainder:
// h_s0 = h_s + <phi0|h_c|phi0> (x) 1_b and h_c0 = h_c - <phi0|h_c|phi0> (x) 1_b.
HamiltonianSet& mean_field_shift(HamiltonianSet& hs, const StateVector& phi0);

// Splits h_b into its computational-basis diagonal h_bm plus off-diagonal v.
HamiltonianSet& bath_split(HamiltonianSet& hs);

// Whether the transverse-field Ising chain is at its integrable point
// (j_z exactly zero). Only defined for Variant::kIsing; other families throw
// UnsupportedError.
bool is_integrable(const CouplingSpec& spec);

// Zeno decay exponent of the protocol: 3 when the shifted coupling h_c0 is
// block-diagonal in the bath computational basis (every off-diagonal bath
// block vanishes below 1e-12 in max norm), otherwise 1. Requires
// mean_field_shift to have run.
int classify_alpha(const HamiltonianSet& hs);

// --- joint-operator block helpers (shared by theory and tests) -------------

// System-space operator <m| A |m'> for bath basis indices m, m'.
Matrix bath_basis_block(const Matrix& joint_op, const QubitPartition& part, int m, int m_prime);

// System-space operator <phi| A |phi> for a general bath state phi.
Matrix bath_expectation(const Matrix& joint_op, const QubitPartition& part,
                        const StateVector& phi);

// op_s (x) 1_b on the joint space.
Matrix embed_system_operator(const Matrix& op_s, const QubitPartition& part);

}  // namespace mondyn
