#include "mondyn/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

#include "mondyn/errors.hpp"

namespace mondyn {

namespace {

constexpr double kBathBlockTolerance = 1e-12;

struct Term {
  PauliString word;
  enum class Support { kSystem, kBath, kCoupling } support;
};

Term::Support classify_support(const PauliString& word, int n_s) {
  bool on_system = false;
  bool on_bath = false;
  for (size_t q = 0; q < word.letters.size(); ++q) {
    if (word.letters[q] == 'I') continue;
    (static_cast<int>(q) < n_s ? on_system : on_bath) = true;
  }
  // A weightless term (all identity) carries an energy offset; assign it to
  // the system part so the decomposition stays exhaustive. Does not occur for
  // the families built here.
  if (on_bath && on_system) return Term::Support::kCoupling;
  if (on_bath) return Term::Support::kBath;
  return Term::Support::kSystem;
}

PauliString single_site(int n, int site, char letter, double coefficient) {
  PauliString w;
  w.letters = std::string(static_cast<size_t>(n), 'I');
  w.letters[static_cast<size_t>(site)] = letter;
  w.coefficient = coefficient;
  return w;
}

std::vector<PauliString> chain_terms(const CouplingSpec& spec) {
  const int n = spec.total_sites();
  std::vector<PauliString> terms;
  for (int j = 0; j < n; ++j) {
    if (spec.j_x != 0.0) terms.push_back(single_site(n, j, 'X', spec.j_x));
    if (spec.j_z != 0.0) terms.push_back(single_site(n, j, 'Z', spec.j_z));
  }
  for (int j = 0; j + 1 < n; ++j) {
    if (spec.j_zz != 0.0) {
      PauliString w = single_site(n, j, 'Z', spec.j_zz);
      w.letters[static_cast<size_t>(j + 1)] = 'Z';
      terms.push_back(w);
    }
    if (spec.variant == Variant::kYY && spec.j_yy != 0.0) {
      PauliString w = single_site(n, j, 'Y', spec.j_yy);
      w.letters[static_cast<size_t>(j + 1)] = 'Y';
      terms.push_back(w);
    }
  }
  if (spec.variant == Variant::kXXX && spec.j_xxx != 0.0) {
    for (int j = 1; j + 1 < n; ++j) {
      PauliString w = single_site(n, j - 1, 'X', spec.j_xxx);
      w.letters[static_cast<size_t>(j)] = 'X';
      w.letters[static_cast<size_t>(j + 1)] = 'X';
      terms.push_back(w);
    }
  }
  return terms;
}

void validate_spec(const CouplingSpec& spec) {
  if (spec.n_s < 1) throw std::invalid_argument("build: need at least one system site");
  if (spec.n_b < 0) throw std::invalid_argument("build: negative bath size");
  const int n = spec.total_sites();
  if (n > 24) throw std::invalid_argument("build: dense construction capped at 24 sites");
  for (double j : {spec.j_x, spec.j_z, spec.j_zz, spec.j_yy, spec.j_xxx}) {
    if (!std::isfinite(j)) throw std::invalid_argument("build: non-finite coupling");
  }
  const bool wants_bonds =
      spec.j_zz != 0.0 || (spec.variant == Variant::kYY && spec.j_yy != 0.0);
  if (wants_bonds && n < 2) {
    throw std::invalid_argument("build: two-site terms requested on a single-site chain");
  }
  if (spec.variant == Variant::kXXX && spec.j_xxx != 0.0 && n < 3) {
    throw std::invalid_argument("build: three-site terms requested on a chain shorter than 3");
  }
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kIsing: return "ising";
    case Variant::kYY: return "yy";
    case Variant::kXXX: return "xxx";
  }
  return "ising";
}

Variant variant_from_name(const std::string& name) {
  if (name == "ising") return Variant::kIsing;
  if (name == "yy") return Variant::kYY;
  if (name == "xxx") return Variant::kXXX;
  throw std::invalid_argument("unknown model variant '" + name + "'");
}

HamiltonianSet build(const CouplingSpec& spec) {
  validate_spec(spec);
  const Eigen::Index dim = Eigen::Index{1} << spec.total_sites();

  HamiltonianSet hs;
  hs.spec = spec;
  hs.h = Matrix::Zero(dim, dim);
  hs.h_s = Matrix::Zero(dim, dim);
  hs.h_b = Matrix::Zero(dim, dim);
  hs.h_c = Matrix::Zero(dim, dim);

  for (const PauliString& word : chain_terms(spec)) {
    const Matrix m = pauli_matrix(word);
    hs.h += m;
    switch (classify_support(word, spec.n_s)) {
      case Term::Support::kSystem: hs.h_s += m; break;
      case Term::Support::kBath: hs.h_b += m; break;
      case Term::Support::kCoupling: hs.h_c += m; break;
    }
  }
  return hs;
}

HamiltonianSet& mean_field_shift(HamiltonianSet& hs, const StateVector& phi0) {
  const QubitPartition part = hs.partition();
  if (part.n_b < 1) throw std::invalid_argument("mean_field_shift: no bath sites");
  if (phi0.num_qubits != part.n_b) {
    throw std::invalid_argument("mean_field_shift: reset state size does not match bath");
  }
  if (std::abs(phi0.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("mean_field_shift: reset state is not normalized");
  }
  const Matrix mean_field =
      embed_system_operator(bath_expectation(hs.h_c, part, phi0), part);
  hs.h_s0 = hs.h_s + mean_field;
  hs.h_c0 = hs.h_c - mean_field;
  hs.reset_state = phi0;
  return hs;
}

HamiltonianSet& bath_split(HamiltonianSet& hs) {
  hs.h_bm = Matrix(hs.h_b.diagonal().asDiagonal());
  hs.v = hs.h_b - *hs.h_bm;
  return hs;
}

bool is_integrable(const CouplingSpec& spec) {
  if (spec.variant != Variant::kIsing) {
    throw UnsupportedError("is_integrable: criterion only defined for the ising family");
  }
  return spec.j_z == 0.0;
}

int classify_alpha(const HamiltonianSet& hs) {
  if (!hs.h_c0) throw std::invalid_argument("classify_alpha: run mean_field_shift first");
  const QubitPartition part = hs.partition();
  const Eigen::Index db = part.bath_dim();
  for (Eigen::Index m = 0; m < db; ++m) {
    for (Eigen::Index mp = 0; mp < db; ++mp) {
      if (m == mp) continue;
      const Matrix block = bath_basis_block(*hs.h_c0, part, static_cast<int>(m),
                                            static_cast<int>(mp));
      if (block.cwiseAbs().maxCoeff() > kBathBlockTolerance) return 1;
    }
  }
  return 3;
}

Matrix bath_basis_block(const Matrix& joint_op, const QubitPartition& part, int m, int m_prime) {
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  if (joint_op.rows() != ds * db || joint_op.cols() != ds * db) {
    throw std::invalid_argument("bath_basis_block: operator does not match partition");
  }
  if (m < 0 || m >= db || m_prime < 0 || m_prime >= db) {
    throw std::invalid_argument("bath_basis_block: bath index out of range");
  }
  Matrix block(ds, ds);
  for (Eigen::Index i = 0; i < ds; ++i) {
    for (Eigen::Index j = 0; j < ds; ++j) {
      block(i, j) = joint_op(i * db + m, j * db + m_prime);
    }
  }
  return block;
}

Matrix bath_expectation(const Matrix& joint_op, const QubitPartition& part,
                        const StateVector& phi) {
  if (phi.num_qubits != part.n_b) {
    throw std::invalid_argument("bath_expectation: bath state size does not match partition");
  }
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  Matrix out = Matrix::Zero(ds, ds);
  for (Eigen::Index a = 0; a < db; ++a) {
    const Complex ca = std::conj(phi.amplitudes(a));
    for (Eigen::Index b = 0; b < db; ++b) {
      const Complex weight = ca * phi.amplitudes(b);
      if (weight == Complex{0.0, 0.0}) continue;
      out += weight * bath_basis_block(joint_op, part, static_cast<int>(a), static_cast<int>(b));
    }
  }
  return out;
}

Matrix embed_system_operator(const Matrix& op_s, const QubitPartition& part) {
  const Eigen::Index ds = part.system_dim();
  const Eigen::Index db = part.bath_dim();
  if (op_s.rows() != ds || op_s.cols() != ds) {
    throw std::invalid_argument("embed_system_operator: operator does not match partition");
  }
  Matrix out = Matrix::Zero(ds * db, ds * db);
  for (Eigen::Index i = 0; i < ds; ++i) {
    for (Eigen::Index j = 0; j < ds; ++j) {
      if (op_s(i, j) == Complex{0.0, 0.0}) continue;
      for (Eigen::Index b = 0; b < db; ++b) out(i * db + b, j * db + b) = op_s(i, j);
    }
  }
  return out;
}

}  // namespace mondyn
