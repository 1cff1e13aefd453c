#include "mondyn/propagator.hpp"

#include <cmath>
#include <stdexcept>

namespace mondyn {

Spectral hermitian_eig(const Matrix& h) {
  if (h.rows() != h.cols() || h.rows() < 1) {
    throw std::invalid_argument("hermitian_eig: matrix must be square and non-empty");
  }
  const double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }
  Spectral out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  return out;
}

Matrix propagator(const Spectral& spectral, double dt) {
  if (!std::isfinite(dt)) throw std::invalid_argument("propagator: non-finite time step");
  const Eigen::Index d = spectral.dim();
  Vector phases(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    phases(k) = std::exp(Complex{0.0, -spectral.eigenvalues(k) * dt});
  }
  return spectral.eigenvectors * phases.asDiagonal() * spectral.eigenvectors.adjoint();
}

StateVector evolve(const Matrix& u, const StateVector& psi) {
  if (u.cols() != psi.amplitudes.size()) {
    throw std::invalid_argument("evolve: dimension mismatch");
  }
  StateVector out;
  out.num_qubits = psi.num_qubits;
  out.amplitudes = u * psi.amplitudes;
  return out;
}

}  // namespace mondyn
