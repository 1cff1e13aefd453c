#pragma once

#include <Eigen/Dense>

#include "mondyn/spin_hilbert.hpp"

namespace mondyn {

// Spectral decomposition of a Hermitian operator; eigenvalues ascending,
// eigenvectors as columns. One decomposition per operator is enough to build
// the propagator for every time step of a sweep.
struct Spectral {
  Eigen::VectorXd eigenvalues;
  Matrix eigenvectors;

  Eigen::Index dim() const { return eigenvectors.rows(); }
};

// Rejects input whose anti-Hermitian part exceeds an absolute tolerance of
// 1e-10 in max norm.
Spectral hermitian_eig(const Matrix& h);

// exp(-i h dt) assembled from the spectral data.
Matrix propagator(const Spectral& spectral, double dt);

StateVector evolve(const Matrix& u, const StateVector& psi);

}  // namespace mondyn
