// Copyright 2026 The qbc3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Reference computations for the tests. Everything here is written with
// explicit index loops or closed forms and never calls the library's
// linear algebra, so agreement is a real cross-check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qbc3/core.hpp"

namespace oracle {

using qbc3::Complex;
using qbc3::Matrix;
using qbc3::Vector;

inline std::vector<std::size_t> digits(std::size_t index, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> d(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    d[k] = index % dims[k];
    index /= dims[k];
  }
  return d;
}

inline std::size_t flat(const std::vector<std::size_t>& d, const std::vector<std::size_t>& dims) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) index = index * dims[k] + d[k];
  return index;
}

inline std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

/// rho_keep[(a),(a')] = sum over the other digits of psi psi^*.
inline Matrix partial_trace(const Vector& psi, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> kdims;
  for (auto k : keep) kdims.push_back(dims[k]);
  const std::size_t kd = product(kdims);
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  const std::size_t total = product(dims);
  for (std::size_t i = 0; i < total; ++i) {
    const auto di = digits(i, dims);
    for (std::size_t j = 0; j < total; ++j) {
      const auto dj = digits(j, dims);
      bool same_rest = true;
      for (std::size_t w = 0; w < dims.size() && same_rest; ++w) {
        bool kept = false;
        for (auto k : keep) kept = kept || k == w;
        if (!kept && di[w] != dj[w]) same_rest = false;
      }
      if (!same_rest) continue;
      std::vector<std::size_t> ki, kj;
      for (auto k : keep) {
        ki.push_back(di[k]);
        kj.push_back(dj[k]);
      }
      rho(static_cast<Eigen::Index>(flat(ki, kdims)), static_cast<Eigen::Index>(flat(kj, kdims))) +=
          psi(static_cast<Eigen::Index>(i)) * std::conj(psi(static_cast<Eigen::Index>(j)));
    }
  }
  return rho;
}

/// Applies `u` to the ordered wire positions `targets` by explicit summation.
inline Vector apply(const Vector& psi, const std::vector<std::size_t>& dims, const Matrix& u,
                    const std::vector<std::size_t>& targets) {
  std::vector<std::size_t> tdims;
  for (auto t : targets) tdims.push_back(dims[t]);
  Vector out = Vector::Zero(psi.size());
  const std::size_t total = product(dims);
  for (std::size_t i = 0; i < total; ++i) {
    const auto di = digits(i, dims);
    std::vector<std::size_t> sub;
    for (auto t : targets) sub.push_back(di[t]);
    const std::size_t col = flat(sub, tdims);
    for (std::size_t row = 0; row < product(tdims); ++row) {
      auto dout = di;
      const auto rd = digits(row, tdims);
      for (std::size_t k = 0; k < targets.size(); ++k) dout[targets[k]] = rd[k];
      out(static_cast<Eigen::Index>(flat(dout, dims))) +=
          u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) * psi(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

/// Closed form for qubits: F^2 = tr(rho sigma) + 2 sqrt(det rho det sigma).
inline double qubit_fidelity(const Matrix& rho, const Matrix& sigma) {
  const double tr = (rho * sigma).trace().real();
  const double dr = std::max(0.0, rho.determinant().real());
  const double ds = std::max(0.0, sigma.determinant().real());
  return std::sqrt(std::max(0.0, tr + 2.0 * std::sqrt(dr * ds)));
}

/// Closed form for qubits: eigenvalues of a traceless Hermitian 2x2 are
/// +-sqrt(a^2 + |b|^2).
inline double qubit_trace_distance(const Matrix& rho, const Matrix& sigma) {
  const Matrix d = rho - sigma;
  const double a = (d(0, 0).real() - d(1, 1).real()) / 2.0;
  return std::sqrt(a * a + std::norm(d(0, 1)));
}

/// Schmidt rank across the cut (first `rows_dim` amplitudes index) via the
/// Gram matrix M M^dagger and a power-free eigenvalue count.
inline std::size_t schmidt_rank(const Vector& psi, std::size_t rows_dim, double tol = 1e-10) {
  const std::size_t cols = static_cast<std::size_t>(psi.size()) / rows_dim;
  Matrix m(static_cast<Eigen::Index>(rows_dim), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows_dim; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = psi(static_cast<Eigen::Index>(r * cols + c));
  Eigen::SelfAdjointEigenSolver<Matrix> es(m * m.adjoint());
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rank += es.eigenvalues()(i) > tol ? 1 : 0;
  return rank;
}

inline Vector random_state(std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = Complex(g(gen), g(gen));
  return v / v.norm();
}

/// Haar unitary by Gram-Schmidt on Gaussian columns (independent of the
/// library's QR route).
inline Matrix haar_unitary(std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix q(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Vector v(d);
    for (auto& x : v) x = Complex(g(gen), g(gen));
    for (Eigen::Index p = 0; p < c; ++p) v -= q.col(p) * q.col(p).dot(v);
    q.col(c) = v / v.norm();
  }
  return q;
}

inline Matrix random_density(std::size_t dim, std::size_t rank, std::mt19937_64& gen) {
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double total = 0.0;
  std::vector<double> w(rank);
  for (auto& x : w) total += (x = u(gen));
  for (std::size_t k = 0; k < rank; ++k) {
    const Vector v = random_state(dim, gen);
    rho += (w[k] / total) * v * v.adjoint();
  }
  return (rho + rho.adjoint()) / 2.0;
}

/// (cos a, sin a) with a = (id - 1) pi / 4.
inline Vector bb84(int id) {
  const double a = (id - 1) * std::numbers::pi / 4.0;
  Vector v(2);
  v << std::cos(a), std::sin(a);
  return v;
}

/// B's committed-qubit view: (1/n) sum_k R(+-theta)|j_k><j_k|R^dagger.
inline Matrix committed_view(const std::vector<int>& ids, double theta, int bit) {
  const double t = bit == 0 ? theta : -theta;
  Matrix rho = Matrix::Zero(2, 2);
  for (int id : ids) {
    const double a = (id - 1) * std::numbers::pi / 4.0 + t;
    Vector v(2);
    v << std::cos(a), std::sin(a);
    rho += v * v.adjoint();
  }
  return rho / static_cast<double>(ids.size());
}

}  // namespace oracle
