#pragma once

// CG preconditioner for periodic structured meshes: the inverse of the
// constant-coefficient stiffness matrix (P1 in 1D, Q1 in 2D), applied by FFT
// and scaled by the mean diagonal of the actual matrix.

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "reiterhom/mesh.hpp"

namespace reiterhom::fem::detail {

struct SpectralPlan;

class SpectralPreconditioner {
 public:
  using Scalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  SpectralPreconditioner() = default;

  /// Must be called before compute(); the mesh has to be periodic.
  void setup(const fields::Mesh& mesh);

  template <class Mat>
  SpectralPreconditioner& analyzePattern(const Mat&) {
    return *this;
  }
  template <class Mat>
  SpectralPreconditioner& factorize(const Mat& m) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.outerSize(); ++j) {
      for (typename Mat::InnerIterator it(m, j); it; ++it) {
        if (it.row() == it.col()) sum += it.value();
      }
    }
    mean_diagonal_ = sum / static_cast<double>(m.rows());
    return *this;
  }
  template <class Mat>
  SpectralPreconditioner& compute(const Mat& m) {
    return factorize(m);
  }

  template <class Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    Eigen::VectorXd in = b;
    Eigen::VectorXd out(in.size());
    apply(in, out);
    return out;
  }

  Eigen::ComputationInfo info() const { return plan_ && mean_diagonal_ > 0.0 ? Eigen::Success : Eigen::NumericalIssue; }
  Eigen::Index rows() const noexcept { return size_; }
  Eigen::Index cols() const noexcept { return size_; }

 private:
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;

  std::shared_ptr<const SpectralPlan> plan_;
  Eigen::Index size_ = 0;
  double mean_diagonal_ = 0.0;
  struct Buffers;
  std::shared_ptr<Buffers> buffers_;
};

}  // namespace reiterhom::fem::detail
