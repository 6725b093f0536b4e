#include "spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "reiterhom/error.hpp"

namespace reiterhom::fem::detail {

struct SpectralPlan {
  int dim = 1;
  int n = 0;
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  // 1 / (N sigma) per retained frequency, 0 for the constant mode; sigma is
  // the stencil symbol divided by its diagonal.
  std::vector<double> inverse_symbol;
};

struct SpectralPreconditioner::Buffers {
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  ~Buffers() {
    fftw_free(real);
    fftw_free(spectrum);
  }
};

namespace {

std::shared_ptr<const SpectralPlan> plan_for(int dim, int n, double ratio) {
  // FFTW planning is not thread safe; plans live for the whole process.
  static std::mutex mutex;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const SpectralPlan>> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(dim, n, ratio);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto plan = std::make_shared<SpectralPlan>();
  plan->dim = dim;
  plan->n = n;
  const int half = n / 2 + 1;
  plan->real_size = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  plan->complex_size = dim == 1 ? static_cast<std::size_t>(half) : static_cast<std::size_t>(n) * half;
  double* real = fftw_alloc_real(plan->real_size);
  fftw_complex* spectrum = fftw_alloc_complex(plan->complex_size);
  if (dim == 1) {
    plan->forward = fftw_plan_dft_r2c_1d(n, real, spectrum, FFTW_ESTIMATE);
    plan->backward = fftw_plan_dft_c2r_1d(n, spectrum, real, FFTW_ESTIMATE);
  } else {
    plan->forward = fftw_plan_dft_r2c_2d(n, n, real, spectrum, FFTW_ESTIMATE);
    plan->backward = fftw_plan_dft_c2r_2d(n, n, spectrum, real, FFTW_ESTIMATE);
  }
  fftw_free(real);
  fftw_free(spectrum);

  const double scale = static_cast<double>(plan->real_size);
  plan->inverse_symbol.assign(plan->complex_size, 0.0);
  const double w = 2.0 * std::numbers::pi / n;
  if (dim == 1) {
    for (int k = 1; k < half; ++k) plan->inverse_symbol[k] = 1.0 / (scale * (1.0 - std::cos(w * k)));
  } else {
    // Q1 stiffness on hx x hy cells; ratio = hy / hx.
    const double diag = (4.0 / 3.0) * (ratio + 1.0 / ratio);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < half; ++i) {
        if (i == 0 && j == 0) continue;
        const double c1 = std::cos(w * i), c2 = std::cos(w * j);
        const double symbol =
            (2.0 / 3.0) * (ratio * (1.0 - c1) * (2.0 + c2) + (1.0 / ratio) * (1.0 - c2) * (2.0 + c1));
        plan->inverse_symbol[static_cast<std::size_t>(j) * half + i] = diag / (scale * symbol);
      }
    }
  }
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void SpectralPreconditioner::setup(const fields::Mesh& mesh) {
  if (!mesh.periodic()) throw Error(Errc::domain, "the spectral preconditioner needs a periodic mesh");
  const double ratio = mesh.dim() == 2 ? mesh.spacing(1) / mesh.spacing(0) : 1.0;
  plan_ = plan_for(mesh.dim(), mesh.cells_per_axis(), ratio);
  size_ = static_cast<Eigen::Index>(plan_->real_size);
  buffers_ = std::make_shared<Buffers>();
  buffers_->real = fftw_alloc_real(plan_->real_size);
  buffers_->spectrum = fftw_alloc_complex(plan_->complex_size);
}

void SpectralPreconditioner::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  const SpectralPlan& p = *plan_;
  std::copy(in.data(), in.data() + p.real_size, buffers_->real);
  fftw_execute_dft_r2c(p.forward, buffers_->real, buffers_->spectrum);
  // The symbol is normalized by the stencil diagonal, so dividing by the
  // mean matrix diagonal restores the scale.
  const double unit = 1.0 / mean_diagonal_;
  for (std::size_t k = 0; k < p.complex_size; ++k) {
    const double f = p.inverse_symbol[k] * unit;
    buffers_->spectrum[k][0] *= f;
    buffers_->spectrum[k][1] *= f;
  }
  fftw_execute_dft_c2r(p.backward, buffers_->spectrum, buffers_->real);
  std::copy(buffers_->real, buffers_->real + p.real_size, out.data());
}

}  // namespace reiterhom::fem::detail
