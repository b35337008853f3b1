#include "rotorwkb/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace rotorwkb {

namespace {

// The FFTW planner is not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan make_plan(const GridSpec& g, const std::vector<int>& axes, std::vector<cplx>& scratch,
                    int sign) {
  std::vector<fftw_iodim> dims, loops;
  for (int a = 0; a < 3; ++a) {
    fftw_iodim d;
    d.n = g.points[a];
    d.is = d.os = static_cast<int>(g.stride(a));
    bool transformed = false;
    for (int t : axes) transformed |= (t == a);
    if (transformed)
      dims.push_back(d);
    else if (g.points[a] > 1)
      loops.push_back(d);
  }
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_plan p = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(),
                                   static_cast<int>(loops.size()), loops.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw std::runtime_error("FFTW failed to create a plan");
  return p;
}

}  // namespace

void fft_1d(std::vector<cplx>& data) {
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    p = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (p == nullptr) throw std::runtime_error("FFTW failed to create a plan");
  fftw_execute(p);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(p);
}

struct GridFft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

GridFft::GridFft(const GridSpec& grid, int axis) : plans_(std::make_unique<Plans>()) {
  std::vector<cplx> scratch(grid.size());
  plans_->fwd = make_plan(grid, {axis}, scratch, FFTW_FORWARD);
  plans_->bwd = make_plan(grid, {axis}, scratch, FFTW_BACKWARD);
  size_ = grid.size();
  scale_ = 1.0 / grid.points[axis];
}

GridFft::GridFft(const GridSpec& grid) : plans_(std::make_unique<Plans>()) {
  std::vector<int> axes;
  double n = 1.0;
  for (int a = 0; a < grid.dim; ++a) {
    axes.push_back(a);
    n *= grid.points[a];
  }
  std::vector<cplx> scratch(grid.size());
  plans_->fwd = make_plan(grid, axes, scratch, FFTW_FORWARD);
  plans_->bwd = make_plan(grid, axes, scratch, FFTW_BACKWARD);
  size_ = grid.size();
  scale_ = 1.0 / n;
}

GridFft::~GridFft() = default;
GridFft::GridFft(GridFft&&) noexcept = default;
GridFft& GridFft::operator=(GridFft&&) noexcept = default;

void GridFft::forward(std::vector<cplx>& data) const {
  if (data.size() != size_) throw std::invalid_argument("GridFft: buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->fwd, buf, buf);
}

void GridFft::backward(std::vector<cplx>& data) const {
  if (data.size() != size_) throw std::invalid_argument("GridFft: buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->bwd, buf, buf);
  for (auto& z : data) z *= scale_;
}

std::vector<double> wavenumbers(const GridSpec& grid, int axis) {
  const int n = grid.points[axis];
  const double base = std::numbers::pi / grid.half_extent[axis];
  std::vector<double> k(n);
  for (int m = 0; m < n; ++m) k[m] = base * (m < n / 2 ? m : m - n);
  return k;
}

ComplexField spectral_derivative(const ComplexField& f, int axis) {
  const auto& g = f.grid;
  GridFft fft(g, axis);
  ComplexField out = f;
  fft.forward(out.values);
  auto k = wavenumbers(g, axis);
  k[g.points[axis] / 2] = 0.0;
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= I * k[g.unflatten(i)[axis]];
  fft.backward(out.values);
  return out;
}

std::vector<ComplexField> spectral_gradient(const ComplexField& f) {
  std::vector<ComplexField> grad;
  for (int a = 0; a < f.grid.dim; ++a) grad.push_back(spectral_derivative(f, a));
  return grad;
}

}  // namespace rotorwkb
