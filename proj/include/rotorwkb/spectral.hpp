#pragma once

#include <memory>
#include <vector>

#include "rotorwkb/grid.hpp"

namespace rotorwkb {

/// In-place unnormalized FFT over a subset of grid axes, batched over the
/// remaining ones. Owns its FFTW plans; execute() is safe to call from
/// several threads on distinct buffers.
class GridFft {
 public:
  /// Transforms along a single axis.
  GridFft(const GridSpec& grid, int axis);
  /// Transforms along all active axes.
  explicit GridFft(const GridSpec& grid);
  ~GridFft();
  GridFft(GridFft&&) noexcept;
  GridFft& operator=(GridFft&&) noexcept;
  GridFft(const GridFft&) = delete;
  GridFft& operator=(const GridFft&) = delete;

  void forward(std::vector<cplx>& data) const;
  /// Inverse transform including the 1/N normalization of the transformed axes.
  void backward(std::vector<cplx>& data) const;

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t size_ = 0;
  double scale_ = 1.0;
};

/// Unnormalized forward 1-D DFT of an arbitrary-length sequence.
void fft_1d(std::vector<cplx>& data);

/// Angular wavenumbers pi/L * m in FFT order (m = 0..N/2-1, -N/2..-1).
std::vector<double> wavenumbers(const GridSpec& grid, int axis);

/// Spectral d/dx_axis. The Nyquist mode is dropped so that the discrete
/// operator stays skew-adjoint.
ComplexField spectral_derivative(const ComplexField& f, int axis);
std::vector<ComplexField> spectral_gradient(const ComplexField& f);

}  // namespace rotorwkb
