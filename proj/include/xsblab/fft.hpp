#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace xsblab::fft {

using cplx = std::complex<double>;

enum class Direction { forward, inverse };

// Unitary DFTs (1/sqrt(n) on both directions). Forward uses the e^{-i} kernel.
// Plans are cached process-wide behind a mutex; execution is lock-free.
void transform_1d(std::span<const cplx> in, std::span<cplx> out, Direction dir);

/// Row-major rows x cols array.
void transform_2d(std::span<const cplx> in, std::span<cplx> out, std::size_t rows,
                  std::size_t cols, Direction dir);

}  // namespace xsblab::fft
