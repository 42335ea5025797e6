#include "xsblab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "xsblab/error.hpp"

namespace xsblab::fft {
namespace {

// FFTW's planner is not reentrant; the executor is. Plans are created once per
// (shape, direction) with FFTW_UNALIGNED so they can run on any buffer.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, std::size_t cols, Direction dir) {
    const auto key = std::make_tuple(rows, cols, dir == Direction::forward);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t n = rows * cols;
    std::vector<cplx> scratch_in(n), scratch_out(n);
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rows == 1
                         ? fftw_plan_dft_1d(static_cast<int>(cols), in, out, sign, flags)
                         : fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), in,
                                            out, sign, flags);
    if (plan == nullptr) throw Error(ErrorCode::invalid_argument, "FFTW could not create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void run(std::span<const cplx> in, std::span<cplx> out, std::size_t rows, std::size_t cols,
         Direction dir) {
  const std::size_t n = rows * cols;
  require(n > 0, ErrorCode::dimension_mismatch, "empty transform");
  require(in.size() == n && out.size() == n, ErrorCode::dimension_mismatch,
          "transform buffers do not match the requested shape");
  fftw_plan plan = cache().get(rows, cols, dir);
  // FFTW wants a mutable input pointer; the out-of-place DFT does not modify it.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (in.data() == out.data()) {
    std::vector<cplx> copy(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(copy.data()), dst);
  } else {
    fftw_execute_dft(plan, src, dst);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
}

}  // namespace

void transform_1d(std::span<const cplx> in, std::span<cplx> out, Direction dir) {
  run(in, out, 1, in.size(), dir);
}

void transform_2d(std::span<const cplx> in, std::span<cplx> out, std::size_t rows,
                  std::size_t cols, Direction dir) {
  run(in, out, rows, cols, dir);
}

}  // namespace xsblab::fft
