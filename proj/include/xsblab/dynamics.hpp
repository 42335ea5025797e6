#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xsblab/error.hpp"
#include "xsblab/scaling.hpp"
#include "xsblab/spectral.hpp"
#include "xsblab/xsb.hpp"

namespace xsblab {

enum class Dealias { two_thirds, none };
enum class SplitScheme { strang, lie };

struct SolveConfig {
  double dt = 1e-3;
  /// two_thirds keeps |k| <= nx/3: the cubic product input is truncated and
  /// the split-step state is filtered after every nonlinear substep.
  Dealias dealias = Dealias::two_thirds;
  SplitScheme scheme = SplitScheme::strang;
  std::size_t picard_max_iters = 60;
  double picard_tol = 1e-12;
  /// Sobolev index of the Picard residual norm.
  double residual_s = 0.0;

  void validate() const;
};

/// States u^(t_n), t_n = n dt, n = 0..steps.
struct Trajectory {
  SpaceTimeGrid grid;
  PhaseParams params;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SpatialSpectrum> states;
};

/// Raised when a state stops being finite; carries an estimate of the time
/// at which the amplitude diverges.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& message, double time_estimate)
      : Error(ErrorCode::blow_up, message), time_estimate_(time_estimate) {}
  double time_estimate() const noexcept { return time_estimate_; }

 private:
  double time_estimate_;
};

/// Raised when Picard residuals stop contracting.
class ContractionError : public Error {
 public:
  ContractionError(const std::string& message, std::vector<double> residuals)
      : Error(ErrorCode::outside_contraction, message), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Zeroes the modes with |k| > nx/3.
void dealias_two_thirds(SpatialSpectrum& u_hat);

/// i gamma |u|^2 u pointwise; with two_thirds the input and output spectra are truncated.
SpatialField cubic_nonlinearity(const SpatialField& u, cplx gamma, Dealias dealias,
                                const SpaceTimeGrid& grid);

/// Exact flow of u_t = -i gamma |u|^2 u over time h, pointwise. For Im gamma > 0
/// the modulus grows and diverges at h = 1 / (2 Im(gamma) |u|^2); throws BlowUpError.
void nonlinear_flow(SpatialField& u, cplx gamma, double h);

/// Split-step solution of u_t + i alpha u_xx + beta u_xxx + i gamma |u|^2 u = 0
/// on [0, T_final]. Requires T_final <= T_span / 2.
Trajectory splitstep_evolve(const SpatialSpectrum& u0_hat, const SolveConfig& cfg,
                            const PhaseParams& params, const SpaceTimeGrid& grid, double t_final);

struct PicardResult {
  Trajectory trajectory;
  /// sup_t ||u^{k+1} - u^k||_{H^s}, one entry per iteration.
  std::vector<double> residuals;
  bool converged = false;
};

/// Fixed point of u(t) = U(t) u0 - \int_0^t U(t - t') F(u(t')) dt' on the nodes
/// t_n = n dt (trapezoid per mode). Throws ContractionError when the residual
/// fails to decrease three iterations in a row.
PicardResult picard_iterate(const SpatialSpectrum& u0_hat, const SolveConfig& cfg,
                            const PhaseParams& params, const SpaceTimeGrid& grid, double t_final);

struct DuhamelResult {
  SpaceTimeField output;
  double output_norm = 0.0;
  double forcing_norm = 0.0;
  /// output_norm / (T^{1-b+b'} forcing_norm)
  double constant = 0.0;
};

/// psi_T(t) \int_0^t U(t - t') F(t') dt' on every node of the time box, measured
/// in X^{s,b} against ||F||_{X^{s,b'}}. Requires -1/2 < b' <= 0 <= b <= b' + 1 and
/// T in (0, min(1, T_span/4)].
DuhamelResult duhamel_apply(const SpaceTimeField& forcing, double t_window, const XsbIndex& idx,
                            const PhaseParams& params, const SpaceTimeGrid& grid);

/// Default forcing-side index b' = b - 1 + 0.1.
inline double default_b_prime(double b) { return b - 1.0 + 0.1; }

/// Ball radius and existence time of the contraction argument:
/// M = 2 C ||u0||_{H^s}, T^eps = 1 / (2 C M^2), eps = 1 - b + b'.
struct ContractionParams {
  double M = 0.0;
  double T = 0.0;
  double eps_contraction = 0.0;
  double C_measured = 1.0;
};

ContractionParams contraction_params(double u0_norm, double b, double b_prime, double c_measured);

struct DependencePoint {
  double delta = 0.0;
  double ratio = 0.0;
  bool skipped = false;
};

/// sup_t ||u - u~||_{H^s} / ||u0 - u~0||_{H^s} for u~0 = u0 + delta e, e a fixed
/// random unit H^s direction inside the dealiased band.
std::vector<DependencePoint> continuous_dependence_probe(const SpatialSpectrum& u0_hat,
                                                         const std::vector<double>& deltas,
                                                         double s, const SolveConfig& cfg,
                                                         const PhaseParams& params,
                                                         const SpaceTimeGrid& grid, double t_final,
                                                         std::uint64_t seed);

struct ExistencePoint {
  double lambda = 0.0;
  double t_observed = 0.0;
  /// Hit the probe ceiling T_span / 2.
  bool censored = false;
  /// Bisection could not bracket a contracting time.
  bool exhausted = false;
  double t_floor = 0.0;
};

struct ExistenceReport {
  std::vector<ExistencePoint> points;
  /// Fit over the uncensored points (empty when fewer than four).
  std::optional<ScalingReport> fit;
  double theory_slope = 0.0;
  bool floor_respected = true;
};

/// Largest T (bisection in log T) for which Picard contracts geometrically
/// (every residual ratio < 1 and convergence within the budget) for
/// u0 = lambda u0_shape.
ExistenceReport existence_time_probe(const SpatialSpectrum& u0_shape,
                                     const std::vector<double>& lambdas, double s, double b,
                                     double b_prime, const SolveConfig& cfg,
                                     const PhaseParams& params, const SpaceTimeGrid& grid,
                                     double c_measured = 1.0, std::size_t bisection_steps = 14);

/// Columns t, ||u||_{L^2}, ||u||_{H^s}.
void write_trajectory_csv(const Trajectory& traj, double s, const std::filesystem::path& path);

/// "XSBT", u32 version, u32 nx, u32 rows, then rows x nx little-endian complex64
/// samples u(x_j, t_n), one row per stored time.
void write_trajectory_binary(const Trajectory& traj, const std::filesystem::path& path);

struct BinaryDump {
  std::uint32_t version = 0;
  std::uint32_t nx = 0;
  std::uint32_t rows = 0;
  std::vector<std::complex<float>> values;
};
BinaryDump read_trajectory_binary(const std::filesystem::path& path);

}  // namespace xsblab
