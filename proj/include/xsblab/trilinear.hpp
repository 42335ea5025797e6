#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xsblab/counterexample.hpp"
#include "xsblab/spectral.hpp"

namespace xsblab {

enum class FieldFamily { gaussian_modes, packet };

std::string to_string(FieldFamily family);

/// Random spectral field supported in |k| <= nx/3, |m| <= nt/3, concentrated
/// near the curve tau = phi(xi). Never identically zero.
SpectralField random_field(FieldFamily family, std::mt19937_64& rng, const PhaseParams& params,
                           const SpaceTimeGrid& grid);

/// u v conj(w) on the grid doubled in both directions. With inputs in the
/// third band the product is alias-free there.
struct TrilinearProduct {
  SpaceTimeGrid grid;
  SpectralField product;
};
TrilinearProduct trilinear_product(const SpectralField& u, const SpectralField& v,
                                   const SpectralField& w, const SpaceTimeGrid& grid);

/// ||u v conj(w)||_{X^{s,b-1}} / (||u|| ||v|| ||w||)_{X^{s,b}}
double trilinear_ratio(const SpectralField& u, const SpectralField& v, const SpectralField& w,
                       double s, double b, const PhaseParams& params, const SpaceTimeGrid& grid);

struct TrilinearWitness {
  std::size_t index = 0;
  FieldFamily families[3] = {FieldFamily::gaussian_modes, FieldFamily::gaussian_modes,
                             FieldFamily::gaussian_modes};
  double ratio = 0.0;
};

struct TrilinearReport {
  /// ratios[i] belongs to triple i; triple i depends only on (seed, i).
  std::vector<double> ratios;
  double sup_ratio = 0.0;
  TrilinearWitness witness;

  /// max over the first `count` triples.
  double prefix_max(std::size_t count) const;
};

/// Random-triple search on a periodic box. Requires -1/4 < s <= 0, 7/12 < b < 11/12.
TrilinearReport trilinear_ratio_search(double s, double b, std::size_t ensemble_size,
                                       const SpaceTimeGrid& grid, const PhaseParams& params,
                                       std::uint64_t seed);

/// Bump-family members of the search: the counterexample ratio for each N.
/// No range check on s, so the family can probe s < -1/4.
std::vector<CounterexampleRatio> bump_family_ratios(const std::vector<double>& n_values, double s,
                                                    double b,
                                                    const CounterexampleResolution& resolution,
                                                    const PhaseParams& params);

}  // namespace xsblab
