#pragma once

#include "ilab/core.hpp"

namespace ilab {

/// Eigenvalue band [lo, hi] of a uniformly elliptic coefficient class.
/// The class S_delta corresponds to band [delta, 1/delta].
struct EllipticityBand {
  double lo = 1.0;
  double hi = 1.0;

  EllipticityBand() = default;
  EllipticityBand(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo > 0) || !(hi >= lo) || !std::isfinite(hi))
      throw InputError("EllipticityBand: need 0 < lo <= hi < inf");
  }
  static EllipticityBand from_delta(double delta) { return {delta, 1.0 / delta}; }

  bool contains(double ev, double tol = 0.0) const { return ev >= lo - tol && ev <= hi + tol; }
};

/// sup over a in the band of tr(a alpha) = hi * sum(ev+) - lo * sum(ev-).
inline double pucci_max(const SymMat& alpha, const EllipticityBand& band) {
  const auto ev = eigenvalues(alpha);
  double s = 0.0;
  for (int i = 0; i < alpha.dim(); ++i) s += ev[i] > 0 ? band.hi * ev[i] : band.lo * ev[i];
  return s;
}

/// inf over the band; equals -pucci_max(-alpha).
inline double pucci_min(const SymMat& alpha, const EllipticityBand& band) {
  const auto ev = eigenvalues(alpha);
  double s = 0.0;
  for (int i = 0; i < alpha.dim(); ++i) s += ev[i] > 0 ? band.lo * ev[i] : band.hi * ev[i];
  return s;
}

/// A maximizer of tr(a alpha) over the band: Q diag(c) Q^T with c = hi on
/// eigenvalues >= 0 and lo on negative ones. It is the gradient wherever
/// pucci_max is differentiable; the zero-eigenvalue tie-break picks hi.
inline SymMat pucci_gradient(const SymMat& alpha, const EllipticityBand& band) {
  const Spectrum sp = spectral_decompose(alpha);
  std::array<double, kMaxDim> c{};
  for (int i = 0; i < sp.dim; ++i) c[i] = sp.values[i] >= 0 ? band.hi : band.lo;
  return sp.compose(std::span<const double>(c.data(), sp.dim));
}

/// The minimizer counterpart of pucci_gradient.
inline SymMat pucci_min_gradient(const SymMat& alpha, const EllipticityBand& band) {
  const Spectrum sp = spectral_decompose(alpha);
  std::array<double, kMaxDim> c{};
  for (int i = 0; i < sp.dim; ++i) c[i] = sp.values[i] > 0 ? band.lo : band.hi;
  return sp.compose(std::span<const double>(c.data(), sp.dim));
}

/// Whether every eigenvalue of a lies in the band (with slack tol).
inline bool in_band(const SymMat& a, const EllipticityBand& band, double tol = 0.0) {
  const auto ev = eigenvalues(a);
  for (int i = 0; i < a.dim(); ++i)
    if (!band.contains(ev[i], tol)) return false;
  return true;
}

}  // namespace ilab
