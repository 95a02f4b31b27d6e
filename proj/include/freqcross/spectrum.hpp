#pragma once

#include <string>
#include <vector>

#include "freqcross/fft.hpp"

namespace freqcross {

struct MagnitudeSpectrum {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // row-major, nonnegative
  bool centered = false;     // true once DC sits at (H/2, W/2)

  MagnitudeSpectrum() = default;
  MagnitudeSpectrum(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.0) {}

  double& at(int u, int v) { return data[static_cast<size_t>(u) * width + v]; }
  double at(int u, int v) const { return data[static_cast<size_t>(u) * width + v]; }
};

struct NormalizedSpectrum {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // z-scored log magnitude

  NormalizedSpectrum() = default;
  NormalizedSpectrum(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.0) {}

  double& at(int u, int v) { return data[static_cast<size_t>(u) * width + v]; }
  double at(int u, int v) const { return data[static_cast<size_t>(u) * width + v]; }
};

struct RadialProfile {
  int n_bins = 0;
  std::vector<double> energy;       // mean magnitude per bin
  std::vector<int64_t> bin_counts;  // pixels per bin; sums to H*W
};

// Entrywise modulus; with centered=true the DC bin is cyclically shifted to
// (H/2, W/2).
MagnitudeSpectrum magnitude(const ComplexGrid& grid, bool centered);

// Cyclic shift by (H/2, W/2), toggling the centered flag. Its own inverse on
// even dimensions.
MagnitudeSpectrum fftshift(const MagnitudeSpectrum& m);

// L = log(1+M), then z-score with the population standard deviation. A
// degenerate spectrum (std < 1e-12) maps to all zeros instead of NaN.
NormalizedSpectrum log_normalize(const MagnitudeSpectrum& m);

// Mean magnitude per normalized-radius bin. Radius is measured from the
// center pixel and normalized by the corner distance r_max = sqrt(uc^2+vc^2),
// so bin k covers rho in [k/n, (k+1)/n) with the outer edge closed. With
// log_energy the bin average is taken over log(1+M) instead of raw M
// (experimental variant, off by default).
RadialProfile radial_profile(const MagnitudeSpectrum& m, int n_bins, bool log_energy = false);

// Per-bin statistics of radial profiles for the real vs synthetic classes.
struct ClassProfileRow {
  int bin = 0;
  double rho_mid = 0.0;
  double mean_real = 0.0;
  double std_real = 0.0;
  double mean_syn = 0.0;
  double std_syn = 0.0;
  double diff = 0.0;  // mean_syn - mean_real
};

std::vector<ClassProfileRow> class_profile_report(const std::vector<RadialProfile>& real_profiles,
                                                  const std::vector<RadialProfile>& syn_profiles);

// CSV artifacts. Profiles: bin,rho_lo,rho_hi,energy,count.
// Class reports: bin,rho_mid,mean_real,std_real,mean_syn,std_syn,diff.
void write_profile_csv(const std::string& path, const RadialProfile& p);
void write_class_report_csv(const std::string& path, const std::vector<ClassProfileRow>& rows);

}  // namespace freqcross
