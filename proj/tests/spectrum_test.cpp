#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "freqcross/error.hpp"
#include "freqcross/fft.hpp"
#include "freqcross/rng.hpp"
#include "freqcross/spectrum.hpp"
#include "oracles.hpp"

using namespace freqcross;

namespace {

std::vector<Complex> random_complex(size_t n, uint64_t seed) {
  Rng rng = Rng::derive(seed, 1);
  std::vector<Complex> x(n);
  for (Complex& v : x) v = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return x;
}

ImageGray random_gray(int h, int w, uint64_t seed) {
  Rng rng = Rng::derive(seed, 2);
  ImageGray img(h, w);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

double rel_err(const std::vector<Complex>& got, const std::vector<Complex>& want) {
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    num += std::norm(got[i] - want[i]);
    den += std::norm(want[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

MagnitudeSpectrum random_spectrum(int h, int w, uint64_t seed) {
  Rng rng = Rng::derive(seed, 3);
  MagnitudeSpectrum m(h, w);
  for (double& v : m.data) v = rng.uniform() * 10.0;
  m.centered = true;
  return m;
}

}  // namespace

TEST_CASE("fft1d of a delta is flat and of a constant is pure DC") {
  const std::vector<Complex> delta{1, 0, 0, 0};
  for (const Complex& v : fft1d(delta, FftDirection::kForward)) {
    REQUIRE(std::abs(v - Complex(1.0, 0.0)) < 1e-12);
  }

  for (size_t n : {8u, 5u}) {  // one Cooley-Tukey size, one Bluestein size
    const Complex c(0.7, -0.2);
    const std::vector<Complex> x(n, c);
    const std::vector<Complex> spec = fft1d(x, FftDirection::kForward);
    CHECK(std::abs(spec[0] - c * static_cast<double>(n)) < 1e-9);
    for (size_t k = 1; k < n; ++k) REQUIRE(std::abs(spec[k]) < 1e-9);
  }
}

TEST_CASE("fft1d matches the naive DFT at awkward lengths") {
  for (size_t n : {7u, 12u, 16u, 31u, 224u}) {
    const std::vector<Complex> x = random_complex(n, n);
    CHECK(rel_err(fft1d(x, FftDirection::kForward), oracle::naive_dft(x, false)) < 1e-9);
    CHECK(rel_err(fft1d(x, FftDirection::kInverse), oracle::naive_dft(x, true)) < 1e-9);
  }
}

TEST_CASE("inverse undoes forward across representative lengths") {
  for (size_t n : {1u, 2u, 7u, 12u, 224u, 256u}) {
    const std::vector<Complex> x = random_complex(n, 100 + n);
    const std::vector<Complex> back =
        fft1d(fft1d(x, FftDirection::kForward), FftDirection::kInverse);
    CHECK(rel_err(back, x) < 1e-9);
  }
}

TEST_CASE("fft1d rejects empty input") {
  try {
    fft1d({}, FftDirection::kForward);
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
}

TEST_CASE("fft2d of a constant image is all DC") {
  ImageGray img(6, 10);
  std::fill(img.data.begin(), img.data.end(), 0.35);
  const ComplexGrid spec = fft2d(img);
  const double dc = 6 * 10 * 0.35;
  CHECK(std::abs(spec.at(0, 0) - Complex(dc, 0.0)) < 1e-9 * dc);
  for (int u = 0; u < 6; ++u) {
    for (int v = 0; v < 10; ++v) {
      if (u == 0 && v == 0) continue;
      REQUIRE(std::abs(spec.at(u, v)) < 1e-9 * dc);
    }
  }
}

TEST_CASE("fft2d of a corner delta has unit magnitude everywhere") {
  ImageGray img(8, 12);
  img.at(0, 0) = 1.0;
  const ComplexGrid spec = fft2d(img);
  for (const Complex& v : spec.data) REQUIRE(std::abs(v) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fft2d matches the direct double sum") {
  const ImageGray img = random_gray(12, 10, 7);
  const ComplexGrid got = fft2d(img);
  const ComplexGrid want = oracle::naive_dft2d(img);
  CHECK(rel_err(got.data, want.data) < 1e-9);
}

TEST_CASE("fft2d inverse round-trips a complex grid") {
  ComplexGrid grid(9, 14);
  Rng rng(21);
  for (Complex& v : grid.data) v = Complex(rng.uniform(-2, 2), rng.uniform(-2, 2));
  const ComplexGrid back = fft2d(fft2d(grid, FftDirection::kForward), FftDirection::kInverse);
  CHECK(rel_err(back.data, grid.data) < 1e-9);
}

TEST_CASE("fft2d of a real image is Hermitian-symmetric") {
  const ImageGray img = random_gray(10, 12, 8);
  const ComplexGrid spec = fft2d(img);
  for (int u = 0; u < 10; ++u) {
    for (int v = 0; v < 12; ++v) {
      const Complex mirror = spec.at((10 - u) % 10, (12 - v) % 12);
      REQUIRE(std::abs(spec.at(u, v) - std::conj(mirror)) < 1e-9);
    }
  }
}

TEST_CASE("Parseval: image energy equals spectrum energy over H*W") {
  const ImageGray img = random_gray(16, 11, 9);
  double pixel_energy = 0.0;
  for (const double v : img.data) pixel_energy += v * v;
  const ComplexGrid spec = fft2d(img);
  double spec_energy = 0.0;
  for (const Complex& v : spec.data) spec_energy += std::norm(v);
  spec_energy /= 16.0 * 11.0;
  CHECK(spec_energy == doctest::Approx(pixel_energy).epsilon(1e-9));
}

TEST_CASE("magnitude takes the entrywise modulus") {
  ComplexGrid grid(1, 2);
  grid.at(0, 0) = Complex(3.0, -4.0);
  grid.at(0, 1) = Complex(0.0, 2.0);
  const MagnitudeSpectrum m = magnitude(grid, false);
  CHECK(m.at(0, 0) == doctest::Approx(5.0));
  CHECK(m.at(0, 1) == doctest::Approx(2.0));
  CHECK_FALSE(m.centered);
}

TEST_CASE("fftshift moves DC to the center and is an involution on even sizes") {
  ImageGray img(8, 8);
  std::fill(img.data.begin(), img.data.end(), 1.0);
  const MagnitudeSpectrum centered = magnitude(fft2d(img), true);
  CHECK(centered.centered);
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      if (u == 4 && v == 4) {
        REQUIRE(centered.at(u, v) == doctest::Approx(64.0));
      } else {
        REQUIRE(centered.at(u, v) < 1e-9);
      }
    }
  }

  const MagnitudeSpectrum m = random_spectrum(6, 10, 4);
  const MagnitudeSpectrum twice = fftshift(fftshift(m));
  CHECK(twice.data == m.data);
  CHECK(twice.centered == m.centered);

  // Odd dimensions: DC (0,0) lands exactly at (H/2, W/2).
  MagnitudeSpectrum odd(5, 7);
  odd.at(0, 0) = 1.0;
  CHECK(fftshift(odd).at(2, 3) == 1.0);
}

TEST_CASE("log_normalize z-scores the log magnitude") {
  const MagnitudeSpectrum m = random_spectrum(12, 12, 5);
  const NormalizedSpectrum z = log_normalize(m);
  double mean = 0.0;
  for (const double v : z.data) mean += v;
  mean /= static_cast<double>(z.data.size());
  double var = 0.0;
  for (const double v : z.data) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(z.data.size()));
  CHECK(std::abs(mean) <= 1e-9);
  CHECK(stddev == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("log_normalize maps a constant spectrum to all zeros") {
  MagnitudeSpectrum m(4, 4);
  std::fill(m.data.begin(), m.data.end(), 3.7);
  const NormalizedSpectrum z = log_normalize(m);
  for (const double v : z.data) REQUIRE(v == 0.0);
}

TEST_CASE("log_normalize of a balanced two-value spectrum is exactly +-1") {
  MagnitudeSpectrum m(4, 4);
  for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = (i % 2 == 0) ? 0.5 : 2.5;
  const NormalizedSpectrum z = log_normalize(m);
  for (size_t i = 0; i < z.data.size(); ++i) {
    REQUIRE(z.data[i] == doctest::Approx(i % 2 == 0 ? -1.0 : 1.0).epsilon(1e-12));
  }
}

TEST_CASE("log_normalize is invariant under affine maps of the log values") {
  // Replace L = log(1+M) by a*L + b via M' = exp(a*L+b) - 1; the z-score
  // must not move.
  const MagnitudeSpectrum m = random_spectrum(8, 8, 6);
  MagnitudeSpectrum warped(8, 8);
  warped.centered = true;
  const double a = 2.3;
  const double b = 0.7;
  for (size_t i = 0; i < m.data.size(); ++i) {
    warped.data[i] = std::expm1(a * std::log1p(m.data[i]) + b);
  }
  const NormalizedSpectrum z0 = log_normalize(m);
  const NormalizedSpectrum z1 = log_normalize(warped);
  for (size_t i = 0; i < z0.data.size(); ++i) {
    REQUIRE(z1.data[i] == doctest::Approx(z0.data[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("radial profile of flat spectra") {
  MagnitudeSpectrum zeros(16, 16);
  zeros.centered = true;
  const RadialProfile pz = radial_profile(zeros, 10);
  for (const double e : pz.energy) REQUIRE(e == 0.0);

  MagnitudeSpectrum ones(16, 16);
  std::fill(ones.data.begin(), ones.data.end(), 1.0);
  ones.centered = true;
  const RadialProfile po = radial_profile(ones, 10);
  int64_t total = 0;
  for (int k = 0; k < 10; ++k) {
    total += po.bin_counts[k];
    if (po.bin_counts[k] > 0) REQUIRE(po.energy[k] == doctest::Approx(1.0));
  }
  CHECK(total == 16 * 16);

  // Same spectrum through the log-energy variant averages log(2).
  const RadialProfile pl = radial_profile(ones, 10, true);
  for (int k = 0; k < 10; ++k) {
    if (pl.bin_counts[k] > 0) REQUIRE(pl.energy[k] == doctest::Approx(std::log(2.0)));
  }
}

TEST_CASE("radial profile matches per-pixel brute-force binning") {
  for (auto [h, w] : {std::pair{32, 32}, std::pair{17, 23}, std::pair{8, 30}}) {
    const MagnitudeSpectrum m = random_spectrum(h, w, 1000 + h + w);
    const RadialProfile p = radial_profile(m, 30);
    const oracle::RadialBrute brute = oracle::radial_brute(m, 30);
    int64_t total = 0;
    for (int k = 0; k < 30; ++k) {
      REQUIRE(p.bin_counts[k] == brute.counts[k]);
      REQUIRE(p.energy[k] == doctest::Approx(brute.energy[k]).epsilon(1e-12));
      total += p.bin_counts[k];
    }
    REQUIRE(total == static_cast<int64_t>(h) * w);
  }
}

TEST_CASE("radial profile rejects uncentered spectra and bad bin counts") {
  MagnitudeSpectrum m(8, 8);
  try {
    radial_profile(m, 10);
    FAIL("expected NotCentered");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotCentered);
  }
  m.centered = true;
  CHECK_THROWS_AS(radial_profile(m, 0), Error);
}

TEST_CASE("radial profile of a 1x1 spectrum puts everything in bin zero") {
  MagnitudeSpectrum m(1, 1);
  m.at(0, 0) = 2.5;
  m.centered = true;
  const RadialProfile p = radial_profile(m, 5);
  CHECK(p.energy[0] == doctest::Approx(2.5));
  CHECK(p.bin_counts[0] == 1);
  for (int k = 1; k < 5; ++k) REQUIRE(p.bin_counts[k] == 0);
}

TEST_CASE("class profile report degenerate cases") {
  const MagnitudeSpectrum m = random_spectrum(16, 16, 11);
  const RadialProfile p = radial_profile(m, 12);
  const std::vector<RadialProfile> one{p};

  const auto rows = class_profile_report(one, one);
  for (const ClassProfileRow& r : rows) {
    REQUIRE(r.diff == 0.0);
    REQUIRE(r.std_real == 0.0);  // single sample, population std
    REQUIRE(r.std_syn == 0.0);
    REQUIRE(r.mean_real == p.energy[r.bin]);
  }
  CHECK(rows.size() == 12);
  CHECK(rows[0].rho_mid == doctest::Approx(0.5 / 12));

  RadialProfile other = radial_profile(m, 8);
  CHECK_THROWS_AS(class_profile_report(one, {other}), Error);
  try {
    class_profile_report({}, one);
    FAIL("expected EmptyClass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyClass);
  }
}

TEST_CASE("class profile report separates shifted classes") {
  std::vector<RadialProfile> reals;
  std::vector<RadialProfile> syns;
  for (uint64_t i = 0; i < 4; ++i) {
    MagnitudeSpectrum m = random_spectrum(16, 16, 40 + i);
    reals.push_back(radial_profile(m, 6));
    for (double& v : m.data) v += 1.0;  // uniformly hotter spectrum
    syns.push_back(radial_profile(m, 6));
  }
  for (const ClassProfileRow& r : class_profile_report(reals, syns)) {
    REQUIRE(r.diff == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(r.std_real > 0.0);
  }
}

TEST_CASE("profile and class report CSV emission") {
  const MagnitudeSpectrum m = random_spectrum(16, 16, 12);
  const RadialProfile p = radial_profile(m, 5);
  const std::string path = "spectrum_test_profile.csv";
  write_profile_csv(path, p);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "bin,rho_lo,rho_hi,energy,count");
  int rows = 0;
  double energy0 = -1.0;
  long long count0 = -1;
  while (std::getline(in, line)) {
    if (rows == 0) {
      int bin;
      double lo, hi, energy;
      long long count;
      REQUIRE(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lld", &bin, &lo, &hi, &energy, &count) ==
              5);
      CHECK(bin == 0);
      CHECK(lo == 0.0);
      CHECK(hi == doctest::Approx(0.2));
      energy0 = energy;
      count0 = count;
    }
    ++rows;
  }
  CHECK(rows == 5);
  CHECK(energy0 == doctest::Approx(p.energy[0]).epsilon(1e-9));
  CHECK(count0 == p.bin_counts[0]);
  std::remove(path.c_str());

  const auto report = class_profile_report({p}, {p});
  const std::string rpath = "spectrum_test_report.csv";
  write_class_report_csv(rpath, report);
  std::ifstream rin(rpath);
  std::getline(rin, line);
  CHECK(line == "bin,rho_mid,mean_real,std_real,mean_syn,std_syn,diff");
  rows = 0;
  while (std::getline(rin, line)) ++rows;
  CHECK(rows == 5);
  std::remove(rpath.c_str());
}
