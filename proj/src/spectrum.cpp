#include "freqcross/spectrum.hpp"

#include <cmath>
#include <tuple>

#include "freqcross/csv.hpp"
#include "freqcross/error.hpp"

namespace freqcross {

MagnitudeSpectrum magnitude(const ComplexGrid& grid, bool centered) {
  MagnitudeSpectrum m(grid.height, grid.width);
  for (size_t i = 0; i < grid.data.size(); ++i) m.data[i] = std::abs(grid.data[i]);
  if (centered) return fftshift(m);
  return m;
}

MagnitudeSpectrum fftshift(const MagnitudeSpectrum& m) {
  MagnitudeSpectrum out(m.height, m.width);
  const int du = m.height / 2;
  const int dv = m.width / 2;
  for (int u = 0; u < m.height; ++u) {
    const int uu = (u + du) % m.height;
    for (int v = 0; v < m.width; ++v) {
      out.at(uu, (v + dv) % m.width) = m.at(u, v);
    }
  }
  out.centered = !m.centered;
  return out;
}

NormalizedSpectrum log_normalize(const MagnitudeSpectrum& m) {
  NormalizedSpectrum out(m.height, m.width);
  const size_t n = m.data.size();
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    out.data[i] = std::log1p(m.data[i]);
    sum += out.data[i];
  }
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = out.data[i] - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / static_cast<double>(n));
  if (stddev < 1e-12) {
    std::fill(out.data.begin(), out.data.end(), 0.0);
    return out;
  }
  for (double& v : out.data) v = (v - mean) / stddev;
  return out;
}

RadialProfile radial_profile(const MagnitudeSpectrum& m, int n_bins, bool log_energy) {
  if (!m.centered) fail(ErrorKind::NotCentered, "radial profile needs a centered spectrum");
  if (n_bins < 1) fail(ErrorKind::InvalidSpec, "n_bins must be >= 1");

  RadialProfile p;
  p.n_bins = n_bins;
  p.energy.assign(n_bins, 0.0);
  p.bin_counts.assign(n_bins, 0);

  const int uc = m.height / 2;
  const int vc = m.width / 2;
  const double r_max =
      std::sqrt(static_cast<double>(uc) * uc + static_cast<double>(vc) * vc);
  for (int u = 0; u < m.height; ++u) {
    for (int v = 0; v < m.width; ++v) {
      const double r = std::sqrt(static_cast<double>(u - uc) * (u - uc) +
                                 static_cast<double>(v - vc) * (v - vc));
      const double rho = r_max > 0.0 ? r / r_max : 0.0;  // 1x1: everything is the center
      const int k = std::min(static_cast<int>(std::floor(rho * n_bins)), n_bins - 1);
      p.energy[k] += log_energy ? std::log1p(m.at(u, v)) : m.at(u, v);
      p.bin_counts[k] += 1;
    }
  }
  for (int k = 0; k < n_bins; ++k) {
    if (p.bin_counts[k] > 0) p.energy[k] /= static_cast<double>(p.bin_counts[k]);
  }
  return p;
}

std::vector<ClassProfileRow> class_profile_report(const std::vector<RadialProfile>& real_profiles,
                                                  const std::vector<RadialProfile>& syn_profiles) {
  if (real_profiles.empty() || syn_profiles.empty()) {
    fail(ErrorKind::EmptyClass, "class profile report needs at least one profile per class");
  }
  const int n_bins = real_profiles.front().n_bins;
  for (const auto* list : {&real_profiles, &syn_profiles}) {
    for (const RadialProfile& p : *list) {
      if (p.n_bins != n_bins) {
        fail(ErrorKind::MismatchedBins, "profiles mix " + std::to_string(n_bins) + " and " +
                                            std::to_string(p.n_bins) + " bins");
      }
    }
  }

  // Population mean/std of energy[k] across each class's profiles.
  const auto stats = [](const std::vector<RadialProfile>& list, int k) {
    double sum = 0.0;
    for (const RadialProfile& p : list) sum += p.energy[k];
    const double mean = sum / static_cast<double>(list.size());
    double var = 0.0;
    for (const RadialProfile& p : list) {
      const double d = p.energy[k] - mean;
      var += d * d;
    }
    return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(list.size())));
  };

  std::vector<ClassProfileRow> rows(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    ClassProfileRow& row = rows[k];
    row.bin = k;
    row.rho_mid = (k + 0.5) / n_bins;
    std::tie(row.mean_real, row.std_real) = stats(real_profiles, k);
    std::tie(row.mean_syn, row.std_syn) = stats(syn_profiles, k);
    row.diff = row.mean_syn - row.mean_real;
  }
  return rows;
}

void write_profile_csv(const std::string& path, const RadialProfile& p) {
  std::ofstream out = open_out(path);
  out << "bin,rho_lo,rho_hi,energy,count\n";
  for (int k = 0; k < p.n_bins; ++k) {
    out << k << ',' << csv_num(static_cast<double>(k) / p.n_bins) << ','
        << csv_num(static_cast<double>(k + 1) / p.n_bins) << ',' << csv_num(p.energy[k]) << ','
        << p.bin_counts[k] << '\n';
  }
  close_out(out, path);
}

void write_class_report_csv(const std::string& path, const std::vector<ClassProfileRow>& rows) {
  std::ofstream out = open_out(path);
  out << "bin,rho_mid,mean_real,std_real,mean_syn,std_syn,diff\n";
  for (const ClassProfileRow& r : rows) {
    out << r.bin << ',' << csv_num(r.rho_mid) << ',' << csv_num(r.mean_real) << ','
        << csv_num(r.std_real) << ',' << csv_num(r.mean_syn) << ',' << csv_num(r.std_syn) << ','
        << csv_num(r.diff) << '\n';
  }
  close_out(out, path);
}

}  // namespace freqcross
