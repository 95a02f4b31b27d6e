#include "freqcross/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "freqcross/csv.hpp"

namespace freqcross {

void ScoredSet::validate() const {
  if (scores.empty()) fail(ErrorKind::EmptySet, "scored set is empty");
  if (scores.size() != labels.size()) {
    fail(ErrorKind::LengthMismatch, "scores and labels have different lengths");
  }
  for (const double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorKind::InvalidSpec, "scores must lie in [0, 1]");
  }
  for (const int y : labels) {
    if (y != 0 && y != 1) {
      fail(ErrorKind::UnknownLabel, "label must be 0 (real) or 1 (synthetic), got " +
                                        std::to_string(y));
    }
  }
}

int64_t ScoredSet::positives() const {
  return std::count(labels.begin(), labels.end(), 1);
}

int64_t ScoredSet::negatives() const {
  return std::count(labels.begin(), labels.end(), 0);
}

ConfusionMatrix confusion_at(const ScoredSet& set, double threshold) {
  set.validate();
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    fail(ErrorKind::InvalidSpec, "threshold must lie in [0, 1]");
  }
  ConfusionMatrix cm;
  for (size_t i = 0; i < set.scores.size(); ++i) {
    const bool predicted = set.scores[i] >= threshold;
    const bool actual = set.labels[i] == 1;
    if (predicted && actual) ++cm.tp;
    if (predicted && !actual) ++cm.fp;
    if (!predicted && !actual) ++cm.tn;
    if (!predicted && actual) ++cm.fn;
  }
  return cm;
}

namespace {

struct Ratio {
  double value = 0.0;
  bool defined = true;
};

Ratio ratio_of(int64_t num, int64_t den) {
  if (den == 0) return {0.0, false};
  return {static_cast<double>(num) / static_cast<double>(den), true};
}

}  // namespace

BasicMetrics basic_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) fail(ErrorKind::EmptySet, "confusion matrix has no counts");
  BasicMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());

  const Ratio precision = ratio_of(cm.tp, cm.tp + cm.fp);
  const Ratio recall = ratio_of(cm.tp, cm.tp + cm.fn);
  m.precision = precision.value;
  m.precision_defined = precision.defined;
  m.recall = recall.value;
  m.recall_defined = recall.defined;

  if (!precision.defined || !recall.defined || precision.value + recall.value == 0.0) {
    m.f1 = 0.0;
    m.f1_defined = false;  // 0/0 in the harmonic mean
  } else {
    m.f1 = 2.0 * precision.value * recall.value / (precision.value + recall.value);
    m.f1_defined = true;
  }
  return m;
}

namespace {

// Indices sorted by score descending; equal scores keep input order so the
// grouping below is reproducible no matter what produced the scores.
std::vector<size_t> by_score_desc(const ScoredSet& set) {
  std::vector<size_t> idx(set.scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return set.scores[a] > set.scores[b]; });
  return idx;
}

}  // namespace

RocCurve roc_auc(const ScoredSet& set) {
  set.validate();
  const int64_t pos = set.positives();
  const int64_t neg = set.negatives();
  if (pos == 0 || neg == 0) {
    fail(ErrorKind::SingleClass, "roc_auc needs both classes in the set");
  }

  const std::vector<size_t> idx = by_score_desc(set);
  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});

  int64_t tp = 0;
  int64_t fp = 0;
  double prev_fpr = 0.0;
  double prev_tpr = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    const double group_score = set.scores[idx[i]];
    while (i < idx.size() && set.scores[idx[i]] == group_score) {
      (set.labels[idx[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    curve.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    curve.points.push_back({fpr, tpr, group_score});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return curve;
}

PrCurve pr_auc(const ScoredSet& set) {
  set.validate();
  const int64_t pos = set.positives();
  if (pos == 0) fail(ErrorKind::NoPositives, "pr_auc needs at least one positive");

  const std::vector<size_t> idx = by_score_desc(set);
  PrCurve curve;
  int64_t tp = 0;
  int64_t fp = 0;
  double prev_recall = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    const double group_score = set.scores[idx[i]];
    while (i < idx.size() && set.scores[idx[i]] == group_score) {
      (set.labels[idx[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (curve.points.empty()) {
      // Recall-0 endpoint borrows the top group's precision.
      curve.points.push_back({0.0, precision, std::numeric_limits<double>::infinity()});
    }
    curve.auc += (recall - prev_recall) * precision;
    curve.points.push_back({recall, precision, group_score});
    prev_recall = recall;
  }
  return curve;
}

ConfidenceHistogram confidence_histogram(const ScoredSet& set, int bins) {
  set.validate();
  if (bins < 1) fail(ErrorKind::InvalidSpec, "histogram needs at least one bin");
  ConfidenceHistogram hist;
  hist.bins = bins;
  hist.correct.assign(static_cast<size_t>(bins), 0);
  hist.incorrect.assign(static_cast<size_t>(bins), 0);
  for (size_t i = 0; i < set.scores.size(); ++i) {
    const double s = set.scores[i];
    const int bin = std::min(static_cast<int>(s * bins), bins - 1);  // 1.0 -> last bin
    const bool correct = (s >= 0.5) == (set.labels[i] == 1);
    (correct ? hist.correct : hist.incorrect)[static_cast<size_t>(bin)] += 1;
  }
  return hist;
}

namespace {

// v <- v orthogonal to each basis vector, renormalized; falls back to
// coordinate axes if the start was (numerically) inside their span.
void orthonormalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  const size_t d = v.size();
  auto project_out = [&](std::vector<double>& x) {
    for (const std::vector<double>& b : basis) {
      double dot = 0.0;
      for (size_t j = 0; j < d; ++j) dot += x[j] * b[j];
      for (size_t j = 0; j < d; ++j) x[j] -= dot * b[j];
    }
  };
  project_out(v);
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  size_t axis = 0;
  while (norm < 1e-8 && axis < d) {
    std::fill(v.begin(), v.end(), 0.0);
    v[axis++] = 1.0;
    project_out(v);
    norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  }
  for (double& x : v) x /= norm;
}

}  // namespace

Pca2Result pca2(const std::vector<std::vector<double>>& features) {
  const size_t n = features.size();
  if (n < 3) fail(ErrorKind::InvalidSpec, "pca2 needs at least 3 vectors");
  const size_t d = features[0].size();
  if (d < 2) fail(ErrorKind::InvalidSpec, "pca2 needs dimension at least 2");
  for (const std::vector<double>& f : features) {
    if (f.size() != d) fail(ErrorKind::LengthMismatch, "feature vectors have mixed lengths");
  }

  // Center and form the population covariance.
  std::vector<double> mean(d, 0.0);
  for (const std::vector<double>& f : features) {
    for (size_t j = 0; j < d; ++j) mean[j] += f[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> centered(n * d);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) centered[i * d + j] = features[i][j] - mean[j];
  }

  std::vector<double> cov(d * d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double* row = centered.data() + i * d;
    for (size_t a = 0; a < d; ++a) {
      for (size_t b = a; b < d; ++b) cov[a * d + b] += row[a] * row[b];
    }
  }
  for (size_t a = 0; a < d; ++a) {
    for (size_t b = a; b < d; ++b) {
      cov[a * d + b] /= static_cast<double>(n);
      cov[b * d + a] = cov[a * d + b];
    }
  }

  double total_var = 0.0;
  for (size_t a = 0; a < d; ++a) total_var += cov[a * d + a];
  if (total_var < 1e-18) fail(ErrorKind::DegenerateRank, "all points are identical");

  Pca2Result out;
  out.coords.assign(n, {0.0, 0.0});
  std::vector<std::vector<double>> components;
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    orthonormalize(v, components);

    std::vector<double> w(d);
    for (int iter = 0; iter < 1000; ++iter) {
      for (size_t a = 0; a < d; ++a) {
        double acc = 0.0;
        for (size_t b = 0; b < d; ++b) acc += cov[a * d + b] * v[b];
        w[a] = acc;
      }
      const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
      if (norm < total_var * 1e-14) break;  // deflated residual is numerically zero
      for (double& x : w) x /= norm;
      orthonormalize(w, components);
      double delta = 0.0;
      for (size_t j = 0; j < d; ++j) delta += (w[j] - v[j]) * (w[j] - v[j]);
      v = w;
      if (std::sqrt(delta) < 1e-10) break;
    }

    double lambda = 0.0;
    for (size_t a = 0; a < d; ++a) {
      double acc = 0.0;
      for (size_t b = 0; b < d; ++b) acc += cov[a * d + b] * v[b];
      lambda += v[a] * acc;
    }
    lambda = std::max(lambda, 0.0);

    // Canonical sign: the largest-magnitude coordinate points positive.
    size_t peak = 0;
    for (size_t j = 1; j < d; ++j) {
      if (std::abs(v[j]) > std::abs(v[peak])) peak = j;
    }
    if (v[peak] < 0.0) {
      for (double& x : v) x = -x;
    }

    for (size_t i = 0; i < n; ++i) {
      double proj = 0.0;
      const double* row = centered.data() + i * d;
      for (size_t j = 0; j < d; ++j) proj += row[j] * v[j];
      out.coords[i][static_cast<size_t>(comp)] = proj;
    }
    out.explained[static_cast<size_t>(comp)] = lambda / total_var;

    for (size_t a = 0; a < d; ++a) {
      for (size_t b = 0; b < d; ++b) cov[a * d + b] -= lambda * v[a] * v[b];
    }
    components.push_back(std::move(v));
  }
  return out;
}

MetricsReport evaluate_scores(const ScoredSet& set, double threshold) {
  MetricsReport report;
  report.threshold = threshold;
  report.confusion = confusion_at(set, threshold);
  report.basics = basic_metrics(report.confusion);
  report.roc = roc_auc(set);
  report.pr = pr_auc(set);
  return report;
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
  std::ofstream out = open_out(path);
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve.points) {
    out << csv_num(p.fpr) << ',' << csv_num(p.tpr) << ',' << csv_num(p.threshold) << '\n';
  }
  close_out(out, path);
}

void write_pr_csv(const std::string& path, const PrCurve& curve) {
  std::ofstream out = open_out(path);
  out << "recall,precision,threshold\n";
  for (const PrPoint& p : curve.points) {
    out << csv_num(p.recall) << ',' << csv_num(p.precision) << ',' << csv_num(p.threshold)
        << '\n';
  }
  close_out(out, path);
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  std::ofstream out = open_out(path);
  out << "tp,fp,tn,fn\n";
  out << cm.tp << ',' << cm.fp << ',' << cm.tn << ',' << cm.fn << '\n';
  close_out(out, path);
}

void write_confidence_hist_csv(const std::string& path, const ConfidenceHistogram& hist) {
  std::ofstream out = open_out(path);
  out << "bin,lo,hi,correct,incorrect\n";
  for (int k = 0; k < hist.bins; ++k) {
    const double lo = static_cast<double>(k) / hist.bins;
    const double hi = static_cast<double>(k + 1) / hist.bins;
    out << k << ',' << csv_num(lo) << ',' << csv_num(hi) << ','
        << hist.correct[static_cast<size_t>(k)] << ',' << hist.incorrect[static_cast<size_t>(k)]
        << '\n';
  }
  close_out(out, path);
}

void write_pca_csv(const std::string& path, const Pca2Result& pca,
                   const std::vector<int>& labels) {
  if (labels.size() != pca.coords.size()) {
    fail(ErrorKind::LengthMismatch, "pca coordinates and labels have different lengths");
  }
  std::ofstream out = open_out(path);
  out << "x,y,label\n";
  for (size_t i = 0; i < pca.coords.size(); ++i) {
    out << csv_num(pca.coords[i][0]) << ',' << csv_num(pca.coords[i][1]) << ',' << labels[i]
        << '\n';
  }
  close_out(out, path);
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["threshold"] = report.threshold;
  j["tp"] = report.confusion.tp;
  j["fp"] = report.confusion.fp;
  j["tn"] = report.confusion.tn;
  j["fn"] = report.confusion.fn;
  j["accuracy"] = report.basics.accuracy;
  j["precision"] = report.basics.precision;
  j["precision_defined"] = report.basics.precision_defined;
  j["recall"] = report.basics.recall;
  j["recall_defined"] = report.basics.recall_defined;
  j["f1"] = report.basics.f1;
  j["f1_defined"] = report.basics.f1_defined;
  j["auc_roc"] = report.roc.auc;
  j["auc_pr"] = report.pr.auc;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  close_out(out, path);
}

void write_robustness_csv(const std::string& path, const std::vector<RobustnessRow>& rows) {
  std::ofstream out = open_out(path);
  out << "name,accuracy,drop\n";
  for (const RobustnessRow& row : rows) {
    out << row.name << ',' << csv_num(row.accuracy) << ',' << csv_num(row.drop) << '\n';
  }
  close_out(out, path);
}

}  // namespace freqcross
