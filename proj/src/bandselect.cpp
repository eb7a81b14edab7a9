#include "fhb/bandselect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fhb/rng.hpp"
#include "fhb/textio.hpp"

namespace fhb {

namespace {

constexpr double kFStatSentinel = 1e12;

std::vector<std::size_t> ranking_from_scores(const std::vector<double>& scores) {
  std::vector<std::size_t> ranking(scores.size());
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  std::sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;  // ties toward lower band index
  });
  return ranking;
}

std::vector<std::size_t> cluster_sizes(const FeatureMatrix& features,
                                       const PseudoLabels& labels) {
  features.validate();
  labels.validate();
  if (labels.assignments.size() != features.rows)
    throw InvalidArgument("importance: label count does not match row count");
  std::vector<std::size_t> sizes(labels.k, 0);
  for (std::size_t a : labels.assignments) ++sizes[a];
  return sizes;
}

}  // namespace

std::string to_string(ImportanceMethod method) {
  switch (method) {
    case ImportanceMethod::Impurity: return "impurity";
    case ImportanceMethod::FStat: return "fstat";
    case ImportanceMethod::MutualInfo: return "mutualinfo";
  }
  throw InvalidArgument("bad ImportanceMethod value");
}

ImportanceMethod parse_importance_method(const std::string& text) {
  if (text == "impurity") return ImportanceMethod::Impurity;
  if (text == "fstat") return ImportanceMethod::FStat;
  if (text == "mutualinfo") return ImportanceMethod::MutualInfo;
  throw InvalidArgument("unknown importance method \"" + text + "\"");
}

void ImportanceReport::validate() const {
  if (ranking.size() != scores.size())
    throw InvalidArgument("importance report: ranking size does not match score count");
  if (!wavelengths_nm.empty() && wavelengths_nm.size() != scores.size())
    throw InvalidArgument("importance report: wavelength count does not match score count");
  std::vector<bool> seen(scores.size(), false);
  for (std::size_t b : ranking) {
    if (b >= scores.size() || seen[b])
      throw InvalidArgument("importance report: ranking is not a permutation");
    seen[b] = true;
  }
  for (double s : scores)
    if (!std::isfinite(s) || s < 0.0)
      throw InvalidArgument("importance report: scores must be finite and nonnegative");
  for (std::size_t i = 0; i + 1 < ranking.size(); ++i)
    if (scores[ranking[i]] < scores[ranking[i + 1]])
      throw InvalidArgument("importance report: scores not non-increasing along ranking");
}

ImportanceReport importance_fstat(const FeatureMatrix& features, const PseudoLabels& labels) {
  const std::vector<std::size_t> sizes = cluster_sizes(features, labels);
  if (labels.k < 2) throw InvalidArgument("importance_fstat: need at least 2 clusters");
  for (std::size_t c = 0; c < labels.k; ++c)
    if (sizes[c] < 2)
      throw InvalidArgument("importance_fstat: cluster " + std::to_string(c) +
                            " has fewer than 2 samples");

  const std::size_t n = features.rows;
  const std::size_t groups = labels.k;

  ImportanceReport report;
  report.method = ImportanceMethod::FStat;
  report.wavelengths_nm = features.wavelengths_nm;
  report.scores.resize(features.cols);

  std::vector<double> group_mean(groups);
  for (std::size_t b = 0; b < features.cols; ++b) {
    std::fill(group_mean.begin(), group_mean.end(), 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      group_mean[labels.assignments[i]] += features.at(i, b);
      grand += features.at(i, b);
    }
    grand /= static_cast<double>(n);
    for (std::size_t g = 0; g < groups; ++g) group_mean[g] /= static_cast<double>(sizes[g]);

    double ssb = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      const double d = group_mean[g] - grand;
      ssb += static_cast<double>(sizes[g]) * d * d;
    }
    double ssw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = features.at(i, b) - group_mean[labels.assignments[i]];
      ssw += d * d;
    }

    // Relative floor that absorbs float noise on constant bands.
    const double tiny = static_cast<double>(n) * (1.0 + grand * grand) * 1e-24;
    double score;
    if (ssb + ssw <= tiny) {
      score = 0.0;
    } else if (ssw <= tiny) {
      score = kFStatSentinel;
    } else {
      const double msb = ssb / static_cast<double>(groups - 1);
      const double msw = ssw / static_cast<double>(n - groups);
      score = std::min(msb / msw, kFStatSentinel);
    }
    report.scores[b] = score;
  }
  report.ranking = ranking_from_scores(report.scores);
  return report;
}

ImportanceReport importance_mutualinfo(const FeatureMatrix& features, const PseudoLabels& labels,
                                       std::size_t bins) {
  const std::vector<std::size_t> sizes = cluster_sizes(features, labels);
  if (bins < 2) throw InvalidArgument("importance_mutualinfo: bins must be at least 2");

  const std::size_t n = features.rows;
  const std::size_t k = labels.k;

  ImportanceReport report;
  report.method = ImportanceMethod::MutualInfo;
  report.wavelengths_nm = features.wavelengths_nm;
  report.scores.resize(features.cols);

  std::vector<std::size_t> joint(bins * k);
  for (std::size_t b = 0; b < features.cols; ++b) {
    double lo = features.at(0, b), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, features.at(i, b));
      hi = std::max(hi, features.at(i, b));
    }
    std::fill(joint.begin(), joint.end(), std::size_t{0});
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t bin = 0;
      if (range >= 1e-12) {
        bin = static_cast<std::size_t>((features.at(i, b) - lo) / range *
                                       static_cast<double>(bins));
        bin = std::min(bin, bins - 1);
      }
      ++joint[bin * k + labels.assignments[i]];
    }

    std::vector<std::size_t> row_sum(bins, 0);
    for (std::size_t x = 0; x < bins; ++x)
      for (std::size_t c = 0; c < k; ++c) row_sum[x] += joint[x * k + c];

    double mi = 0.0;
    const double dn = static_cast<double>(n);
    for (std::size_t x = 0; x < bins; ++x) {
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t cnt = joint[x * k + c];
        if (cnt == 0) continue;
        const double pxy = static_cast<double>(cnt) / dn;
        const double px = static_cast<double>(row_sum[x]) / dn;
        const double pc = static_cast<double>(sizes[c]) / dn;
        mi += pxy * std::log(pxy / (px * pc));
      }
    }
    report.scores[b] = std::max(mi, 0.0);
  }
  report.ranking = ranking_from_scores(report.scores);
  return report;
}

// ---------------------------------------------------------------------------
// Impurity importance (bagged trees)
// ---------------------------------------------------------------------------

namespace {

double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

struct ImpurityForest {
  const FeatureMatrix& features;
  const std::vector<std::size_t>& assignments;
  std::size_t max_depth;
  std::size_t mtry;
  double bootstrap_n;
  Rng& rng;
  std::vector<double>& importance;

  void split_node(const std::vector<std::size_t>& idx, std::size_t depth) {
    std::size_t positives = 0;
    for (std::size_t i : idx) positives += assignments[i];
    const double node_gini = gini(positives, idx.size());
    if (depth >= max_depth || idx.size() < 2 || positives == 0 || positives == idx.size())
      return;

    // Sample the band subset for this node, then scan it in band order.
    std::vector<std::size_t> bands(features.cols);
    std::iota(bands.begin(), bands.end(), std::size_t{0});
    for (std::size_t j = 0; j < mtry; ++j) {
      const std::size_t pick = j + rng.uniform_index(bands.size() - j);
      std::swap(bands[j], bands[pick]);
    }
    bands.resize(mtry);
    std::sort(bands.begin(), bands.end());

    int best_band = -1;
    double best_threshold = 0.0, best_gain = 0.0;
    std::vector<std::pair<double, std::size_t>> pairs(idx.size());  // (value, class)
    const double n = static_cast<double>(idx.size());
    for (std::size_t band : bands) {
      for (std::size_t j = 0; j < idx.size(); ++j)
        pairs[j] = {features.at(idx[j], band), assignments[idx[j]]};
      std::sort(pairs.begin(), pairs.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t left_pos = 0;
      for (std::size_t j = 0; j + 1 < pairs.size(); ++j) {
        left_pos += pairs[j].second;
        if (pairs[j].first == pairs[j + 1].first) continue;
        const std::size_t nl = j + 1;
        const std::size_t nr = idx.size() - nl;
        const double child =
            (static_cast<double>(nl) * gini(left_pos, nl) +
             static_cast<double>(nr) * gini(positives - left_pos, nr)) / n;
        const double gain = node_gini - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_band = static_cast<int>(band);
          best_threshold = pairs[j].first + 0.5 * (pairs[j + 1].first - pairs[j].first);
        }
      }
    }
    if (best_band < 0) return;

    importance[static_cast<std::size_t>(best_band)] += n / bootstrap_n * best_gain;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
      (features.at(i, static_cast<std::size_t>(best_band)) <= best_threshold ? left : right)
          .push_back(i);
    split_node(left, depth + 1);
    split_node(right, depth + 1);
  }
};

}  // namespace

ImportanceReport importance_impurity(const FeatureMatrix& features, const PseudoLabels& labels,
                                     std::size_t trees, std::size_t max_depth,
                                     std::uint64_t seed) {
  const std::vector<std::size_t> sizes = cluster_sizes(features, labels);
  if (labels.k != 2) throw InvalidArgument("importance_impurity: requires exactly 2 clusters");
  if (sizes[0] == 0 || sizes[1] == 0)
    throw InvalidArgument("importance_impurity: labels are single-class");
  if (trees == 0) throw InvalidArgument("importance_impurity: trees must be positive");
  if (max_depth == 0) throw InvalidArgument("importance_impurity: max_depth must be positive");

  const std::size_t n = features.rows;
  const std::size_t mtry = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features.cols))));

  ImportanceReport report;
  report.method = ImportanceMethod::Impurity;
  report.wavelengths_nm = features.wavelengths_nm;
  report.scores.assign(features.cols, 0.0);

  Rng rng(seed);
  for (std::size_t t = 0; t < trees; ++t) {
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = rng.uniform_index(n);
    ImpurityForest forest{features,  labels.assignments,          max_depth, mtry,
                          static_cast<double>(n), rng, report.scores};
    forest.split_node(sample, 0);
  }

  double total = std::accumulate(report.scores.begin(), report.scores.end(), 0.0);
  if (total > 0.0)
    for (double& s : report.scores) s /= total;
  report.ranking = ranking_from_scores(report.scores);
  return report;
}

// ---------------------------------------------------------------------------
// Selection, sweeping, reporting
// ---------------------------------------------------------------------------

std::vector<std::size_t> top_k_bands(const ImportanceReport& report, std::size_t k) {
  report.validate();
  if (k == 0 || k > report.ranking.size())
    throw InvalidArgument("top_k_bands: k out of range");
  return std::vector<std::size_t>(report.ranking.begin(),
                                  report.ranking.begin() + static_cast<std::ptrdiff_t>(k));
}

FeatureMatrix restrict_features(const FeatureMatrix& features,
                                const std::vector<std::size_t>& bands) {
  features.validate();
  std::set<std::size_t> seen;
  for (std::size_t b : bands) {
    if (b >= features.cols) throw InvalidArgument("restrict_features: band index out of range");
    if (!seen.insert(b).second) throw InvalidArgument("restrict_features: duplicate band index");
  }
  if (bands.empty()) throw InvalidArgument("restrict_features: no bands selected");

  FeatureMatrix out;
  out.rows = features.rows;
  out.cols = bands.size();
  out.sample_ids = features.sample_ids;
  out.values.resize(out.rows * out.cols);
  if (!features.wavelengths_nm.empty()) {
    out.wavelengths_nm.reserve(bands.size());
    for (std::size_t b : bands) out.wavelengths_nm.push_back(features.wavelengths_nm[b]);
  }
  for (std::size_t r = 0; r < out.rows; ++r)
    for (std::size_t c = 0; c < bands.size(); ++c) out.at(r, c) = features.at(r, bands[c]);
  return out;
}

SweepResult accuracy_vs_k_sweep(const FeatureMatrix& train,
                                const std::vector<ClassLabel>& train_labels,
                                const FeatureMatrix& val,
                                const std::vector<ClassLabel>& val_labels,
                                const ImportanceReport& report,
                                const std::vector<std::size_t>& k_values,
                                const std::string& classifier, std::uint64_t seed,
                                const ClassifierParams& params) {
  if (classifier != "boosted" && classifier != "svm")
    throw InvalidArgument("unknown classifier \"" + classifier + "\"");
  if (train.rows == 0 || val.rows == 0)
    throw InvalidArgument("accuracy_vs_k_sweep: empty split");
  if (train.cols != val.cols)
    throw InvalidArgument("accuracy_vs_k_sweep: train/val band counts differ");

  SweepResult sweep;
  sweep.classifier = classifier;
  sweep.seed = seed;
  for (std::size_t k : k_values) {
    const std::vector<std::size_t> bands = top_k_bands(report, k);
    const FeatureMatrix train_k = restrict_features(train, bands);
    const FeatureMatrix val_k = restrict_features(val, bands);
    std::vector<ClassLabel> predictions;
    if (classifier == "boosted") {
      const BoostedTreesModel model = train_boosted(
          train_k, train_labels, params.rounds, params.learning_rate, params.max_depth, seed);
      predictions = predict(model, val_k);
    } else {
      const LinearSvmModel model =
          train_svm(train_k, train_labels, params.epochs, params.reg, seed);
      predictions = predict(model, val_k);
    }
    sweep.k_values.push_back(k);
    sweep.accuracies.push_back(evaluate(predictions, val_labels).second);
  }
  return sweep;
}

WindowReport window_report(const ImportanceReport& report, std::size_t k,
                           const std::vector<std::pair<double, double>>& windows) {
  report.validate();
  if (report.wavelengths_nm.empty())
    throw InvalidArgument("window_report: report carries no wavelengths");
  for (const auto& [lo, hi] : windows)
    if (!(lo < hi)) throw InvalidArgument("window_report: window low must be below high");
  std::vector<std::pair<double, double>> sorted = windows;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1].first <= sorted[i].second)
      throw InvalidArgument("window_report: windows overlap");

  const std::vector<std::size_t> top = top_k_bands(report, k);
  WindowReport out;
  out.windows = windows;
  out.fractions.assign(windows.size(), 0.0);
  std::size_t inside_total = 0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    std::size_t count = 0;
    for (std::size_t band : top) {
      const double wl = report.wavelengths_nm[band];
      if (wl >= windows[w].first && wl <= windows[w].second) ++count;
    }
    out.fractions[w] = static_cast<double>(count) / static_cast<double>(k);
    inside_total += count;
  }
  out.remainder = static_cast<double>(k - inside_total) / static_cast<double>(k);
  return out;
}

namespace {

double normalized_difference(const Spectrum& spectrum, double a_nm, double b_nm) {
  spectrum.validate();
  if (spectrum.wavelengths_nm.empty())
    throw InvalidArgument("vegetation index: spectrum carries no wavelengths");
  const double lo = spectrum.wavelengths_nm.front();
  const double hi = spectrum.wavelengths_nm.back();
  for (double req : {a_nm, b_nm})
    if (req < lo || req > hi)
      throw InvalidArgument("vegetation index: requested wavelength " + format_g9(req) +
                            " nm is outside the sensor range");

  auto nearest = [&](double target) {
    std::size_t best = 0;
    double best_d = std::abs(spectrum.wavelengths_nm[0] - target);
    for (std::size_t i = 1; i < spectrum.wavelengths_nm.size(); ++i) {
      const double d = std::abs(spectrum.wavelengths_nm[i] - target);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  const double a = spectrum.values[nearest(a_nm)];
  const double b = spectrum.values[nearest(b_nm)];
  const double denom = a + b;
  if (std::abs(denom) < 1e-12) return 0.0;
  return (a - b) / denom;
}

}  // namespace

double ndvi(const Spectrum& spectrum, double red_nm, double nir_nm) {
  return normalized_difference(spectrum, nir_nm, red_nm);
}

double ngrdi(const Spectrum& spectrum, double green_nm, double red_nm) {
  return normalized_difference(spectrum, green_nm, red_nm);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void save_importance_csv(const ImportanceReport& report, const std::filesystem::path& path) {
  report.validate();
  std::ostringstream out;
  out << "band,wavelength_nm,score\n";
  for (std::size_t b = 0; b < report.scores.size(); ++b) {
    out << b << ",";
    if (!report.wavelengths_nm.empty()) out << format_g9(report.wavelengths_nm[b]);
    out << "," << format_g9(report.scores[b]) << "\n";
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.str();
  file.flush();
  if (!file) throw IoError("write failed on " + path.string());
}

ImportanceReport load_importance_csv(const std::filesystem::path& path,
                                     ImportanceMethod method) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "band,wavelength_nm,score") throw CsvError(1, "unexpected header");

  ImportanceReport report;
  report.method = method;
  bool any_wavelength = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 3) throw CsvError(line_no, "expected 3 cells");
    double band, score;
    if (!try_parse_double(cells[0], band) || band != std::floor(band) || band < 0)
      throw CsvError(line_no, "bad band index \"" + cells[0] + "\"");
    if (static_cast<std::size_t>(band) != report.scores.size())
      throw CsvError(line_no, "band indices must be consecutive from 0");
    if (!try_parse_double(cells[2], score))
      throw CsvError(line_no, "non-numeric score \"" + cells[2] + "\"");
    double wl = 0.0;
    if (!cells[1].empty()) {
      if (!try_parse_double(cells[1], wl))
        throw CsvError(line_no, "non-numeric wavelength \"" + cells[1] + "\"");
      any_wavelength = true;
      report.wavelengths_nm.push_back(wl);
    }
    report.scores.push_back(score);
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  if (any_wavelength && report.wavelengths_nm.size() != report.scores.size())
    throw CsvError(line_no, "wavelengths present on some rows only");
  report.ranking = ranking_from_scores(report.scores);
  report.validate();
  return report;
}

void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "k,accuracy\n";
  for (std::size_t i = 0; i < sweep.k_values.size(); ++i)
    out << sweep.k_values[i] << "," << format_g9(sweep.accuracies[i]) << "\n";
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.str();
  file.flush();
  if (!file) throw IoError("write failed on " + path.string());
}

SweepResult load_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,accuracy") throw CsvError(1, "unexpected header");

  SweepResult sweep;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 2) throw CsvError(line_no, "expected 2 cells");
    double k, acc;
    if (!try_parse_double(cells[0], k) || k < 1 || k != std::floor(k))
      throw CsvError(line_no, "bad k \"" + cells[0] + "\"");
    if (!try_parse_double(cells[1], acc) || acc < 0.0 || acc > 1.0)
      throw CsvError(line_no, "bad accuracy \"" + cells[1] + "\"");
    sweep.k_values.push_back(static_cast<std::size_t>(k));
    sweep.accuracies.push_back(acc);
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  return sweep;
}

}  // namespace fhb
