#include "fhb/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "fhb/rng.hpp"
#include "fhb/textio.hpp"

namespace fhb {

void PseudoLabels::validate() const {
  if (k == 0) throw InvalidArgument("pseudo labels: k must be positive");
  for (std::size_t a : assignments)
    if (a >= k) throw InvalidArgument("pseudo labels: assignment out of range");
  std::set<ClassLabel> used;
  for (const auto& [cluster, label] : class_map) {
    if (cluster >= k) throw InvalidArgument("pseudo labels: class_map key out of range");
    if (!used.insert(label).second)
      throw InvalidArgument("pseudo labels: class_map is not injective");
  }
}

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Rows visited in sample-id order make every reduction independent of the
// row layout of the matrix.
std::vector<std::size_t> id_order(const FeatureMatrix& features) {
  std::vector<std::size_t> order(features.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return features.sample_ids[a] < features.sample_ids[b];
  });
  return order;
}

std::size_t nearest_centroid(std::span<const double> row,
                             const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = dist2(row, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = dist2(row, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::pair<KMeansModel, PseudoLabels> kmeans_fit(const FeatureMatrix& features, std::size_t k,
                                                std::uint64_t seed, std::size_t max_iter,
                                                double tol) {
  features.validate();
  const std::size_t n = features.rows;
  if (k == 0) throw InvalidArgument("kmeans_fit: k must be positive");
  if (k > n) throw InvalidArgument("kmeans_fit: k exceeds sample count");
  if (n == 0) throw InvalidArgument("kmeans_fit: no samples");
  if (max_iter == 0) throw InvalidArgument("kmeans_fit: max_iter must be positive");
  if (tol < 0.0) throw InvalidArgument("kmeans_fit: tol must be nonnegative");

  const std::vector<std::size_t> order = id_order(features);
  Rng rng(seed);

  // k-means++ seeding, candidates walked in id order.
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  {
    const std::size_t first = order[rng.uniform_index(n)];
    auto row = features.row(first);
    centroids.emplace_back(row.begin(), row.end());
  }
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(features.row(i), centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i : order) total += d2[i];
    std::size_t pick = order[0];
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      pick = order.back();
      for (std::size_t i : order) {
        cum += d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = order[rng.uniform_index(n)];
    }
    auto row = features.row(pick);
    centroids.emplace_back(row.begin(), row.end());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], dist2(features.row(i), centroids.back()));
  }

  std::vector<std::size_t> assign(n);
  auto assign_all = [&]() {
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_centroid(features.row(i), centroids);
  };
  auto current_inertia = [&]() {
    double s = 0.0;
    for (std::size_t i : order) s += dist2(features.row(i), centroids[assign[i]]);
    return s;
  };

  KMeansModel model;
  model.k = k;
  model.seed = seed;

  assign_all();
  model.inertia_history.push_back(current_inertia());

  std::vector<std::vector<double>> sums(k, std::vector<double>(features.cols));
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i : order) {
      auto row = features.row(i);
      auto& s = sums[assign[i]];
      for (std::size_t c = 0; c < features.cols; ++c) s[c] += row[c];
      ++counts[assign[i]];
    }

    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      std::vector<double> updated(features.cols);
      for (std::size_t j = 0; j < features.cols; ++j)
        updated[j] = sums[c][j] / static_cast<double>(counts[c]);
      movement = std::max(movement, std::sqrt(dist2(updated, centroids[c])));
      centroids[c] = std::move(updated);
    }

    // Re-seed each empty cluster with the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = order[0];
      double far_d = -1.0;
      for (std::size_t i : order) {
        const double d = dist2(features.row(i), centroids[assign[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      auto row = features.row(far);
      centroids[c].assign(row.begin(), row.end());
      assign[far] = c;
      counts[c] = 1;
      movement = std::max(movement, std::sqrt(far_d));
    }

    assign_all();
    model.inertia_history.push_back(current_inertia());
    model.iterations = it;

    bool any_empty = false;
    std::vector<bool> seen(k, false);
    for (std::size_t a : assign) seen[a] = true;
    for (std::size_t c = 0; c < k; ++c) any_empty = any_empty || !seen[c];

    if (movement < tol && !any_empty) break;
  }

  model.centroids = std::move(centroids);
  model.inertia = model.inertia_history.back();

  PseudoLabels labels;
  labels.assignments = std::move(assign);
  labels.k = k;
  return {std::move(model), std::move(labels)};
}

double silhouette_score(const FeatureMatrix& features, const PseudoLabels& labels) {
  features.validate();
  labels.validate();
  const std::size_t n = features.rows;
  const std::size_t k = labels.k;
  if (labels.assignments.size() != n)
    throw InvalidArgument("silhouette_score: label count does not match row count");
  if (k < 2) throw InvalidArgument("silhouette_score: need at least 2 clusters");
  if (n < 2) throw InvalidArgument("silhouette_score: need at least 2 samples");

  std::vector<std::size_t> cluster_size(k, 0);
  for (std::size_t a : labels.assignments) ++cluster_size[a];
  for (std::size_t c = 0; c < k; ++c)
    if (cluster_size[c] == 0) throw InvalidArgument("silhouette_score: cluster is empty");

  double total = 0.0;
  std::vector<double> sum_to(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum_to[labels.assignments[j]] += std::sqrt(dist2(features.row(i), features.row(j)));
    }
    const std::size_t own = labels.assignments[i];
    if (cluster_size[own] == 1) continue;  // singleton contributes 0
    const double a = sum_to[own] / static_cast<double>(cluster_size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(cluster_size[c]));
    }
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

std::size_t elbow_knee(const std::vector<std::size_t>& k_values,
                       const std::vector<double>& inertias) {
  if (k_values.size() < 3) throw InvalidArgument("elbow_knee: need at least 3 candidates");
  if (k_values.size() != inertias.size())
    throw InvalidArgument("elbow_knee: k and inertia counts differ");
  for (std::size_t i = 0; i + 1 < k_values.size(); ++i)
    if (!(k_values[i] < k_values[i + 1]))
      throw InvalidArgument("elbow_knee: k values must be strictly increasing");

  std::size_t best = 1;
  double best_curv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < k_values.size(); ++i) {
    const double curv = inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1];
    if (curv > best_curv) {
      best_curv = curv;
      best = i;
    }
  }
  return k_values[best];
}

KScanResult select_k(const FeatureMatrix& features, std::size_t k_min, std::size_t k_max,
                     std::uint64_t seed) {
  features.validate();
  if (k_min < 2 || k_min >= k_max || k_max > features.rows)
    throw InvalidArgument("select_k: need 2 <= k_min < k_max <= rows");

  KScanResult scan;
  for (std::size_t k = k_min - 1; k <= k_max; ++k) {
    auto [model, labels] = kmeans_fit(features, k, seed + k);
    scan.k_values.push_back(k);
    scan.inertias.push_back(model.inertia);
    scan.silhouettes.push_back(k >= 2 ? silhouette_score(features, labels)
                                      : std::numeric_limits<double>::quiet_NaN());
  }

  double best_sil = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.k_values.size(); ++i) {
    if (scan.k_values[i] < k_min) continue;
    if (scan.silhouettes[i] > best_sil) {
      best_sil = scan.silhouettes[i];
      scan.chosen_k = scan.k_values[i];
    }
  }
  scan.agreement = elbow_knee(scan.k_values, scan.inertias) == scan.chosen_k;
  return scan;
}

PseudoLabels map_clusters_to_classes(const PseudoLabels& labels, const FeatureMatrix& features,
                                     std::size_t reference_band) {
  labels.validate();
  features.validate();
  if (labels.k != 2) throw InvalidArgument("map_clusters_to_classes: requires exactly 2 clusters");
  if (labels.assignments.size() != features.rows)
    throw InvalidArgument("map_clusters_to_classes: label count does not match row count");
  if (reference_band >= features.cols)
    throw InvalidArgument("map_clusters_to_classes: reference band out of range");

  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < features.rows; ++i) {
    sum[labels.assignments[i]] += features.at(i, reference_band);
    ++count[labels.assignments[i]];
  }
  if (count[0] == 0 || count[1] == 0)
    throw InvalidArgument("map_clusters_to_classes: a cluster is empty");

  const double mean0 = sum[0] / static_cast<double>(count[0]);
  const double mean1 = sum[1] / static_cast<double>(count[1]);

  PseudoLabels out = labels;
  const std::size_t mild = mean0 >= mean1 ? 0 : 1;  // ties: lower index is Mild
  out.class_map = {{mild, ClassLabel::Mild}, {1 - mild, ClassLabel::Serious}};
  return out;
}

void save_kscan_csv(const KScanResult& scan, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "k,inertia,silhouette\n";
  for (std::size_t i = 0; i < scan.k_values.size(); ++i) {
    out << scan.k_values[i] << "," << format_g9(scan.inertias[i]) << ",";
    if (!std::isnan(scan.silhouettes[i])) out << format_g9(scan.silhouettes[i]);
    out << "\n";
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.str();
  file.flush();
  if (!file) throw IoError("write failed on " + path.string());
}

KScanResult load_kscan_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,inertia,silhouette") throw CsvError(1, "unexpected header");

  KScanResult scan;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 3) throw CsvError(line_no, "expected 3 cells");
    double k, inertia;
    if (!try_parse_double(cells[0], k) || k < 1 || k != std::floor(k))
      throw CsvError(line_no, "bad k \"" + cells[0] + "\"");
    if (!try_parse_double(cells[1], inertia))
      throw CsvError(line_no, "non-numeric inertia \"" + cells[1] + "\"");
    double sil = std::numeric_limits<double>::quiet_NaN();
    if (!cells[2].empty() && !try_parse_double(cells[2], sil))
      throw CsvError(line_no, "non-numeric silhouette \"" + cells[2] + "\"");
    scan.k_values.push_back(static_cast<std::size_t>(k));
    scan.inertias.push_back(inertia);
    scan.silhouettes.push_back(sil);
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  return scan;
}

}  // namespace fhb
