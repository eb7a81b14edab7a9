#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "fhb/preprocess.hpp"

namespace fhb {

struct KMeansModel {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;        // within-cluster sum of squared distances
  std::size_t iterations = 0;  // Lloyd update steps executed
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // inertia after each assignment pass
};

struct PseudoLabels {
  std::vector<std::size_t> assignments;       // cluster index per sample
  std::size_t k = 0;
  std::map<std::size_t, ClassLabel> class_map;  // empty until mapped; injective

  void validate() const;
};

// Lloyd's algorithm with k-means++ initialization. Assignments break ties
// toward the lowest centroid index; empty clusters are re-seeded with the
// point farthest from its centroid. All per-cluster accumulation walks rows
// in sample-id order, so the induced partition is invariant under row
// permutation.
std::pair<KMeansModel, PseudoLabels> kmeans_fit(const FeatureMatrix& features, std::size_t k,
                                                std::uint64_t seed, std::size_t max_iter = 300,
                                                double tol = 1e-6);

// Mean over samples of (b - a) / max(a, b) with Euclidean distances;
// singleton-cluster samples contribute 0.
double silhouette_score(const FeatureMatrix& features, const PseudoLabels& labels);

// The interior k maximizing the discrete second difference of inertia;
// ties break toward smaller k.
std::size_t elbow_knee(const std::vector<std::size_t>& k_values,
                       const std::vector<double>& inertias);

struct KScanResult {
  std::vector<std::size_t> k_values;  // k_min - 1 .. k_max (the extra low k feeds the elbow)
  std::vector<double> inertias;
  std::vector<double> silhouettes;    // NaN where k < 2
  std::size_t chosen_k = 0;           // silhouette argmax over k_min..k_max
  bool agreement = false;             // elbow knee == chosen_k
};

// Runs kmeans_fit for each k with per-k seed = seed + k.
KScanResult select_k(const FeatureMatrix& features, std::size_t k_min, std::size_t k_max,
                     std::uint64_t seed);

// Names the two clusters by centroid reflectance at reference_band: higher
// means Mild (healthy vegetation keeps a strong NIR plateau). Ties give Mild
// to the lower cluster index. Assignments are unchanged.
PseudoLabels map_clusters_to_classes(const PseudoLabels& labels, const FeatureMatrix& features,
                                     std::size_t reference_band);

// "k,inertia,silhouette" CSV; the silhouette cell is empty where undefined.
void save_kscan_csv(const KScanResult& scan, const std::filesystem::path& path);
// Restores the curves only; chosen_k/agreement are not part of the schema.
KScanResult load_kscan_csv(const std::filesystem::path& path);

}  // namespace fhb
