#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fhb/classify.hpp"
#include "fhb/cluster.hpp"

namespace fhb {

enum class ImportanceMethod { Impurity, FStat, MutualInfo };

std::string to_string(ImportanceMethod method);
ImportanceMethod parse_importance_method(const std::string& text);

struct ImportanceReport {
  std::vector<double> scores;          // nonnegative, one per band
  ImportanceMethod method = ImportanceMethod::Impurity;
  std::vector<std::size_t> ranking;    // descending score; ties toward lower band
  std::vector<double> wavelengths_nm;  // empty when the features lacked them

  void validate() const;
};

// One-way ANOVA F statistic per band across clusters. Zero within-variance
// with positive between-variance scores the 1e12 sentinel; F values are
// capped there too so rankings stay finite.
ImportanceReport importance_fstat(const FeatureMatrix& features, const PseudoLabels& labels);

// Discrete mutual information (natural log) between an equal-width histogram
// of each band and the cluster labels.
ImportanceReport importance_mutualinfo(const FeatureMatrix& features, const PseudoLabels& labels,
                                       std::size_t bins = 16);

// Bagged depth-limited decision trees (Gini impurity, exhaustive threshold
// search over a per-node band subset of size ~sqrt(bands)). Score = total
// weighted impurity decrease per band, normalized to sum 1 when nonzero.
ImportanceReport importance_impurity(const FeatureMatrix& features, const PseudoLabels& labels,
                                     std::size_t trees, std::size_t max_depth,
                                     std::uint64_t seed);

// First k entries of the ranking.
std::vector<std::size_t> top_k_bands(const ImportanceReport& report, std::size_t k);

// Column subset in the given order; duplicate or out-of-range indices throw.
FeatureMatrix restrict_features(const FeatureMatrix& features,
                                const std::vector<std::size_t>& bands);

struct SweepResult {
  std::vector<std::size_t> k_values;  // band counts
  std::vector<double> accuracies;     // validation accuracy per k
  std::string classifier;
  std::uint64_t seed = 0;
};

// For each k: restrict both splits to the top-k bands, train the named
// classifier ("boosted" or "svm"), record validation accuracy.
SweepResult accuracy_vs_k_sweep(const FeatureMatrix& train,
                                const std::vector<ClassLabel>& train_labels,
                                const FeatureMatrix& val,
                                const std::vector<ClassLabel>& val_labels,
                                const ImportanceReport& report,
                                const std::vector<std::size_t>& k_values,
                                const std::string& classifier, std::uint64_t seed,
                                const ClassifierParams& params = {});

struct WindowReport {
  std::vector<std::pair<double, double>> windows;  // as given
  std::vector<double> fractions;                   // of the top-k bands, per window
  double remainder = 0.0;                          // out-of-window fraction
};

// Fraction of the top-k bands whose wavelength lies in each [lo, hi] window.
WindowReport window_report(const ImportanceReport& report, std::size_t k,
                           const std::vector<std::pair<double, double>>& windows);

// Normalized difference indices on the band nearest each requested
// wavelength; a denominator below 1e-12 yields 0.
double ndvi(const Spectrum& spectrum, double red_nm = 670.0, double nir_nm = 800.0);
double ngrdi(const Spectrum& spectrum, double green_nm = 550.0, double red_nm = 670.0);

// "band,wavelength_nm,score" rows in band order.
void save_importance_csv(const ImportanceReport& report, const std::filesystem::path& path);
ImportanceReport load_importance_csv(const std::filesystem::path& path,
                                     ImportanceMethod method = ImportanceMethod::Impurity);

// "k,accuracy".
void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);
SweepResult load_sweep_csv(const std::filesystem::path& path);

}  // namespace fhb
