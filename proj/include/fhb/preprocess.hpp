#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fhb/hsi_core.hpp"

namespace fhb {

enum class Normalize { None, MinMax, ZScore };

std::string to_string(Normalize mode);
Normalize parse_normalize(const std::string& text);

// One row per sample. wavelengths_nm is carried through from the source cubes
// when known, otherwise empty.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;           // row-major
  std::vector<std::string> sample_ids;  // size rows, unique
  std::vector<double> wavelengths_nm;   // empty or size cols

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values.data() + r * cols, cols);
  }

  void validate() const;
};

// Mean spectrum over all pixels, one value per band.
Spectrum spatial_mean(const HsiCube& cube);

// Per-spectrum min-max map to [0, 1]; a range below 1e-12 maps to all zeros.
Spectrum minmax_normalize(const Spectrum& spectrum);

// Row i = spatial mean of cube i, normalized per `mode`. MinMax is applied
// per sample; ZScore standardizes each band across samples.
FeatureMatrix build_features(const std::vector<HsiCube>& cubes, Normalize mode);
FeatureMatrix build_features(const std::vector<HsiCube>& cubes, Normalize mode,
                             std::vector<std::string> sample_ids);

FeatureMatrix features_from_dataset(const Dataset& dataset, Normalize mode);

// Rotates the spatial grid counterclockwise by 90 degrees x quarter_turns
// (taken modulo 4); bands are untouched.
HsiCube augment_rotate(const HsiCube& cube, unsigned quarter_turns);

// size x size sub-grid at a seeded pseudo-random offset (row drawn first).
HsiCube augment_crop(const HsiCube& cube, std::size_t size, std::uint64_t seed);

// Dataset CSV schema with a leading sample-id column:
// "id,label,b0,...,b{n-1}".
void save_features_csv(const FeatureMatrix& features,
                       const std::vector<std::optional<ClassLabel>>& labels,
                       const std::filesystem::path& path);
std::pair<FeatureMatrix, std::vector<std::optional<ClassLabel>>> load_features_csv(
    const std::filesystem::path& path);

}  // namespace fhb
