#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fhb/errors.hpp"

namespace fhb {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class ClassLabel { Mild, Serious };

std::string to_string(ClassLabel label);
ClassLabel parse_class_label(const std::string& text);

// One reflectance value per band. wavelengths_nm is either empty (unknown,
// e.g. data loaded from a dataset CSV, which carries no wavelengths) or has
// the same length as values.
struct Spectrum {
  std::vector<double> values;
  std::vector<double> wavelengths_nm;

  std::size_t bands() const { return values.size(); }
  void validate() const;
};

// A width x height x bands reflectance grid. Data is row-major, ordered
// (row, column, band): the band index varies fastest.
struct HsiCube {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 0;
  std::vector<double> wavelengths_nm;  // strictly increasing, size = bands
  std::vector<double> data;            // size = width * height * bands

  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return data[(row * width + col) * bands + band];
  }
  double& at(std::size_t row, std::size_t col, std::size_t band) {
    return data[(row * width + col) * bands + band];
  }

  void validate() const;  // throws InvalidArgument on any broken invariant
};

struct DatasetEntry {
  Spectrum spectrum;
  std::optional<ClassLabel> label;
};

struct Dataset {
  std::vector<DatasetEntry> samples;
  std::size_t band_count = 0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// HSIC binary container (little-endian):
//   bytes 0-3  magic "HSIC"; byte 4 version = 1; bytes 5-7 reserved zero;
//   bytes 8-19 width, height, bands as u32;
//   then bands x 8-byte f64 wavelengths (nm);
//   then width*height*bands x 4-byte f32 reflectances, (row, column, band).
HsiCube load_cube(const std::filesystem::path& path);
void save_cube(const HsiCube& cube, const std::filesystem::path& path);

// In-memory variants of the container codec, used by load/save and the
// corruption tests.
HsiCube decode_cube(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_cube(const HsiCube& cube);

// Drops the first `leading` and last `trailing` bands, wavelengths included.
HsiCube trim_bands(const HsiCube& cube, std::size_t leading, std::size_t trailing);

double wavelength_of(const HsiCube& cube, std::size_t band_index);

// All non-overlapping block x block tiles fully contained in the cube,
// scanned row-major. Partial edge tiles are dropped.
std::vector<HsiCube> block_split(const HsiCube& cube, std::size_t block);

// Dataset CSV: header "label,b0,...,b{n-1}"; label is "mild", "serious" or
// empty (unlabeled); values are decimal text with 9 significant digits.
Dataset load_dataset_csv(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace fhb
