#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fhb/hsi_core.hpp"

namespace fhb {

// Mild/serious endmember pair over the 125-band 450-946 nm grid. The two
// spectra agree outside the planted windows and differ by at least min_gap
// inside each window's center third.
struct EndmemberLibrary {
  std::vector<double> wavelengths_nm;  // 450 + 4*i, 125 bands
  std::vector<double> mild_spectrum;
  std::vector<double> serious_spectrum;
  std::vector<std::pair<double, double>> planted_windows;  // {700-750, 800-875} nm
  double min_gap = 0.15;
  std::uint64_t seed = 0;
};

struct SceneSpec {
  std::size_t mild_samples = 101;   // paper counts scaled down 10x
  std::size_t serious_samples = 69;
  std::size_t cube_edge = 8;
  double noise_sigma = 0.02;
  double abundance_alpha = 2.0;  // Beta concentration for pixel mixing
  double min_gap = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

// Smooth Gaussian-bump spectra with depressions planted in the
// 700-750 / 800-875 nm windows of the serious endmember.
EndmemberLibrary make_endmembers(double min_gap, std::uint64_t seed);

// One cube: per pixel, a Beta-drawn abundance a >= 0.6 mixes the class
// endmember with the other one, plus Gaussian noise, clipped to [0, inf).
// Values are quantized to float32, matching the container payload width.
HsiCube synth_cube(const EndmemberLibrary& library, ClassLabel label, const SceneSpec& spec,
                   std::uint64_t sample_seed);

// Sample bookkeeping shared by the dataset generator and the CLI, so cubes
// written to disk and in-memory features line up exactly.
std::vector<ClassLabel> scene_labels(const SceneSpec& spec);  // mild block then serious block
std::uint64_t scene_sample_seed(const SceneSpec& spec, std::size_t index);
std::string scene_sample_id(ClassLabel label, std::size_t per_class_index);

struct SynthDataset {
  Dataset dataset;  // spatial-mean spectra of cubes trimmed to 101 bands
  std::vector<std::string> sample_ids;
  std::vector<std::pair<double, double>> windows;  // planted ground truth
};

SynthDataset synth_dataset(const EndmemberLibrary& library, const SceneSpec& spec);

}  // namespace fhb
