#include "fhb/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "fhb/preprocess.hpp"
#include "fhb/rng.hpp"

namespace fhb {

namespace {

constexpr std::size_t kBands = 125;
constexpr double kStartNm = 450.0;
constexpr double kStepNm = 4.0;
constexpr std::size_t kTrimLeading = 10;
constexpr std::size_t kTrimTrailing = 14;

double gaussian_bump(double x, double center, double sigma, double amp) {
  const double d = (x - center) / sigma;
  return amp * std::exp(-0.5 * d * d);
}

}  // namespace

void SceneSpec::validate() const {
  if (mild_samples == 0 || serious_samples == 0)
    throw InvalidArgument("scene spec: sample counts must be positive");
  if (cube_edge == 0) throw InvalidArgument("scene spec: cube edge must be positive");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("scene spec: noise sigma must be nonnegative");
  if (!(abundance_alpha > 0.0))
    throw InvalidArgument("scene spec: abundance alpha must be positive");
  if (!(min_gap > 0.0) || min_gap > 0.5)
    throw InvalidArgument("scene spec: min_gap must be in (0, 0.5]");
}

EndmemberLibrary make_endmembers(double min_gap, std::uint64_t seed) {
  if (!(min_gap > 0.0) || min_gap > 0.5)
    throw InvalidArgument("make_endmembers: min_gap must be in (0, 0.5]");

  EndmemberLibrary lib;
  lib.min_gap = min_gap;
  lib.seed = seed;
  lib.planted_windows = {{700.0, 750.0}, {800.0, 875.0}};
  lib.wavelengths_nm.resize(kBands);
  for (std::size_t b = 0; b < kBands; ++b)
    lib.wavelengths_nm[b] = kStartNm + kStepNm * static_cast<double>(b);

  // Depression depth: sin^2 reaches 3/4 at the center-third edges, so a
  // 4/3 factor (plus slack) keeps the gap >= min_gap across the center third.
  const double depth = min_gap * (4.0 / 3.0) * 1.03;

  Rng rng(seed);
  struct Bump {
    double center, sigma, amp;
  };
  std::vector<Bump> bumps;
  // One wide bump centered between the two windows carries the spectrum
  // shape; its peak pins the shared global maximum outside the windows.
  bumps.push_back({775.0, rng.uniform(120.0, 140.0),
                   std::max(rng.uniform(0.50, 0.62), 2.2 * min_gap)});
  // Narrow bumps stay left of 700 nm with negligible tails at the windows
  // and at the 450 nm edge, so both classes share min and max values.
  const std::size_t narrow = 2 + rng.uniform_index(3);
  for (std::size_t i = 0; i < narrow; ++i)
    bumps.push_back({rng.uniform(520.0, 600.0), rng.uniform(16.0, 26.0),
                     rng.uniform(0.15, 0.35)});

  lib.mild_spectrum.resize(kBands);
  lib.serious_spectrum.resize(kBands);
  for (std::size_t b = 0; b < kBands; ++b) {
    const double wl = lib.wavelengths_nm[b];
    double v = 0.0;
    for (const Bump& bump : bumps) v += gaussian_bump(wl, bump.center, bump.sigma, bump.amp);
    v = std::clamp(v, 0.0, 1.0);
    lib.mild_spectrum[b] = v;

    double depression = 0.0;
    for (const auto& [lo, hi] : lib.planted_windows) {
      if (wl < lo || wl > hi) continue;
      const double phase = (wl - lo) / (hi - lo);
      const double s = std::sin(M_PI * phase);
      depression += depth * s * s;
    }
    lib.serious_spectrum[b] = std::clamp(v - depression, 0.0, 1.0);
  }
  return lib;
}

HsiCube synth_cube(const EndmemberLibrary& library, ClassLabel label, const SceneSpec& spec,
                   std::uint64_t sample_seed) {
  spec.validate();
  if (library.wavelengths_nm.size() != kBands ||
      library.mild_spectrum.size() != kBands || library.serious_spectrum.size() != kBands)
    throw InvalidArgument("synth_cube: malformed endmember library");

  const std::vector<double>& own =
      label == ClassLabel::Mild ? library.mild_spectrum : library.serious_spectrum;
  const std::vector<double>& other =
      label == ClassLabel::Mild ? library.serious_spectrum : library.mild_spectrum;

  HsiCube cube;
  cube.width = spec.cube_edge;
  cube.height = spec.cube_edge;
  cube.bands = kBands;
  cube.wavelengths_nm = library.wavelengths_nm;
  cube.data.resize(spec.cube_edge * spec.cube_edge * kBands);

  Rng rng(sample_seed);
  const std::size_t pixels = spec.cube_edge * spec.cube_edge;
  for (std::size_t p = 0; p < pixels; ++p) {
    double a = 0.0;
    std::size_t attempts = 0;
    do {
      a = rng.beta(spec.abundance_alpha, spec.abundance_alpha);
      if (++attempts > 1000000)
        throw InvalidArgument("synth_cube: abundance rejection sampling stalled");
    } while (a < 0.6);
    for (std::size_t b = 0; b < kBands; ++b) {
      double v = a * own[b] + (1.0 - a) * other[b] + spec.noise_sigma * rng.normal();
      v = std::max(v, 0.0);
      cube.data[p * kBands + b] = static_cast<double>(static_cast<float>(v));
    }
  }
  return cube;
}

std::vector<ClassLabel> scene_labels(const SceneSpec& spec) {
  spec.validate();
  std::vector<ClassLabel> labels;
  labels.reserve(spec.mild_samples + spec.serious_samples);
  labels.insert(labels.end(), spec.mild_samples, ClassLabel::Mild);
  labels.insert(labels.end(), spec.serious_samples, ClassLabel::Serious);
  return labels;
}

std::uint64_t scene_sample_seed(const SceneSpec& spec, std::size_t index) {
  return derive_seed(spec.seed, 1000 + index);
}

std::string scene_sample_id(ClassLabel label, std::size_t per_class_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", per_class_index);
  return to_string(label) + "_" + buf;
}

SynthDataset synth_dataset(const EndmemberLibrary& library, const SceneSpec& spec) {
  spec.validate();

  SynthDataset out;
  out.windows = library.planted_windows;
  out.dataset.band_count = kBands - kTrimLeading - kTrimTrailing;

  const std::vector<ClassLabel> labels = scene_labels(spec);
  std::size_t per_class[2] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ClassLabel label = labels[i];
    const HsiCube cube = synth_cube(library, label, spec, scene_sample_seed(spec, i));
    const HsiCube trimmed = trim_bands(cube, kTrimLeading, kTrimTrailing);

    DatasetEntry entry;
    entry.spectrum = spatial_mean(trimmed);
    entry.label = label;
    out.dataset.samples.push_back(std::move(entry));

    std::size_t& counter = per_class[label == ClassLabel::Serious ? 1 : 0];
    out.sample_ids.push_back(scene_sample_id(label, counter));
    ++counter;
  }
  return out;
}

}  // namespace fhb
