#include "fhb/preprocess.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fhb/rng.hpp"
#include "fhb/textio.hpp"

namespace fhb {

std::string to_string(Normalize mode) {
  switch (mode) {
    case Normalize::None: return "none";
    case Normalize::MinMax: return "minmax";
    case Normalize::ZScore: return "zscore";
  }
  throw InvalidArgument("bad Normalize value");
}

Normalize parse_normalize(const std::string& text) {
  if (text == "none") return Normalize::None;
  if (text == "minmax") return Normalize::MinMax;
  if (text == "zscore") return Normalize::ZScore;
  throw InvalidArgument("unknown normalization mode \"" + text + "\"");
}

void FeatureMatrix::validate() const {
  if (values.size() != rows * cols)
    throw InvalidArgument("feature matrix value count does not equal rows*cols");
  if (sample_ids.size() != rows)
    throw InvalidArgument("feature matrix sample id count does not equal rows");
  if (!wavelengths_nm.empty() && wavelengths_nm.size() != cols)
    throw InvalidArgument("feature matrix wavelength count does not equal cols");
  std::set<std::string> seen;
  for (const std::string& id : sample_ids)
    if (!seen.insert(id).second)
      throw InvalidArgument("duplicate sample id \"" + id + "\"");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("feature matrix contains a non-finite value");
}

Spectrum spatial_mean(const HsiCube& cube) {
  cube.validate();
  const std::size_t pixels = cube.width * cube.height;
  Spectrum mean;
  mean.values.assign(cube.bands, 0.0);
  mean.wavelengths_nm = cube.wavelengths_nm;
  for (std::size_t p = 0; p < pixels; ++p)
    for (std::size_t b = 0; b < cube.bands; ++b) mean.values[b] += cube.data[p * cube.bands + b];
  for (double& v : mean.values) v /= static_cast<double>(pixels);
  return mean;
}

Spectrum minmax_normalize(const Spectrum& spectrum) {
  spectrum.validate();
  if (spectrum.values.empty()) throw InvalidArgument("minmax_normalize: empty spectrum");
  double lo = spectrum.values[0], hi = spectrum.values[0];
  for (double v : spectrum.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Spectrum out;
  out.wavelengths_nm = spectrum.wavelengths_nm;
  out.values.resize(spectrum.values.size());
  const double range = hi - lo;
  if (range < 1e-12) {
    for (double& v : out.values) v = 0.0;
  } else {
    for (std::size_t i = 0; i < spectrum.values.size(); ++i)
      out.values[i] = (spectrum.values[i] - lo) / range;
  }
  return out;
}

FeatureMatrix build_features(const std::vector<HsiCube>& cubes, Normalize mode) {
  std::vector<std::string> ids;
  ids.reserve(cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i) ids.push_back("cube_" + std::to_string(i));
  return build_features(cubes, mode, std::move(ids));
}

FeatureMatrix build_features(const std::vector<HsiCube>& cubes, Normalize mode,
                             std::vector<std::string> sample_ids) {
  if (cubes.empty()) throw InvalidArgument("build_features: no cubes");
  if (sample_ids.size() != cubes.size())
    throw InvalidArgument("build_features: sample id count does not match cube count");
  for (const HsiCube& cube : cubes) {
    if (cube.bands != cubes[0].bands)
      throw InvalidArgument("build_features: cubes have mismatched band counts");
    if (cube.wavelengths_nm != cubes[0].wavelengths_nm)
      throw InvalidArgument("build_features: cubes have mismatched wavelengths");
  }

  FeatureMatrix out;
  out.rows = cubes.size();
  out.cols = cubes[0].bands;
  out.sample_ids = std::move(sample_ids);
  out.wavelengths_nm = cubes[0].wavelengths_nm;
  out.values.resize(out.rows * out.cols);
  for (std::size_t r = 0; r < out.rows; ++r) {
    Spectrum mean = spatial_mean(cubes[r]);
    if (mode == Normalize::MinMax) mean = minmax_normalize(mean);
    for (std::size_t c = 0; c < out.cols; ++c) out.at(r, c) = mean.values[c];
  }
  if (mode == Normalize::ZScore) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < out.rows; ++r) sum += out.at(r, c);
      const double mean = sum / static_cast<double>(out.rows);
      double ss = 0.0;
      for (std::size_t r = 0; r < out.rows; ++r) {
        const double d = out.at(r, c) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(out.rows));
      for (std::size_t r = 0; r < out.rows; ++r)
        out.at(r, c) = sd < 1e-12 ? 0.0 : (out.at(r, c) - mean) / sd;
    }
  }
  out.validate();
  return out;
}

FeatureMatrix features_from_dataset(const Dataset& dataset, Normalize mode) {
  dataset.validate();
  if (dataset.samples.empty()) throw InvalidArgument("features_from_dataset: empty dataset");

  FeatureMatrix out;
  out.rows = dataset.samples.size();
  out.cols = dataset.band_count;
  out.values.resize(out.rows * out.cols);
  out.sample_ids.reserve(out.rows);
  for (std::size_t r = 0; r < out.rows; ++r) out.sample_ids.push_back("row_" + std::to_string(r));
  if (!dataset.samples[0].spectrum.wavelengths_nm.empty())
    out.wavelengths_nm = dataset.samples[0].spectrum.wavelengths_nm;

  for (std::size_t r = 0; r < out.rows; ++r) {
    Spectrum s = dataset.samples[r].spectrum;
    if (mode == Normalize::MinMax) s = minmax_normalize(s);
    for (std::size_t c = 0; c < out.cols; ++c) out.at(r, c) = s.values[c];
  }
  if (mode == Normalize::ZScore) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < out.rows; ++r) sum += out.at(r, c);
      const double mean = sum / static_cast<double>(out.rows);
      double ss = 0.0;
      for (std::size_t r = 0; r < out.rows; ++r) {
        const double d = out.at(r, c) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(out.rows));
      for (std::size_t r = 0; r < out.rows; ++r)
        out.at(r, c) = sd < 1e-12 ? 0.0 : (out.at(r, c) - mean) / sd;
    }
  }
  out.validate();
  return out;
}

HsiCube augment_rotate(const HsiCube& cube, unsigned quarter_turns) {
  cube.validate();
  HsiCube out = cube;
  for (unsigned t = quarter_turns % 4; t > 0; --t) {
    HsiCube rotated;
    rotated.bands = out.bands;
    rotated.wavelengths_nm = out.wavelengths_nm;
    rotated.width = out.height;
    rotated.height = out.width;
    rotated.data.resize(out.data.size());
    // counterclockwise: out(r, c) = in(c, in_width - 1 - r)
    for (std::size_t r = 0; r < rotated.height; ++r)
      for (std::size_t c = 0; c < rotated.width; ++c)
        for (std::size_t b = 0; b < out.bands; ++b)
          rotated.at(r, c, b) = out.at(c, out.width - 1 - r, b);
    out = std::move(rotated);
  }
  return out;
}

HsiCube augment_crop(const HsiCube& cube, std::size_t size, std::uint64_t seed) {
  cube.validate();
  if (size == 0) throw InvalidArgument("augment_crop: size must be positive");
  if (size > cube.width || size > cube.height)
    throw InvalidArgument("augment_crop: size exceeds cube dimensions");

  Rng rng(seed);
  const std::size_t row_off = rng.uniform_index(cube.height - size + 1);
  const std::size_t col_off = rng.uniform_index(cube.width - size + 1);

  HsiCube out;
  out.width = size;
  out.height = size;
  out.bands = cube.bands;
  out.wavelengths_nm = cube.wavelengths_nm;
  out.data.resize(size * size * cube.bands);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c)
      for (std::size_t b = 0; b < cube.bands; ++b)
        out.at(r, c, b) = cube.at(row_off + r, col_off + c, b);
  return out;
}

void save_features_csv(const FeatureMatrix& features,
                       const std::vector<std::optional<ClassLabel>>& labels,
                       const std::filesystem::path& path) {
  features.validate();
  if (!labels.empty() && labels.size() != features.rows)
    throw InvalidArgument("save_features_csv: label count does not match row count");

  std::ostringstream out;
  out << "id,label";
  for (std::size_t b = 0; b < features.cols; ++b) out << ",b" << b;
  out << "\n";
  for (std::size_t r = 0; r < features.rows; ++r) {
    out << features.sample_ids[r] << ",";
    if (!labels.empty() && labels[r]) out << to_string(*labels[r]);
    for (std::size_t c = 0; c < features.cols; ++c) out << "," << format_g9(features.at(r, c));
    out << "\n";
  }

  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.str();
  file.flush();
  if (!file) throw IoError("write failed on " + path.string());
}

std::pair<FeatureMatrix, std::vector<std::optional<ClassLabel>>> load_features_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label")
    throw CsvError(1, "header must start with \"id,label\"");
  const std::size_t bands = header.size() - 2;
  for (std::size_t b = 0; b < bands; ++b)
    if (header[b + 2] != "b" + std::to_string(b))
      throw CsvError(1, "unexpected header column \"" + header[b + 2] + "\"");

  FeatureMatrix features;
  features.cols = bands;
  std::vector<std::optional<ClassLabel>> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != bands + 2)
      throw CsvError(line_no, "expected " + std::to_string(bands + 2) + " cells, got " +
                                  std::to_string(cells.size()));
    features.sample_ids.push_back(cells[0]);
    if (cells[1].empty()) {
      labels.emplace_back();
    } else {
      if (cells[1] != "mild" && cells[1] != "serious")
        throw CsvError(line_no, "unknown label \"" + cells[1] + "\"");
      labels.emplace_back(parse_class_label(cells[1]));
    }
    for (std::size_t b = 0; b < bands; ++b) {
      double v;
      if (!try_parse_double(cells[b + 2], v))
        throw CsvError(line_no, "non-numeric cell \"" + cells[b + 2] + "\"");
      if (!std::isfinite(v)) throw CsvError(line_no, "non-finite value");
      features.values.push_back(v);
    }
    ++features.rows;
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  features.validate();
  return {std::move(features), std::move(labels)};
}

}  // namespace fhb
