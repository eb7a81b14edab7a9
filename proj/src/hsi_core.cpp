#include "fhb/hsi_core.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fhb/textio.hpp"

namespace fhb {

std::string to_string(ClassLabel label) {
  return label == ClassLabel::Mild ? "mild" : "serious";
}

ClassLabel parse_class_label(const std::string& text) {
  if (text == "mild") return ClassLabel::Mild;
  if (text == "serious") return ClassLabel::Serious;
  throw InvalidArgument("unknown class label \"" + text + "\"");
}

void Spectrum::validate() const {
  if (!wavelengths_nm.empty() && wavelengths_nm.size() != values.size())
    throw InvalidArgument("spectrum wavelength count does not match value count");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("spectrum contains a non-finite value");
  for (double w : wavelengths_nm)
    if (!std::isfinite(w)) throw InvalidArgument("spectrum contains a non-finite wavelength");
}

void HsiCube::validate() const {
  if (width == 0 || height == 0 || bands == 0)
    throw InvalidArgument("cube dimensions must all be positive");
  if (wavelengths_nm.size() != bands)
    throw InvalidArgument("cube wavelength count does not match band count");
  for (std::size_t b = 0; b + 1 < bands; ++b)
    if (!(wavelengths_nm[b] < wavelengths_nm[b + 1]))
      throw InvalidArgument("cube wavelengths must be strictly increasing");
  for (double w : wavelengths_nm)
    if (!std::isfinite(w)) throw InvalidArgument("cube wavelength is not finite");
  if (data.size() != width * height * bands)
    throw InvalidArgument("cube data length does not equal width*height*bands");
  for (double v : data) {
    if (!std::isfinite(v)) throw InvalidArgument("cube reflectance is not finite");
    if (v < 0.0) throw InvalidArgument("cube reflectance is negative");
  }
}

void Dataset::validate() const {
  for (const DatasetEntry& entry : samples) {
    entry.spectrum.validate();
    if (entry.spectrum.bands() != band_count)
      throw InvalidArgument("dataset sample band count mismatch");
  }
}

// ---------------------------------------------------------------------------
// HSIC container codec
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'H', 'S', 'I', 'C'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  return static_cast<std::uint32_t>(in[at]) | static_cast<std::uint32_t>(in[at + 1]) << 8 |
         static_cast<std::uint32_t>(in[at + 2]) << 16 |
         static_cast<std::uint32_t>(in[at + 3]) << 24;
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = v << 8 | in[at + static_cast<std::size_t>(i)];
  return v;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::vector<std::uint8_t> encode_cube(const HsiCube& cube) {
  cube.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + cube.bands * 8 + cube.data.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.insert(out.end(), 3, 0);
  put_u32(out, static_cast<std::uint32_t>(cube.width));
  put_u32(out, static_cast<std::uint32_t>(cube.height));
  put_u32(out, static_cast<std::uint32_t>(cube.bands));
  for (double w : cube.wavelengths_nm) put_u64(out, std::bit_cast<std::uint64_t>(w));
  for (double v : cube.data)
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

HsiCube decode_cube(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4)
    throw ContainerError(ContainerError::Offense::Truncated, bytes.size(),
                         "file too short for magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ContainerError(ContainerError::Offense::BadMagic, 0, "bad magic");
  if (bytes.size() < kHeaderSize)
    throw ContainerError(ContainerError::Offense::Truncated, bytes.size(),
                         "file too short for header");
  if (bytes[4] != kVersion)
    throw ContainerError(ContainerError::Offense::BadVersion, 4,
                         "unsupported version " + std::to_string(bytes[4]));
  for (std::size_t i = 5; i < 8; ++i)
    if (bytes[i] != 0)
      throw ContainerError(ContainerError::Offense::ReservedNonzero, i,
                           "reserved byte is nonzero");

  HsiCube cube;
  cube.width = get_u32(bytes, 8);
  cube.height = get_u32(bytes, 12);
  cube.bands = get_u32(bytes, 16);
  if (cube.width == 0)
    throw ContainerError(ContainerError::Offense::BadDimensions, 8, "width is zero");
  if (cube.height == 0)
    throw ContainerError(ContainerError::Offense::BadDimensions, 12, "height is zero");
  if (cube.bands == 0)
    throw ContainerError(ContainerError::Offense::BadDimensions, 16, "band count is zero");

  const std::uint64_t pixels =
      static_cast<std::uint64_t>(cube.width) * cube.height * cube.bands;
  const std::uint64_t expected = kHeaderSize + cube.bands * 8ULL + pixels * 4ULL;
  if (bytes.size() < expected)
    throw ContainerError(ContainerError::Offense::Truncated, bytes.size(),
                         "payload ends early, expected " + std::to_string(expected) + " bytes");
  if (bytes.size() > expected)
    throw ContainerError(ContainerError::Offense::TrailingBytes, expected,
                         "unexpected trailing bytes");

  std::size_t at = kHeaderSize;
  cube.wavelengths_nm.resize(cube.bands);
  for (std::size_t b = 0; b < cube.bands; ++b, at += 8) {
    double w = std::bit_cast<double>(get_u64(bytes, at));
    if (!std::isfinite(w))
      throw ContainerError(ContainerError::Offense::NonFiniteValue, at,
                           "wavelength is not finite");
    if (b > 0 && !(cube.wavelengths_nm[b - 1] < w))
      throw ContainerError(ContainerError::Offense::NonIncreasingWavelengths, at,
                           "wavelengths are not strictly increasing");
    cube.wavelengths_nm[b] = w;
  }

  cube.data.resize(static_cast<std::size_t>(pixels));
  for (std::size_t i = 0; i < pixels; ++i, at += 4) {
    float f = std::bit_cast<float>(get_u32(bytes, at));
    if (!std::isfinite(f))
      throw ContainerError(ContainerError::Offense::NonFiniteValue, at,
                           "reflectance is not finite");
    if (f < 0.0f)
      throw ContainerError(ContainerError::Offense::NegativeValue, at,
                           "reflectance is negative");
    cube.data[i] = static_cast<double>(f);
  }
  return cube;
}

HsiCube load_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());
  return decode_cube(bytes);
}

void save_cube(const HsiCube& cube, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_cube(cube);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

// ---------------------------------------------------------------------------
// Band bookkeeping
// ---------------------------------------------------------------------------

HsiCube trim_bands(const HsiCube& cube, std::size_t leading, std::size_t trailing) {
  cube.validate();
  if (leading + trailing >= cube.bands)
    throw InvalidArgument("trim_bands: leading + trailing must be < band count");
  const std::size_t kept = cube.bands - leading - trailing;

  HsiCube out;
  out.width = cube.width;
  out.height = cube.height;
  out.bands = kept;
  out.wavelengths_nm.assign(cube.wavelengths_nm.begin() + static_cast<std::ptrdiff_t>(leading),
                            cube.wavelengths_nm.begin() + static_cast<std::ptrdiff_t>(leading + kept));
  out.data.resize(cube.width * cube.height * kept);
  for (std::size_t p = 0; p < cube.width * cube.height; ++p)
    for (std::size_t b = 0; b < kept; ++b)
      out.data[p * kept + b] = cube.data[p * cube.bands + leading + b];
  return out;
}

double wavelength_of(const HsiCube& cube, std::size_t band_index) {
  if (band_index >= cube.bands)
    throw InvalidArgument("wavelength_of: band index out of range");
  return cube.wavelengths_nm[band_index];
}

std::vector<HsiCube> block_split(const HsiCube& cube, std::size_t block) {
  cube.validate();
  if (block == 0) throw InvalidArgument("block_split: block must be positive");
  const std::size_t tiles_y = cube.height / block;
  const std::size_t tiles_x = cube.width / block;

  std::vector<HsiCube> tiles;
  tiles.reserve(tiles_y * tiles_x);
  for (std::size_t ty = 0; ty < tiles_y; ++ty) {
    for (std::size_t tx = 0; tx < tiles_x; ++tx) {
      HsiCube tile;
      tile.width = block;
      tile.height = block;
      tile.bands = cube.bands;
      tile.wavelengths_nm = cube.wavelengths_nm;
      tile.data.resize(block * block * cube.bands);
      for (std::size_t r = 0; r < block; ++r)
        for (std::size_t c = 0; c < block; ++c)
          for (std::size_t b = 0; b < cube.bands; ++b)
            tile.at(r, c, b) = cube.at(ty * block + r, tx * block + c, b);
      tiles.push_back(std::move(tile));
    }
  }
  return tiles;
}

// ---------------------------------------------------------------------------
// Dataset CSV
// ---------------------------------------------------------------------------

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "label") throw CsvError(1, "header must start with \"label\"");
  const std::size_t bands = header.size() - 1;
  for (std::size_t b = 0; b < bands; ++b)
    if (header[b + 1] != "b" + std::to_string(b))
      throw CsvError(1, "unexpected header column \"" + header[b + 1] + "\"");

  Dataset dataset;
  dataset.band_count = bands;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != bands + 1)
      throw CsvError(line_no, "expected " + std::to_string(bands + 1) + " cells, got " +
                                  std::to_string(cells.size()));

    DatasetEntry entry;
    if (!cells[0].empty()) {
      if (cells[0] != "mild" && cells[0] != "serious")
        throw CsvError(line_no, "unknown label \"" + cells[0] + "\"");
      entry.label = parse_class_label(cells[0]);
    }
    entry.spectrum.values.resize(bands);
    for (std::size_t b = 0; b < bands; ++b) {
      double v;
      if (!try_parse_double(cells[b + 1], v))
        throw CsvError(line_no, "non-numeric cell \"" + cells[b + 1] + "\"");
      if (!std::isfinite(v)) throw CsvError(line_no, "non-finite value");
      entry.spectrum.values[b] = v;
    }
    dataset.samples.push_back(std::move(entry));
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  return dataset;
}

void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::ostringstream out;
  out << "label";
  for (std::size_t b = 0; b < dataset.band_count; ++b) out << ",b" << b;
  out << "\n";
  for (const DatasetEntry& entry : dataset.samples) {
    out << (entry.label ? to_string(*entry.label) : "");
    for (double v : entry.spectrum.values) out << "," << format_g9(v);
    out << "\n";
  }

  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.str();
  file.flush();
  if (!file) throw IoError("write failed on " + path.string());
}

}  // namespace fhb
