#include "nlsrom/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlsrom::io {
namespace {

constexpr char kMagic[8] = {'N', 'L', 'S', 'R', 'O', 'M', 'S', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("snapshot file: truncated header");
  return to_little(v);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("not a number: '" + s + "'");
  }
}

}  // namespace

void write_snapshots(const std::filesystem::path& path, const linalg::DenseMatrix& y, double dt,
                     std::uint64_t stride) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, 0);
  put<std::uint64_t>(os, y.rows());
  put<std::uint64_t>(os, y.cols());
  put<double>(os, dt);
  put<std::uint64_t>(os, stride);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(double)));
  } else {
    for (double v : y.values()) put<double>(os, v);
  }
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

SnapshotFile read_snapshots(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path.string() + ": not a snapshot file");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(version));
  (void)get<std::uint32_t>(is);
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  SnapshotFile f;
  f.dt = get<double>(is);
  f.stride = get<std::uint64_t>(is);
  std::vector<double> values(rows * cols);
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw std::runtime_error(path.string() + ": truncated data");
  if constexpr (std::endian::native == std::endian::big)
    for (double& v : values) v = to_little(v);
  f.matrix = linalg::DenseMatrix::from_columns(rows, cols, std::move(values));
  return f;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::invalid_argument("CSV has no column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::runtime_error(path.string() + ": row with " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (first) throw std::runtime_error(path.string() + ": empty CSV");
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  auto row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  row(table.header);
  for (const auto& r : table.rows) row(r);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

void write_hamiltonian_csv(const std::filesystem::path& path, const std::vector<double>& times,
                           const std::vector<double>& h) {
  if (times.size() != h.size()) throw std::invalid_argument("write_hamiltonian_csv: length mismatch");
  CsvTable t{{"t", "H", "H_minus_H0"}, {}};
  t.rows.reserve(h.size());
  for (std::size_t j = 0; j < h.size(); ++j)
    t.rows.push_back({format_double(times[j]), format_double(h[j]), format_double(h[j] - h.front())});
  write_csv(path, t);
}

void write_basis(const std::filesystem::path& prefix, const pod::PodBasis& basis) {
  write_snapshots(prefix.string() + ".bin", basis.modes, 0.0, 0);
  CsvTable t{{"i", "sigma_raw", "sigma_normalized"}, {}};
  for (std::size_t i = 0; i < basis.sigma_raw.size(); ++i)
    t.rows.push_back({std::to_string(i + 1), format_double(basis.sigma_raw[i]),
                      format_double(basis.sigma_normalized[i])});
  write_csv(prefix.string() + "_sigma.csv", t);
}

pod::PodBasis read_basis(const std::filesystem::path& prefix) {
  pod::PodBasis b;
  b.modes = read_snapshots(prefix.string() + ".bin").matrix;
  const CsvTable t = read_csv(prefix.string() + "_sigma.csv");
  const std::size_t raw = t.column("sigma_raw"), nrm = t.column("sigma_normalized");
  for (const auto& r : t.rows) {
    b.sigma_raw.push_back(parse_double(r[raw]));
    b.sigma_normalized.push_back(parse_double(r[nrm]));
  }
  b.sigma_all = b.sigma_raw;
  b.d = b.sigma_raw.size();
  b.l = b.modes.cols();
  for (double s : b.sigma_raw) b.total_energy += s * s;
  return b;
}

}  // namespace nlsrom::io
