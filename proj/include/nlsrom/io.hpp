#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlsrom/linalg/matrix.hpp"
#include "nlsrom/pod.hpp"

namespace nlsrom::io {

// Binary snapshot container, little-endian:
//   offset  0  char[8]  magic "NLSROMSN"
//   offset  8  uint32   format version (1)
//   offset 12  uint32   reserved (0)
//   offset 16  uint64   rows
//   offset 24  uint64   cols
//   offset 32  float64  dt
//   offset 40  uint64   snapshot stride
//   offset 48  float64  rows*cols entries, column-major
struct SnapshotFile {
  linalg::DenseMatrix matrix;
  double dt = 0.0;
  std::uint64_t stride = 0;
};

constexpr std::size_t kSnapshotHeaderBytes = 48;

void write_snapshots(const std::filesystem::path& path, const linalg::DenseMatrix& y, double dt,
                     std::uint64_t stride);
SnapshotFile read_snapshots(const std::filesystem::path& path);

// Shortest round-trip decimal representation ("nan"/"inf" spelled out).
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// t, H, H - H(0)
void write_hamiltonian_csv(const std::filesystem::path& path, const std::vector<double>& times,
                           const std::vector<double>& h);

// <prefix>.bin holds the modes; <prefix>_sigma.csv holds i, sigma_raw, sigma_normalized.
void write_basis(const std::filesystem::path& prefix, const pod::PodBasis& basis);
pod::PodBasis read_basis(const std::filesystem::path& prefix);

}  // namespace nlsrom::io
