#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "nlsrom/io.hpp"
#include "oracles.hpp"

using namespace nlsrom;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nlsrom_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("snapshot container round trip") {
  std::mt19937_64 rng(1);
  linalg::DenseMatrix y(7, 5);
  for (double& v : y.values()) v = oracle::random_vector(1, rng)[0];
  const auto path = scratch("snap.bin");
  io::write_snapshots(path, y, 0.01, 3);
  CHECK(fs::file_size(path) == io::kSnapshotHeaderBytes + 35 * sizeof(double));
  const auto f = io::read_snapshots(path);
  CHECK(f.dt == 0.01);
  CHECK(f.stride == 3);
  REQUIRE(f.matrix.rows() == 7);
  REQUIRE(f.matrix.cols() == 5);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(f.matrix.values()[i] == y.values()[i]);

  std::ifstream raw(path, std::ios::binary);
  char magic[8];
  raw.read(magic, 8);
  CHECK(std::string(magic, 8) == "NLSROMSN");
}

TEST_CASE("snapshot container rejects damaged files") {
  const auto bad = scratch("bad.bin");
  std::ofstream(bad, std::ios::binary) << "NOTASNAPSHOTFILE-------------------------------------";
  CHECK_THROWS_AS(io::read_snapshots(bad), std::runtime_error);

  linalg::DenseMatrix y(4, 4, 1.0);
  const auto path = scratch("short.bin");
  io::write_snapshots(path, y, 0.1, 1);
  fs::resize_file(path, fs::file_size(path) - 8);
  CHECK_THROWS_AS(io::read_snapshots(path), std::runtime_error);
  CHECK_THROWS_AS(io::read_snapshots(scratch("missing.bin")), std::runtime_error);
}

TEST_CASE("format_double is shortest round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(std::nan("")) == "nan");
  CHECK(io::format_double(-INFINITY) == "-inf");
}

TEST_CASE("csv round trip and validation") {
  io::CsvTable t{{"a", "b"}, {{"1", "x"}, {"2.5", "y"}}};
  const auto path = scratch("t.csv");
  io::write_csv(path, t);
  const auto r = io::read_csv(path);
  CHECK(r.header == t.header);
  CHECK(r.rows == t.rows);
  CHECK(r.column("b") == 1);
  CHECK_THROWS_AS(r.column("c"), std::invalid_argument);
  std::ofstream(scratch("ragged.csv")) << "a,b\n1,2,3\n";
  CHECK_THROWS_AS(io::read_csv(scratch("ragged.csv")), std::runtime_error);
}

TEST_CASE("hamiltonian csv") {
  const auto path = scratch("h.csv");
  io::write_hamiltonian_csv(path, {0.0, 0.5}, {2.0, 2.25});
  const auto t = io::read_csv(path);
  CHECK(t.header == std::vector<std::string>{"t", "H", "H_minus_H0"});
  CHECK(t.rows[1][2] == "0.25");
}

TEST_CASE("basis export round trip") {
  pod::PodBasis b;
  b.modes = linalg::DenseMatrix::identity(3).leading_columns(2);
  b.sigma_raw = {2.0, 1.0};
  b.sigma_normalized = {2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0)};
  b.l = 2;
  b.d = 2;
  const auto prefix = scratch("basis");
  io::write_basis(prefix, b);
  const auto r = io::read_basis(prefix);
  CHECK(r.l == 2);
  CHECK(r.d == 2);
  CHECK(r.sigma_raw == b.sigma_raw);
  CHECK(r.sigma_normalized == b.sigma_normalized);
  CHECK(r.modes(1, 1) == 1.0);
  CHECK(r.total_energy == doctest::Approx(5.0));
}
