#include <doctest.h>

#include "nlsrom/integrate.hpp"
#include "nlsrom/linalg/svd.hpp"
#include "nlsrom/pod.hpp"
#include "nlsrom/rom.hpp"

using namespace nlsrom;

namespace {

const integrate::Trajectory& trajectory(const std::string& preset) {
  static std::map<std::string, integrate::Trajectory> cache;
  auto it = cache.find(preset);
  if (it == cache.end()) it = cache.emplace(preset, integrate::simulate(model::preset_problem(preset), {})).first;
  return it->second;
}

std::vector<double> rom_errors(const std::string& preset, const std::vector<std::size_t>& ls) {
  const auto spec = model::preset_problem(preset);
  const auto& tr = trajectory(preset);
  const auto ip = pod::InnerProductSpec::uniform(spec.grid.points(), tr.snapshots());
  std::vector<pod::PodBasis> bases;
  for (const auto& y : tr.components) bases.push_back(pod::compute_pod(y, ip, ls.back()));
  std::vector<double> out;
  for (std::size_t l : ls) {
    std::vector<pod::PodBasis> bl;
    for (const auto& b : bases) bl.push_back(b.truncated(l));
    const auto sys = rom::build_reduced(spec, bl, ip);
    const auto red = rom::integrate_rom(sys, model::initial_state(spec), spec.t_final, spec.dt, {});
    out.push_back(rom::rom_error(tr, red, sys));
    MESSAGE(preset << " l = " << l << " rom_error = " << out.back());
  }
  return out;
}

}  // namespace

TEST_CASE("reference: 1D snapshot matrix has numerical rank 15") {
  const auto& y = trajectory("nls1d").components[0];
  CHECK(y.cols() == 50001);
  CHECK(linalg::numerical_rank(y) == 15);
}

TEST_CASE("reference: deterministic SVD of the 1D snapshots reconstructs to 1e-12") {
  const auto& y = trajectory("nls1d").components[0];
  const auto s = linalg::svd(y);
  CHECK(linalg::reconstruction_error(y, s) <= 1e-12);
}

TEST_CASE("reference: randomized SVD of the 1D snapshots at rank 15 reconstructs to 1e-10") {
  const auto& y = trajectory("nls1d").components[0];
  CHECK(linalg::reconstruction_error(y, linalg::randomized_svd(y, 15)) <= 1e-10);
}

TEST_CASE("reference: 1D rom_error improves from three to four modes") {
  const auto e = rom_errors("nls1d", {3, 4});
  CHECK(e[1] < e[0]);
}

TEST_CASE("reference: rom_error is nonincreasing in l on the 1D and coupled presets") {
  for (const auto& [preset, ls] : std::vector<std::pair<std::string, std::vector<std::size_t>>>{
           {"nls1d", {1, 2, 3, 4, 5, 6, 7, 8}}, {"cnls", {2, 3, 4, 5}}}) {
    const auto e = rom_errors(preset, ls);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK_MESSAGE(e[i] <= e[i - 1] + 1e-12, preset << " l = " << ls[i]);
  }
}
