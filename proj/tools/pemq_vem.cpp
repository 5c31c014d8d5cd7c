// Built-in lowest-order VEM solver behind the external solver protocol:
//   pemq-vem <mesh> <outdir>
// writes <stem>-solution.txt, <stem>-ground-truth.txt and one file per
// performance (condition-number, energy-error, linf-error) into outdir.

#include <cstdio>
#include <filesystem>

#include "pemq/error.hpp"
#include "pemq/harness.hpp"
#include "pemq/io.hpp"
#include "pemq/vem.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: pemq-vem <mesh> <outdir>\n");
    return 2;
  }
  try {
    const fs::path mesh = argv[1], outdir = argv[2];
    const auto m = pemq::read_mesh(mesh);
    const auto r = pemq::solve_poisson(m);
    fs::create_directories(outdir);
    const auto stem = pemq::mesh_stem(mesh);
    pemq::write_field(outdir / (stem + "-solution.txt"), r.u_h);
    pemq::write_field(outdir / (stem + "-ground-truth.txt"), r.u);
    pemq::write_scalar(outdir / (stem + "-condition-number.txt"), r.kappa1.value);
    pemq::write_scalar(outdir / (stem + "-energy-error.txt"), r.eps_S);
    pemq::write_scalar(outdir / (stem + "-linf-error.txt"), r.eps_inf);
  } catch (const pemq::ValidationError& e) {
    std::fprintf(stderr, "pemq-vem: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pemq-vem: %s\n", e.what());
    return 1;
  }
  return 0;
}
