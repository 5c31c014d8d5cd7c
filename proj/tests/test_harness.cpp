#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "pemq/error.hpp"
#include "pemq/harness.hpp"
#include "pemq/io.hpp"
#include "pemq/vem.hpp"

using namespace pemq;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = PEMQ_FIXTURES;
const fs::path kGrid = kFixtures / "meshes/grid9.off";

SolverSpec script(const std::string& name, double timeout = 20.0) {
  SolverSpec s;
  s.command = (kFixtures / "solvers" / name).string() + " {mesh} {outdir}";
  s.timeout_s = timeout;
  return s;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "pemq_harness_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("solver spec validation") {
  SolverSpec s;
  s.command = "solver {mesh}";
  CHECK_THROWS_AS(validate(s), ValidationError);
  s.command = "solver {mesh} {outdir}";
  CHECK_NOTHROW(validate(s));
  s.timeout_s = 0;
  CHECK_THROWS_AS(validate(s), ValidationError);
  CHECK(parse_run_status("protocol_error") == RunStatus::protocol_error);
  CHECK(to_string(RunStatus::timeout) == "timeout");
  CHECK_THROWS_AS(parse_run_status("ok"), ValidationError);
  CHECK(mesh_stem("a/b/mesh-007.off") == "mesh-007");
}

TEST_CASE("protocol files") {
  const auto d = fresh_dir("protocol");
  write_field(d / "f.txt", {1.0, 0.1, -3e-300});
  const auto back = read_field(d / "f.txt");
  REQUIRE(back.size() == 3);
  CHECK(back[1] == 0.1);  // 17 significant digits round-trip
  CHECK(back[2] == -3e-300);
  {
    std::ofstream os(d / "bad.txt");
    os << "1\n2\nthree\n";
  }
  CHECK_THROWS_WITH_AS(read_field(d / "bad.txt"), doctest::Contains("line 3"), ProtocolError);
  {
    std::ofstream os(d / "two.txt");
    os << "1 2\n";
  }
  CHECK_THROWS_AS(read_field(d / "two.txt"), ProtocolError);
  {
    std::ofstream os(d / "nan.txt");
    os << "nan\n";
  }
  CHECK_THROWS_AS(read_scalar(d / "nan.txt"), ProtocolError);
  {
    std::ofstream os(d / "empty.txt");
  }
  CHECK_THROWS_AS(read_scalar(d / "empty.txt"), ProtocolError);
}

TEST_CASE("run_solver outcomes") {
  REQUIRE(read_mesh(kGrid).num_vertices() == 9);
  SUBCASE("success with performance discovery") {
    const auto d = fresh_dir("ok");
    const auto r = run_solver(script("ok.sh"), kGrid, d);
    CHECK(r.status == RunStatus::success);
    CHECK(r.vertex_count == 9);
    REQUIRE(r.solution.size() == 9);
    CHECK(r.solution[8] == 9.0);
    REQUIRE(r.ground_truth.has_value());
    CHECK(r.performances.size() == 2);
    CHECK(r.performances.at("condition-number") == 42.0);
    CHECK(r.performances.at("iterations") == 7.5);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(d / "grid9.stdout.log"));
  }
  SUBCASE("non-zero exit") {
    const auto r = run_solver(script("fail.sh"), kGrid, fresh_dir("fail"));
    CHECK(r.status == RunStatus::failed);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("solver blew up") != std::string::npos);
  }
  SUBCASE("timeout") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_solver(script("slow.sh", 0.3), kGrid, fresh_dir("slow"));
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.status == RunStatus::timeout);
    CHECK(dt < 5.0);
  }
  SUBCASE("missing solution") {
    const auto r = run_solver(script("no_solution.sh"), kGrid, fresh_dir("nosol"));
    CHECK(r.status == RunStatus::protocol_error);
    CHECK(r.message.find("grid9-solution.txt") != std::string::npos);
  }
  SUBCASE("field length differs from vertex count") {
    const auto r = run_solver(script("short_field.sh"), kGrid, fresh_dir("short"));
    CHECK(r.status == RunStatus::protocol_error);
    CHECK(r.message.find("5 values") != std::string::npos);
    CHECK(r.solution.empty());
  }
  SUBCASE("stale outputs are not picked up") {
    const auto d = fresh_dir("stale");
    write_field(d / "grid9-solution.txt", std::vector<double>(9, 1.0));
    write_scalar(d / "grid9-old.txt", 3.0);
    const auto r = run_solver(script("no_solution.sh"), kGrid, d);
    CHECK(r.status == RunStatus::protocol_error);
    CHECK_FALSE(fs::exists(d / "grid9-old.txt"));
  }
  SUBCASE("paths with spaces are quoted") {
    const auto d = fresh_dir("with space");
    const auto mesh = d / "my mesh.off";
    fs::copy_file(kGrid, mesh);
    const auto r = run_solver(script("ok.sh"), mesh, d / "out dir");
    CHECK(r.status == RunStatus::success);
  }
  SUBCASE("unreadable mesh throws") {
    CHECK_THROWS_AS(run_solver(script("ok.sh"), kFixtures / "meshes/none.off", fresh_dir("none")), Error);
  }
}

TEST_CASE("run_dataset") {
  const auto d = fresh_dir("dataset");
  std::vector<fs::path> meshes;
  for (const char* n : {"m-a.off", "m-b.off", "m-c.off"}) {
    fs::copy_file(kGrid, d / n);
    meshes.push_back(d / n);
  }
  for (int jobs : {1, 3}) {
    const auto runs = run_dataset(script("fail_on_b.sh"), meshes, d / ("out" + std::to_string(jobs)), jobs);
    REQUIRE(runs.size() == 3);
    CHECK(runs[0].status == RunStatus::success);
    CHECK(runs[1].status == RunStatus::failed);
    CHECK(runs[2].status == RunStatus::success);
    CHECK(runs[0].mesh == meshes[0]);
    CHECK(runs[2].mesh == meshes[2]);
    CHECK(fs::exists(d / ("out" + std::to_string(jobs)) / "m-c" / "m-c-solution.txt"));
  }
  CHECK_THROWS_AS(run_dataset(script("ok.sh"), {}, d / "empty"), ValidationError);
}

TEST_CASE("built-in VEM solver through the protocol") {
  const auto d = fresh_dir("vem");
  SolverSpec s;
  s.command = std::string(PEMQ_VEM_BIN) + " {mesh} {outdir}";
  const auto r1 = run_solver(s, kGrid, d / "1");
  const auto r2 = run_solver(s, kGrid, d / "2");
  REQUIRE(r1.status == RunStatus::success);
  CHECK(r1.performances.size() == 3);
  CHECK(r1.performances.count("condition-number") == 1);
  CHECK(r1.performances.count("energy-error") == 1);
  CHECK(r1.performances.count("linf-error") == 1);
  // bit-identical when repeated
  CHECK(r1.solution == r2.solution);
  CHECK(r1.performances == r2.performances);
  const auto direct = solve_poisson(read_mesh(kGrid));
  CHECK(r1.solution == direct.u_h);
  CHECK(r1.performances.at("linf-error") == direct.eps_inf);

  // meshes outside the unit square are rejected with a non-zero exit
  const auto bad = run_solver(s, kFixtures / "meshes/triangle.off", d / "3");
  CHECK(bad.status == RunStatus::failed);
  CHECK(bad.stderr_text.find("unit square") != std::string::npos);
}
