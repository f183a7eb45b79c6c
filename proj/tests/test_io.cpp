#include "mvamp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mvamp/state_evolution.hpp"

using namespace mvamp;

TEST_CASE("CsvWriter: header, comment line, fixed formatting") {
  std::ostringstream out;
  CsvWriter csv(out, "{\"k\":1}", {"a", "b"});
  csv.row({1.0, 0.25});
  csv.row({-3.5, 1e-9});
  const std::string s = out.str();
  CHECK(s == "# mvamp-csv v1 {\"k\":1}\na,b\n1,0.25\n-3.5,1e-09\n");
  CHECK_THROWS_AS(csv.row({1.0}), ParameterError);
}

TEST_CASE("JsonObject: stable field order and escaping") {
  const std::string s = JsonObject()
                            .field("name", std::string("a\"b"))
                            .field("x", 1.5)
                            .field("n", std::int64_t{42})
                            .field("ok", true)
                            .field_array("v", {1.0, 2.0})
                            .str();
  CHECK(s == "{\"name\":\"a\\\"b\",\"x\":1.5,\"n\":42,\"ok\":true,\"v\":[1,2]}");
}

TEST_CASE("population and edge dumps round numbers") {
  const auto pop = sample_population(PriorSpec::multilayer(2, 0.2), 5, 3);
  std::ostringstream nodes;
  write_population_csv(nodes, pop, "{}");
  int lines = 0;
  for (char c : nodes.str())
    if (c == '\n') lines += 1;
  CHECK(lines == 2 + 5 * 2);

  const auto g = sample_graphs(pop, {{5.0, 5.0}, {0.0, 0.0}}, 9);
  std::ostringstream edges;
  write_edges_csv(edges, g, "{}");
  int edge_lines = -2;
  for (char c : edges.str())
    if (c == '\n') edge_lines += 1;
  CHECK(edge_lines == g.layers[0].edge_count);
}

TEST_CASE("raw spiked dump with sidecar") {
  const auto pop = sample_population(PriorSpec::multilayer(1, 0.1), 6, 5);
  const auto views = sample_spiked(pop, {0.7}, 11);
  const std::string path = "/tmp/mvamp_test_views.bin";
  write_spiked_raw(path, views, 11);

  std::ifstream bin(path, std::ios::binary);
  REQUIRE(bin.good());
  std::vector<double> buf(36);
  bin.read(reinterpret_cast<char*>(buf.data()), 36 * sizeof(double));
  CHECK(bin.gcount() == 36 * static_cast<std::streamsize>(sizeof(double)));
  for (std::int64_t i = 0; i < 6; ++i)
    for (std::int64_t j = 0; j < 6; ++j) CHECK(buf[i * 6 + j] == views.views[0](i, j));

  std::ifstream side(path + ".json");
  std::stringstream ss;
  ss << side.rdbuf();
  CHECK(ss.str().find("\"n\":6") != std::string::npos);
  CHECK(ss.str().find("\"lambdas\":[0.7]") != std::string::npos);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}

TEST_CASE("snapshot raw dump carries every recorded step") {
  AmpTrajectory traj;
  traj.n = 2;
  traj.layers = 2;
  traj.snapshots = {{0, {1.0, 2.0, 3.0, 4.0}}, {5, {9.0, 8.0, 7.0, 6.0}}};
  const std::string path = "/tmp/mvamp_test_snaps.bin";
  write_snapshots_raw(path, traj);
  std::ifstream bin(path, std::ios::binary);
  std::vector<double> buf(8);
  bin.read(reinterpret_cast<char*>(buf.data()), 8 * sizeof(double));
  CHECK(buf == std::vector<double>{1, 2, 3, 4, 9, 8, 7, 6});
  std::ifstream side(path + ".json");
  std::stringstream ss;
  ss << side.rdbuf();
  CHECK(ss.str().find("\"steps\":[0,5]") != std::string::npos);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}

TEST_CASE("fixed point and ray scan CSV layouts") {
  FixedPointResult fp;
  fp.history = {Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 0.25)};
  std::ostringstream out;
  write_fixed_point_csv(out, fp, "{}");
  CHECK(out.str() == "# mvamp-csv v1 {}\niteration,layer,value,stderr\n0,0,0.5,0\n1,0,0.25,0\n");

  RayScan scan;
  scan.t_grid = Eigen::Vector2d(0.0, 1.0);
  scan.values = Eigen::MatrixXd::Constant(2, 1, 0.3);
  scan.std_errors = Eigen::MatrixXd::Constant(2, 1, 0.01);
  std::ostringstream sout;
  write_ray_scan_csv(sout, scan, "{}");
  CHECK(sout.str() ==
        "# mvamp-csv v1 {}\nt,layer,value,stderr\n0,0,0.3,0.01\n1,0,0.3,0.01\n");
}

TEST_CASE("matrix layout rows follow axis1") {
  std::ostringstream out;
  write_matrix_layout(out, {1.0, 2.0}, {1.0, 2.0, 3.0}, {1, 2, 3, 4, 5, 6});
  CHECK(out.str() == "1 2 3\n4 5 6\n");
  CHECK_THROWS_AS(write_matrix_layout(out, {1.0}, {1.0}, {1, 2}), ParameterError);
}

TEST_CASE("trajectory export layout") {
  AmpTrajectory traj;
  traj.n = 3;
  traj.layers = 2;
  traj.overlaps = {Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.4, 0.5)};
  traj.onsager = {Eigen::Vector2d(0.9, 0.8)};
  std::ostringstream out;
  write_trajectory_csv(out, traj, "{}");
  CHECK(out.str() ==
        "# mvamp-csv v1 {}\nt,layer,overlap,onsager\n"
        "0,0,0.1,0\n0,1,0.1,0\n1,0,0.4,0.9\n1,1,0.5,0.8\n");
}
