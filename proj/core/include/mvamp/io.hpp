#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mvamp/amp.hpp"
#include "mvamp/models.hpp"
#include "mvamp/state_evolution.hpp"

namespace mvamp {

// Versioned CSV writer. Every file starts with a comment line
//   # mvamp-csv v1 <spec-json>
// followed by the header row. Numeric formatting is fixed (%.12g) so equal
// runs produce byte-identical bodies.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::string& spec_json,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  static std::string format(double v);

 private:
  std::ostream* out_;
  std::size_t columns_;
};

// Tiny JSON object builder for manifests and CSV spec headers; flat
// key/value only, insertion order preserved.
class JsonObject {
 public:
  JsonObject& field(const std::string& key, double v);
  JsonObject& field(const std::string& key, std::int64_t v);
  JsonObject& field(const std::string& key, int v) { return field(key, static_cast<std::int64_t>(v)); }
  JsonObject& field(const std::string& key, std::uint64_t v);
  JsonObject& field(const std::string& key, const std::string& v);
  JsonObject& field(const std::string& key, bool v);
  JsonObject& field_array(const std::string& key, const std::vector<double>& v);
  JsonObject& field_raw(const std::string& key, const std::string& raw);
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

// Population dump: (node_id, layer, x) rows.
void write_population_csv(std::ostream& out, const LatentPopulation& pop,
                          const std::string& spec_json);
// Edge list dump: (layer, i, j) rows over i < j.
void write_edges_csv(std::ostream& out, const MultiViewGraph& g, const std::string& spec_json);
// Trajectory dump: (t, layer, overlap, onsager).
void write_trajectory_csv(std::ostream& out, const AmpTrajectory& traj,
                          const std::string& spec_json);

// Raw little-endian doubles, row-major, L matrices of n x n back to back,
// with a JSON sidecar (n, L, lambdas, seed) at path + ".json".
void write_spiked_raw(const std::string& path, const SpikedViews& views, std::uint64_t seed);

// Recorded m snapshots in the same raw format (each snapshot an n x L
// row-major block), sidecar lists the step indices.
void write_snapshots_raw(const std::string& path, const AmpTrajectory& traj);

// Scan / fixed-point results: (t-or-iteration, layer, value, stderr).
void write_ray_scan_csv(std::ostream& out, const RayScan& scan, const std::string& spec_json);
void write_fixed_point_csv(std::ostream& out, const FixedPointResult& fp,
                           const std::string& spec_json);

// gnuplot matrix-mode layout: one row per axis1 value, columns follow axis2.
void write_matrix_layout(std::ostream& out, const std::vector<double>& axis1,
                         const std::vector<double>& axis2, const std::vector<double>& cells);

}  // namespace mvamp
