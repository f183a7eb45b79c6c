#include "mvamp/io.hpp"

#include <cstdio>
#include <fstream>

#include "mvamp/common.hpp"

namespace mvamp {

CsvWriter::CsvWriter(std::ostream& out, const std::string& spec_json,
                     const std::vector<std::string>& columns)
    : out_(&out), columns_(columns.size()) {
  *out_ << "# mvamp-csv v1 " << spec_json << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) *out_ << ",";
    *out_ << columns[i];
  }
  *out_ << "\n";
}

std::string CsvWriter::format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw ParameterError("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) *out_ << ",";
    *out_ << format(values[i]);
  }
  *out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { *out_ << line << "\n"; }

namespace {
std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}
}  // namespace

JsonObject& JsonObject::field(const std::string& key, double v) {
  fields_.emplace_back(key, CsvWriter::format(v));
  return *this;
}
JsonObject& JsonObject::field(const std::string& key, std::int64_t v) {
  fields_.emplace_back(key, std::to_string(v));
  return *this;
}
JsonObject& JsonObject::field(const std::string& key, std::uint64_t v) {
  fields_.emplace_back(key, std::to_string(v));
  return *this;
}
JsonObject& JsonObject::field(const std::string& key, const std::string& v) {
  fields_.emplace_back(key, "\"" + json_escape(v) + "\"");
  return *this;
}
JsonObject& JsonObject::field(const std::string& key, bool v) {
  fields_.emplace_back(key, v ? "true" : "false");
  return *this;
}
JsonObject& JsonObject::field_array(const std::string& key, const std::vector<double>& v) {
  std::string arr = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) arr += ",";
    arr += CsvWriter::format(v[i]);
  }
  arr += "]";
  fields_.emplace_back(key, arr);
  return *this;
}
JsonObject& JsonObject::field_raw(const std::string& key, const std::string& raw) {
  fields_.emplace_back(key, raw);
  return *this;
}
std::string JsonObject::str() const {
  std::string out = "{";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (i) out += ",";
    out += "\"" + json_escape(fields_[i].first) + "\":" + fields_[i].second;
  }
  return out + "}";
}

void write_population_csv(std::ostream& out, const LatentPopulation& pop,
                          const std::string& spec_json) {
  CsvWriter csv(out, spec_json, {"node_id", "layer", "x"});
  for (std::int64_t i = 0; i < pop.n; ++i)
    for (int l = 0; l < pop.layers(); ++l)
      csv.row({static_cast<double>(i), static_cast<double>(l), static_cast<double>(pop.x_at(i, l))});
}

void write_edges_csv(std::ostream& out, const MultiViewGraph& g, const std::string& spec_json) {
  CsvWriter csv(out, spec_json, {"layer", "i", "j"});
  for (int l = 0; l < g.num_layers(); ++l) {
    const LayerGraph& lg = g.layers[l];
    for (std::int64_t i = 0; i < g.n; ++i)
      for (std::int64_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
        const std::int64_t j = lg.neighbors[e];
        if (j > i) csv.row({static_cast<double>(l), static_cast<double>(i), static_cast<double>(j)});
      }
  }
}

void write_trajectory_csv(std::ostream& out, const AmpTrajectory& traj,
                          const std::string& spec_json) {
  CsvWriter csv(out, spec_json, {"t", "layer", "overlap", "onsager"});
  for (std::size_t t = 0; t < traj.overlaps.size(); ++t)
    for (int l = 0; l < traj.layers; ++l)
      csv.row({static_cast<double>(t), static_cast<double>(l), traj.overlaps[t](l),
               t >= 1 && t - 1 < traj.onsager.size() ? traj.onsager[t - 1](l) : 0.0});
}

void write_snapshots_raw(const std::string& path, const AmpTrajectory& traj) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw ParameterError("write_snapshots_raw: cannot open " + path);
  std::vector<double> steps;
  for (const auto& [t, m] : traj.snapshots) {
    steps.push_back(static_cast<double>(t));
    bin.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  std::ofstream side(path + ".json");
  side << JsonObject()
              .field("n", static_cast<std::int64_t>(traj.n))
              .field("L", static_cast<std::int64_t>(traj.layers))
              .field_array("steps", steps)
              .str()
       << "\n";
}

void write_ray_scan_csv(std::ostream& out, const RayScan& scan, const std::string& spec_json) {
  CsvWriter csv(out, spec_json, {"t", "layer", "value", "stderr"});
  for (int g = 0; g < scan.t_grid.size(); ++g)
    for (int l = 0; l < scan.values.cols(); ++l)
      csv.row({scan.t_grid(g), static_cast<double>(l), scan.values(g, l), scan.std_errors(g, l)});
}

void write_fixed_point_csv(std::ostream& out, const FixedPointResult& fp,
                           const std::string& spec_json) {
  CsvWriter csv(out, spec_json, {"iteration", "layer", "value", "stderr"});
  for (std::size_t t = 0; t < fp.history.size(); ++t)
    for (int l = 0; l < fp.history[t].size(); ++l)
      csv.row({static_cast<double>(t), static_cast<double>(l), fp.history[t](l), 0.0});
}

void write_matrix_layout(std::ostream& out, const std::vector<double>& axis1,
                         const std::vector<double>& axis2, const std::vector<double>& cells) {
  if (cells.size() != axis1.size() * axis2.size())
    throw ParameterError("write_matrix_layout: cell count mismatch");
  for (std::size_t r = 0; r < axis1.size(); ++r) {
    for (std::size_t c = 0; c < axis2.size(); ++c) {
      if (c) out << " ";
      out << CsvWriter::format(cells[r * axis2.size() + c]);
    }
    out << "\n";
  }
}

void write_spiked_raw(const std::string& path, const SpikedViews& views, std::uint64_t seed) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw ParameterError("write_spiked_raw: cannot open " + path);
  for (const auto& a : views.views)
    for (std::int64_t i = 0; i < views.n; ++i)
      for (std::int64_t j = 0; j < views.n; ++j) {
        const double v = a(i, j);
        bin.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
  std::ofstream side(path + ".json");
  side << JsonObject()
              .field("n", static_cast<std::int64_t>(views.n))
              .field("L", static_cast<std::int64_t>(views.views.size()))
              .field_array("lambdas", views.lambdas)
              .field("seed", seed)
              .str()
       << "\n";
}

}  // namespace mvamp
