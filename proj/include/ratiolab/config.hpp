// Run configuration: a flat line-based `section.key = value` document with
// '#' comments, later keys overriding earlier ones, and strict validation
// (unknown keys and malformed values are rejected with their line number).
// Sections: [data], [model], [loss], [train], [output].

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ratiolab/nets.hpp"
#include "ratiolab/trainer.hpp"

namespace ratiolab {

struct RunConfig {
  // [data] — sources are "spec:<grammar>" or "csv:<path>"; gen_source may
  // also be "data" (generated batches mirror the data source).
  std::string data_source;
  std::string gen_source;

  // [model]
  int latent_dim = 2;
  std::vector<int> gen_hidden = {32, 32};
  std::vector<int> ratio_hidden = {32, 32};
  std::string head = "auto";  // auto | probability | positive | unconstrained
  std::string activation = "tanh";

  // [loss] + [train] live in the trainer config.
  TrainConfig train;

  // [output]
  std::string out_dir = "out";
  bool write_checkpoint = true;
  std::string recovery_grid = "-2:3:101";  // lo:hi:n for estimate-ratio
};

// Parses and validates; throws std::runtime_error mentioning the offending
// line number on unknown keys, bad values, or violated constraints.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Emits every known key in a fixed order; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Fixture grammar:
//   std:<dim>                      standard normal
//   gaussian:<m1,..>:<v1,..>       diagonal Gaussian (means / variances)
//   ring:<modes>:<radius>:<sigma>  equal-weight Gaussian ring in 2-D
DistSpec parse_dist_spec(const std::string& text);

// Real-valued CSV rows; a non-numeric first row is treated as a header.
Eigen::MatrixXd load_data_csv(const std::string& path);

// Builds the data source named by a source string ("spec:..." or "csv:...").
DataSource make_data_source(const std::string& source_text);

// "auto" resolves from the ratio loss family: scoring rules train a
// probability head, everything else a positive head.
Head resolve_head(const RunConfig& cfg);

struct GridSpec {
  double lo = 0.0, hi = 1.0;
  Eigen::Index n = 2;
};
GridSpec parse_grid(const std::string& text);  // "lo:hi:n"

}  // namespace ratiolab
