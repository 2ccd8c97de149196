#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psgla/geometry.h"
#include "psgla/io.h"
#include "psgla/oracle.h"
#include "psgla/types.h"

namespace psgla {

struct BodySpec {
  std::string kind = "box";  // ball | box | polytope
  Vector center;             // ball
  double radius = 1.0;
  Vector lower;              // box
  Vector upper;
  Matrix A;                  // polytope
  Vector b;
  double diameter = 0.0;
  double inradius = 0.0;
};

struct NoiseSpec {
  std::string kind = "zero";  // zero | gaussian | uniform | data
  double sigma = 0.0;
  double halfwidth = 0.0;
  Matrix rows;
};

struct LossSpec {
  std::string kind = "double_well";  // quadratic | double_well | linear | trigonometric
  double curvature = 1.0;
  Vector coefficients;
  int terms = 4;
  double max_frequency = 2.0;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> known_minimum;
  NoiseSpec noise;
};

struct SamplerSpec {
  std::optional<double> eta = 0.01;  // nullopt: "auto"
  std::optional<double> beta = 1.0;  // nullopt: "auto"
  long steps = 1000;
  int chains = 1;
  int substeps = 1;
  std::string init = "origin";  // origin | uniform
  std::optional<Vector> x0;
};

struct ConvergeSpec {
  std::vector<long> checkpoints{16, 64, 256, 1024, 4096};
  long ground_truth = 100000;
  int bootstrap = 1000;
  double confidence = 0.95;
  double max_exponent = -0.15;
  int directions = 64;
};

struct CoupleSpec {
  long replicates = 2000;
  long horizon = 500;
  std::string kind = "reflection_maximal";  // reflection | reflection_maximal
  int grid_points = 20;
  int bootstrap = 1000;
  double confidence = 0.95;
  bool identical_start = false;
  std::optional<double> a;  // nullopt: from contraction_constants
  std::optional<double> distance_ratio = 0.05;  // final/initial mean distance limit
  bool keep_distances = false;
};

struct TuneSpec {
  double epsilon = 0.1;
  double lambda = 0.5;
  double delta = 0.1;
  long max_steps = 1000000;
  bool run = false;
  int chains = 1000;
  long ground_truth = 100000;
  int bootstrap = 1000;
};

// One experiment. Every field has an explicit default and is written back by
// to_json, so a serialized config fully determines a run.
struct ExperimentConfig {
  std::string experiment = "sample";  // sample | converge | couple | constants | tune
  std::uint64_t seed = 0;
  BodySpec body;
  LossSpec loss;
  SamplerSpec sampler;
  ConvergeSpec converge;
  CoupleSpec couple;
  TuneSpec tune;
};

// Throws ConfigError naming the offending field ("sampler.eta"). Unknown keys
// are errors. A manifest (an object with a "config" member) is accepted too.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& c);

ConvexBody build_body(const BodySpec& spec);
LossPtr build_loss(const LossSpec& spec, const ConvexBody& body);

}  // namespace psgla
