#pragma once

// Run configuration: a TOML subset (sections, `key = value`, strings, numbers,
// booleans, flat numeric arrays, `#` comments) mapped onto a fixed schema.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "relqm/grid.hpp"

namespace relqm::cli {

/// Malformed file, unknown key, wrong type or missing required key (exit 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Value = std::variant<double, bool, std::string, std::vector<double>>;

/// "section.key" -> value, in file order irrelevant.
std::map<std::string, Value> parse_toml(const std::string& text);

struct GridSpec {
  double length = 20.0;
  std::size_t points = 400;
  double courant = 0.5;  // dt / h
  double t_end = 4.0;
  std::size_t stride = 2;
  std::string boundary = "periodic";
};

struct PotentialSpec {
  std::string kind = "none";  // none | square_well | gaussian
  double depth = 0.0;
  double width = 1.0;
  double center = 0.0;
};

struct InitialSpec {
  std::string kind = "packet";  // packet | plane_wave
  double momentum = 1.0;
  double center = -2.0;
  double width = 1.0;
  int branch = 1;
};

struct StationarySpec {
  double e_min = 0.0;
  double e_max = 1.2;
};

struct TransformSpec {
  std::vector<double> weights{1.0};
  std::vector<double> x_mean{0.0};
  std::vector<double> x_sigma{1.0};
  std::vector<double> p_mean{0.3};
  std::vector<double> p_sigma{0.5};
  double separation = 0.8;
  double x_min = -5.0;
  double x_max = 5.0;
  std::size_t points = 101;
};

struct TrajectorySpec {
  std::vector<double> starts{-1.0, -0.5, 0.0, 0.5, 1.0};
  double tau_span = 3.0;
  double dtau = 0.05;
};

struct GravitySpec {
  double radius = 10.0;
  std::size_t cells = 100;
  double depth = 0.3;
  double width = 1.0;
  double relaxation = 0.5;
  double tolerance = 1e-11;
  std::size_t max_iterations = 50;
};

struct Tolerances {
  double charge = 1e-6;
  double residual = 1e-8;
  double consistency = 1.0;  // C in |p - grad S| <= C (dtau^4 + h^2)
  double order = 0.2;
};

struct RunConfig {
  std::string name = "default";
  std::string module = "verify-all";
  std::string output = "out";
  std::uint64_t seed = 20240611;
  Physics physics;
  GridSpec grid;
  PotentialSpec potential;
  InitialSpec initial;
  StationarySpec stationary;
  TransformSpec transform;
  TrajectorySpec trajectories;
  GravitySpec gravity;
  int levels = 4;
  Tolerances tolerances;
  std::string hash;  // git blob SHA-1 of the file bytes
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// SHA-1 of "blob <size>\0<bytes>", hex encoded.
std::string git_blob_hash(const std::string& bytes);

}  // namespace relqm::cli
