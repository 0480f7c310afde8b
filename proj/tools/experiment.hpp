#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "critlab/arms.hpp"
#include "critlab/loops.hpp"
#include "critlab/sle.hpp"
#include "critlab/spectral.hpp"
#include "record.hpp"

namespace critlab::cli {

inline const std::vector<std::string> kEngines{"percolation", "sle", "diffusion", "eigen1d", "backbone", "cardy"};

struct PercolationParams {
  bool stripCount = false;
  ArmEventSpec spec;
  double p = 0.5;
  long trials = 10000;
  std::vector<int> scales;
  double aspect = 1.0;  // rectangle width / height; the scale is the height
  bool weighted = false;
  bool checkMonotone = false;
};

struct SleParams {
  double kappa = 6.0;
  bool pathMode = false;
  LoopExponentParams loop;
  double horizon = 2.0;  // path mode
  EvolveOptions evolve;
};

struct DiffusionParams {
  double kappa = 6.0;
  LoopExponentParams loop;
  bool dtHalving = false;
};

struct Eigen1dParams {
  double kappa = 6.0;
  int n = 4095;
  Eigen1dOptions options;
};

struct BackboneParams {
  bool symmetric = false;
  std::vector<int> meshes;
  BackboneOptions options;
  double cardyLo = 0.01, cardyHi = 0.1;
};

struct CardyParams {
  bool rectangle = false;
  std::vector<double> points;  // m values or aspect ratios
  long trials = 0;             // rectangle Monte Carlo, 0 = formula only
  int height = 64;
  double p = 0.5;
};

using EngineParams = std::variant<PercolationParams, SleParams, DiffusionParams, Eigen1dParams, BackboneParams, CardyParams>;

struct ExperimentConfig {
  std::string engine;
  std::uint64_t seed = 1;
  int workers = 1;
  std::map<std::string, std::string> parameters;  // canonical, defaults filled in
  EngineParams params;
};

// Reads and validates every parameter; throws ConfigError / PreconditionError
// before any computation. The seed and worker overrides come from flags.
ExperimentConfig make_config(const std::string& engine, KeyValues values, std::optional<std::uint64_t> seed = {},
                             std::optional<int> workers = {});

// Non-convergence or refused extrapolation. Carries what was computed so far.
class RunFailure : public NumericalError {
 public:
  RunFailure(const std::string& what, ResultRecord partial) : NumericalError(what), partial_(std::move(partial)) {}
  const ResultRecord& partial() const { return partial_; }

 private:
  ResultRecord partial_;
};

ResultRecord run_experiment(const ExperimentConfig& config);

std::string artifact_version();

}  // namespace critlab::cli
