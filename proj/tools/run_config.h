/* Copyright 2026 The dsmgibbs Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DSMGIBBS_TOOLS_RUN_CONFIG_H_
#define DSMGIBBS_TOOLS_RUN_CONFIG_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace dsmgibbs::cli {

// Everything a command can be told. Loaded from JSON, then overridden by
// flags; the resolved value of every field a command reads is echoed back.
struct RunConfig {
  // Where the resolved config is echoed; empty means the directory of
  // io.out.
  std::string output_dir;

  struct Io {
    std::string data;
    std::string model = "analytic:mog";
    std::string posterior_net;
    std::string a;
    std::string b;
    std::string samples;
    std::string out;
    std::string loss_trace;
  } io;

  struct Dataset {
    std::string kind = "mog4";
    std::int64_t n = 10000;
    std::uint64_t seed = 0;
    double mog_std = 0.2;
    double ring_inner = 0.5;
    double ring_outer = 1.0;
    double ring_jitter = 0.025;
    double roll_t_min = 1.5 * std::numbers::pi;
    double roll_t_max = 4.5 * std::numbers::pi;
    double roll_scale = 1.0;
    double roll_jitter = 0.025;
  } dataset;

  struct Train {
    std::string objective = "dsm";
    std::string parameterization = "energy";
    double sigma = 0.2;
    // "" or geometric:sigma_max,sigma_min,K
    std::string schedule;
    std::vector<double> hidden = {400, 400, 400};
    std::int64_t epochs = 100;
    std::int64_t batch_size = 100;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    double divergence_floor = -1e6;
  } train;

  struct Chain {
    // full | diag:S | iso | learned
    std::string posterior = "full";
    std::int64_t steps = 10000;
    std::int64_t chains = 1;
    double sigma = 0.2;
    double init_std = std::sqrt(0.1);
    std::int64_t thinning = 1;
    std::int64_t burn_in = 0;
    std::uint64_t seed = 0;
    double clamp = 1e-6;
    std::int64_t iso_samples = 10000;
  } chain;

  struct Multilevel {
    std::string schedule = "geometric:1,0.05,10";
    std::string posterior = "diag";
    std::int64_t gibbs_steps = 3;
    std::int64_t rademacher = 3;
    std::int64_t chains = 1000;
    std::uint64_t seed = 0;
    bool final_denoise = true;
    double clamp = 1e-6;
  } multilevel;

  struct Eval {
    std::vector<double> bandwidths = {0.25, 0.5, 1, 2, 4};
    std::uint64_t seed = 0;
  } eval;

  struct Grid {
    double sigma = 0.2;
    std::vector<double> xtilde = {0.8, 0.9};
    std::string posterior = "full";
    double lower = -2.0;
    double upper = 2.0;
    std::int64_t nodes = 401;
    std::uint64_t seed = 0;
  } grid;

  struct Plot {
    std::int64_t size = 600;
    double marker_radius = 1.5;
    double opacity = 0.5;
  } plot;
};

using FieldRef = std::variant<std::int64_t*, std::uint64_t*, double*, bool*, std::string*,
                              std::vector<double>*>;

struct Field {
  std::string path;  // "section.key", or "key" at top level
  FieldRef ref;
};

// Every field of `config`, pointing into it.
std::vector<Field> all_fields(RunConfig& config);

// Applies a JSON document. Unknown keys and type mismatches raise
// ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& doc);
void apply_json_file(RunConfig& config, const std::string& path);

// Parses a flag value into the field at `path`.
void apply_flag(RunConfig& config, const std::string& path, const std::string& value);

// JSON object holding the given sections ("chain") or single fields
// ("io.out"), plus the top-level fields.
nlohmann::json to_json(RunConfig& config, const std::vector<std::string>& sections);

}  // namespace dsmgibbs::cli

#endif  // DSMGIBBS_TOOLS_RUN_CONFIG_H_
