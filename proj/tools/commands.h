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

#ifndef DSMGIBBS_TOOLS_COMMANDS_H_
#define DSMGIBBS_TOOLS_COMMANDS_H_

#include <memory>
#include <string>
#include <vector>

#include "dsmgibbs/models.h"
#include "dsmgibbs/posterior.h"
#include "dsmgibbs/sampler.h"
#include "run_config.h"

namespace dsmgibbs::cli {

struct Command {
  std::string name;
  std::string help;
  // Config sections ("chain") and single fields ("io.out") the command
  // reads; each field gets a flag.
  std::vector<std::string> sections;
  int (*run)(RunConfig&);
};

const std::vector<Command>& commands();

// "analytic:mog" or a checkpoint path.
std::unique_ptr<EnergyModel> load_model(const std::string& spec);

// geometric:sigma_max,sigma_min,K
NoiseSchedule parse_schedule(const std::string& text);

// full | diag[:S] | iso | learned
PosteriorSpec parse_posterior(const std::string& text, double clamp);

// Echoes the resolved sections next to the outputs and returns the file path.
std::string echo_config(RunConfig& config, const std::string& command,
                        const std::vector<std::string>& sections);

// Writes an SVG scatter plot of 2D rows, colored by chain when present.
void write_scatter_svg(const std::string& samples_path, const RunConfig::Plot& style,
                       const std::string& out_path);

// Identity checks on the analytic mixture; returns the report lines and sets
// `all_pass`.
std::vector<std::string> verify_identities(bool& all_pass);

}  // namespace dsmgibbs::cli

#endif  // DSMGIBBS_TOOLS_COMMANDS_H_
