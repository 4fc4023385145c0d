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

// dsmgibbs: datasets -> training -> sampling -> evaluation from the shell.
//
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 numeric abort,
// 5 capability mismatch, 1 internal error. Failures print a single line
//   dsmgibbs: error code=<n> kind=<kind>: <message>
// on stderr.

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "dsmgibbs/errors.h"
#include "run_config.h"

namespace dsmgibbs::cli {
namespace {

int report(int code, const char* kind, std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::fprintf(stderr, "dsmgibbs: error code=%d kind=%s: %s\n", code, kind, message.c_str());
  return code;
}

bool selected(const std::vector<std::string>& sections, const std::string& path) {
  const std::string section = path.substr(0, path.find('.'));
  return std::find(sections.begin(), sections.end(), section) != sections.end() ||
         std::find(sections.begin(), sections.end(), path) != sections.end();
}

std::string flag_for(const std::string& path) {
  std::string key = path.substr(path.find('.') + 1);
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

struct Bound {
  const Command* command = nullptr;
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;  // field path -> flag text
  std::map<std::string, CLI::Option*> options;
};

int main_impl(int argc, char** argv) {
  CLI::App app{"Denoising score matching with moment-matched pseudo-Gibbs sampling", "dsmgibbs"};
  app.require_subcommand(1);
  std::vector<Bound> bound(commands().size());
  RunConfig scratch;
  const std::vector<Field> fields = all_fields(scratch);
  for (std::size_t i = 0; i < commands().size(); ++i) {
    const Command& cmd = commands()[i];
    Bound& b = bound[i];
    b.command = &cmd;
    b.app = app.add_subcommand(cmd.name, cmd.help);
    b.app->add_option("--config,--spec", b.config_path, "JSON config; flags override it");
    for (const Field& f : fields) {
      if (f.path != "output_dir" && !selected(cmd.sections, f.path)) continue;
      std::string names = flag_for(f.path);
      if (f.path == "train.learning_rate") names += ",--lr";
      b.options[f.path] = b.app->add_option(names, b.values[f.path], f.path);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(2, "config", e.what());
  }

  for (Bound& b : bound) {
    if (!b.app->parsed()) continue;
    try {
      RunConfig config;
      if (!b.config_path.empty()) apply_json_file(config, b.config_path);
      for (const auto& [path, option] : b.options) {
        if (option->count() > 0) apply_flag(config, path, b.values[path]);
      }
      std::vector<std::string> echoed = b.command->sections;
      echo_config(config, b.command->name, echoed);
      return b.command->run(config);
    } catch (const ConfigError& e) {
      return report(2, "config", e.what());
    } catch (const IoError& e) {
      return report(3, "io", e.what());
    } catch (const NumericError& e) {
      return report(4, "numeric", e.what());
    } catch (const CapabilityError& e) {
      return report(5, "capability", e.what());
    } catch (const std::exception& e) {
      return report(1, "internal", e.what());
    }
  }
  return report(1, "internal", "no subcommand ran");
}

}  // namespace
}  // namespace dsmgibbs::cli

int main(int argc, char** argv) { return dsmgibbs::cli::main_impl(argc, argv); }
