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

#include "run_config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "dsmgibbs/errors.h"

namespace dsmgibbs::cli {
namespace {

using nlohmann::json;

Field* find_field(std::vector<Field>& fields, const std::string& path) {
  for (Field& f : fields) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

template <typename T>
T parse_integer(const std::string& path, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(path + ": expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& path, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError(path + ": expected a number, got '" + text + "'");
  }
  return value;
}

void set_from_json(const std::string& path, FieldRef ref, const json& v) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
          *p = v.get<std::int64_t>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          if (!v.is_number_unsigned()) throw ConfigError(path + ": expected a nonnegative integer");
          *p = v.get<std::uint64_t>();
        } else if constexpr (std::is_same_v<T, double>) {
          if (!v.is_number()) throw ConfigError(path + ": expected a number");
          *p = v.get<double>();
        } else if constexpr (std::is_same_v<T, bool>) {
          if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
          *p = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) throw ConfigError(path + ": expected a string");
          *p = v.get<std::string>();
        } else {
          if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
          std::vector<double> out;
          for (const json& e : v) {
            if (!e.is_number()) throw ConfigError(path + ": expected an array of numbers");
            out.push_back(e.get<double>());
          }
          *p = std::move(out);
        }
      },
      ref);
}

json field_json(FieldRef ref) {
  return std::visit([](auto* p) { return json(*p); }, ref);
}

}  // namespace

std::vector<Field> all_fields(RunConfig& c) {
  return {
      {"output_dir", &c.output_dir},

      {"io.data", &c.io.data},
      {"io.model", &c.io.model},
      {"io.posterior_net", &c.io.posterior_net},
      {"io.a", &c.io.a},
      {"io.b", &c.io.b},
      {"io.samples", &c.io.samples},
      {"io.out", &c.io.out},
      {"io.loss_trace", &c.io.loss_trace},

      {"dataset.kind", &c.dataset.kind},
      {"dataset.n", &c.dataset.n},
      {"dataset.seed", &c.dataset.seed},
      {"dataset.mog_std", &c.dataset.mog_std},
      {"dataset.ring_inner", &c.dataset.ring_inner},
      {"dataset.ring_outer", &c.dataset.ring_outer},
      {"dataset.ring_jitter", &c.dataset.ring_jitter},
      {"dataset.roll_t_min", &c.dataset.roll_t_min},
      {"dataset.roll_t_max", &c.dataset.roll_t_max},
      {"dataset.roll_scale", &c.dataset.roll_scale},
      {"dataset.roll_jitter", &c.dataset.roll_jitter},

      {"train.objective", &c.train.objective},
      {"train.parameterization", &c.train.parameterization},
      {"train.sigma", &c.train.sigma},
      {"train.schedule", &c.train.schedule},
      {"train.hidden", &c.train.hidden},
      {"train.epochs", &c.train.epochs},
      {"train.batch_size", &c.train.batch_size},
      {"train.learning_rate", &c.train.learning_rate},
      {"train.beta1", &c.train.beta1},
      {"train.beta2", &c.train.beta2},
      {"train.epsilon", &c.train.epsilon},
      {"train.seed", &c.train.seed},
      {"train.divergence_floor", &c.train.divergence_floor},

      {"chain.posterior", &c.chain.posterior},
      {"chain.steps", &c.chain.steps},
      {"chain.chains", &c.chain.chains},
      {"chain.sigma", &c.chain.sigma},
      {"chain.init_std", &c.chain.init_std},
      {"chain.thinning", &c.chain.thinning},
      {"chain.burn_in", &c.chain.burn_in},
      {"chain.seed", &c.chain.seed},
      {"chain.clamp", &c.chain.clamp},
      {"chain.iso_samples", &c.chain.iso_samples},

      {"multilevel.schedule", &c.multilevel.schedule},
      {"multilevel.posterior", &c.multilevel.posterior},
      {"multilevel.gibbs_steps", &c.multilevel.gibbs_steps},
      {"multilevel.rademacher", &c.multilevel.rademacher},
      {"multilevel.chains", &c.multilevel.chains},
      {"multilevel.seed", &c.multilevel.seed},
      {"multilevel.final_denoise", &c.multilevel.final_denoise},
      {"multilevel.clamp", &c.multilevel.clamp},

      {"eval.bandwidths", &c.eval.bandwidths},
      {"eval.seed", &c.eval.seed},

      {"grid.sigma", &c.grid.sigma},
      {"grid.xtilde", &c.grid.xtilde},
      {"grid.posterior", &c.grid.posterior},
      {"grid.lower", &c.grid.lower},
      {"grid.upper", &c.grid.upper},
      {"grid.nodes", &c.grid.nodes},
      {"grid.seed", &c.grid.seed},

      {"plot.size", &c.plot.size},
      {"plot.marker_radius", &c.plot.marker_radius},
      {"plot.opacity", &c.plot.opacity},
  };
}

void apply_json(RunConfig& config, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<Field> fields = all_fields(config);
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) {
      for (const auto& [sub, v] : value.items()) {
        const std::string path = key + "." + sub;
        Field* f = find_field(fields, path);
        if (f == nullptr) throw ConfigError("unknown config key '" + path + "'");
        set_from_json(path, f->ref, v);
      }
    } else {
      Field* f = find_field(fields, key);
      if (f == nullptr) throw ConfigError("unknown config key '" + key + "'");
      set_from_json(key, f->ref, value);
    }
  }
}

void apply_json_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what(), 0);
  }
  apply_json(config, doc);
}

void apply_flag(RunConfig& config, const std::string& path, const std::string& value) {
  std::vector<Field> fields = all_fields(config);
  Field* f = find_field(fields, path);
  if (f == nullptr) throw InternalError("flag bound to unknown field '" + path + "'");
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, std::uint64_t>) {
          *p = parse_integer<T>(path, value);
        } else if constexpr (std::is_same_v<T, double>) {
          *p = parse_real(path, value);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            *p = true;
          } else if (value == "false" || value == "0") {
            *p = false;
          } else {
            throw ConfigError(path + ": expected true or false, got '" + value + "'");
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          *p = value;
        } else {
          std::vector<double> out;
          std::stringstream ss(value);
          std::string item;
          while (std::getline(ss, item, ',')) out.push_back(parse_real(path, item));
          *p = std::move(out);
        }
      },
      f->ref);
}

json to_json(RunConfig& config, const std::vector<std::string>& sections) {
  json doc = json::object();
  for (const Field& f : all_fields(config)) {
    const std::size_t dot = f.path.find('.');
    if (dot == std::string::npos) {
      doc[f.path] = field_json(f.ref);
      continue;
    }
    const std::string section = f.path.substr(0, dot);
    if (std::find(sections.begin(), sections.end(), section) == sections.end() &&
        std::find(sections.begin(), sections.end(), f.path) == sections.end()) {
      continue;
    }
    doc[section][f.path.substr(dot + 1)] = field_json(f.ref);
  }
  return doc;
}

}  // namespace dsmgibbs::cli
