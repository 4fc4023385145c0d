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

#include "dsmgibbs/datasets.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsmgibbs/errors.h"
#include "dsmgibbs/models.h"

namespace dsmgibbs {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, int line) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError("cannot parse number '" + text + "'", line);
  }
  return value;
}

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMoG4: return "mog4";
    case DatasetKind::kTwoRings: return "rings";
    case DatasetKind::kSwissRoll: return "roll";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "mog4" || name == "mog") return DatasetKind::kMoG4;
  if (name == "rings" || name == "two_rings") return DatasetKind::kTwoRings;
  if (name == "roll" || name == "swiss_roll") return DatasetKind::kSwissRoll;
  throw ConfigError("unknown dataset kind '" + name + "'");
}

void DatasetSpec::validate() const {
  if (n < 1) throw ConfigError("dataset size must be at least 1");
  const double scales[] = {mog_std, ring_inner, ring_outer, roll_scale};
  for (double s : scales) {
    if (!(s > 0.0)) throw ConfigError("dataset scale parameters must be positive");
  }
  if (ring_jitter < 0.0 || roll_jitter < 0.0) throw ConfigError("jitter must be nonnegative");
  if (!(roll_t_max > roll_t_min) || !(roll_t_min > 0.0)) {
    throw ConfigError("swiss roll angle range must satisfy 0 < t_min < t_max");
  }
}

SampleSet generate(const DatasetSpec& spec) {
  Rng rng = make_stream(spec.seed, 0);
  return generate(spec, rng);
}

SampleSet generate(const DatasetSpec& spec, Rng& rng) {
  spec.validate();
  SampleSet set;
  set.points.resize(spec.n, 2);
  const GaussianMixture mog = GaussianMixture::FourModes(spec.mog_std);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::int64_t i = 0; i < spec.n; ++i) {
    Eigen::Vector2d p;
    switch (spec.kind) {
      case DatasetKind::kMoG4:
        p = mog_sample(mog, rng);
        break;
      case DatasetKind::kTwoRings: {
        const double base = uniform01(rng) < 0.5 ? spec.ring_inner : spec.ring_outer;
        const double angle = 2.0 * std::numbers::pi * uniform01(rng);
        const double radius = base + spec.ring_jitter * normal(rng);
        p = {radius * std::cos(angle), radius * std::sin(angle)};
        break;
      }
      case DatasetKind::kSwissRoll: {
        const double t = spec.roll_t_min + (spec.roll_t_max - spec.roll_t_min) * uniform01(rng);
        p = spec.roll_scale * Eigen::Vector2d(t * std::cos(t), t * std::sin(t)) / spec.roll_t_max;
        p[0] += spec.roll_jitter * normal(rng);
        p[1] += spec.roll_jitter * normal(rng);
        break;
      }
    }
    set.points.row(i) = p.transpose();
  }
  set.metadata["dataset"] = to_string(spec.kind);
  set.metadata["seed"] = std::to_string(spec.seed);
  return set;
}

void save_csv(const SampleSet& set, const std::string& path) {
  if (set.has_chain_columns() &&
      (Eigen::Index(set.chain_id.size()) != set.size() || set.step.size() != set.chain_id.size())) {
    throw ConfigError("chain_id/step columns do not match the number of points");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (int k = 0; k < set.dim(); ++k) out << (k ? "," : "") << 'x' << k + 1;
  if (set.has_chain_columns()) out << ",chain_id,step";
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    for (int k = 0; k < set.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", set.points(i, k));
      out << (k ? "," : "") << buf;
    }
    if (set.has_chain_columns()) out << ',' << set.chain_id[i] << ',' << set.step[i];
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

SampleSet load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);

  int dim = 0;
  while (dim < int(header.size()) && header[dim] == "x" + std::to_string(dim + 1)) ++dim;
  bool chain_columns = false;
  if (dim + 2 == int(header.size()) && header[dim] == "chain_id" && header[dim + 1] == "step") {
    chain_columns = true;
  } else if (dim != int(header.size())) {
    throw ParseError("unexpected header '" + line + "'", 1);
  }
  if (dim == 0) throw ParseError("header declares no coordinate columns", 1);

  std::vector<double> values;
  SampleSet set;
  const std::size_t width = header.size();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (int k = 0; k < dim; ++k) values.push_back(parse_number<double>(fields[k], line_no));
    if (chain_columns) {
      set.chain_id.push_back(parse_number<std::int64_t>(fields[dim], line_no));
      set.step.push_back(parse_number<std::int64_t>(fields[dim + 1], line_no));
    }
  }
  const Eigen::Index n = Eigen::Index(values.size()) / dim;
  set.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(values.data(), n, dim);
  return set;
}

}  // namespace dsmgibbs
