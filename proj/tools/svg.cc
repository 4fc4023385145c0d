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

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "commands.h"
#include "dsmgibbs/datasets.h"
#include "dsmgibbs/errors.h"

namespace dsmgibbs::cli {
namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                  "#bcbd22", "#17becf"};

}  // namespace

void write_scatter_svg(const std::string& samples_path, const RunConfig::Plot& style,
                       const std::string& out_path) {
  const SampleSet set = load_csv(samples_path);
  if (set.dim() != 2) throw ConfigError("plot needs 2D samples, got dimension " +
                                        std::to_string(set.dim()));
  if (style.size < 16) throw ConfigError("plot.size must be at least 16");
  const double size = double(style.size);

  // Data bounding box grown by 5% on each side; degenerate extents get a
  // unit box so the mapping stays finite.
  Eigen::Vector2d lo(-1.0, -1.0), hi(1.0, 1.0);
  if (set.size() > 0) {
    lo = set.points.colwise().minCoeff().transpose();
    hi = set.points.colwise().maxCoeff().transpose();
  }
  for (int k = 0; k < 2; ++k) {
    double span = hi[k] - lo[k];
    if (!(span > 0.0)) {
      lo[k] -= 0.5;
      hi[k] += 0.5;
      span = 1.0;
    }
    lo[k] -= 0.05 * span;
    hi[k] += 0.05 * span;
  }

  std::ofstream out(out_path);
  if (!out) throw IoError("cannot open '" + out_path + "' for writing");
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                int(size), int(size), int(size), int(size));
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << buf;
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"0.5\" y=\"0.5\" width=\"%g\" height=\"%g\" fill=\"white\" "
                "stroke=\"black\" stroke-width=\"1\"/>\n",
                size - 1.0, size - 1.0);
  out << buf;
  out << "<g stroke=\"none\">\n";
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const double px = (set.points(i, 0) - lo[0]) / (hi[0] - lo[0]) * size;
    const double py = (hi[1] - set.points(i, 1)) / (hi[1] - lo[1]) * size;
    const std::int64_t chain = set.has_chain_columns() ? set.chain_id[i] : 0;
    const char* color = kPalette[std::size_t(chain < 0 ? -chain : chain) % kPalette.size()];
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%g\" fill=\"%s\" fill-opacity=\"%g\"/>\n",
                  px, py, style.marker_radius, color, style.opacity);
    out << buf;
  }
  out << "</g>\n</svg>\n";
  if (!out) throw IoError("write to '" + out_path + "' failed");
}

}  // namespace dsmgibbs::cli
