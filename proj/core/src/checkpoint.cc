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

#include "dsmgibbs/checkpoint.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

constexpr std::string_view kMagic = "dsmgibbs-checkpoint 1";

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

NetworkKind parse_kind(const std::string& s, int line) {
  if (s == "energy") return NetworkKind::kEnergy;
  if (s == "score") return NetworkKind::kScore;
  if (s == "posterior") return NetworkKind::kPosterior;
  throw ParseError("unknown network kind '" + s + "'", line);
}

double parse_double(const std::string& token, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || token.empty()) {
    throw ParseError("bad number '" + token + "'", line);
  }
  return v;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::istringstream next(const std::string& expected_tag) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("truncated checkpoint", line_ + 1);
    ++line_;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (tag != expected_tag) {
      throw ParseError("expected '" + expected_tag + "', found '" + tag + "'", line_);
    }
    return fields;
  }

  bool peek_tag(const std::string& tag) {
    const auto pos = in_.tellg();
    std::string word;
    in_ >> word;
    in_.seekg(pos);
    return word == tag;
  }

  int line() const { return line_; }

 private:
  std::istringstream in_;
  int line_ = 0;
};

Eigen::VectorXd read_values(std::istringstream& fields, Eigen::Index count, int line) {
  Eigen::VectorXd v(count);
  std::string token;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!(fields >> token)) throw ParseError("too few values", line);
    v[i] = parse_double(token, line);
  }
  if (fields >> token) throw ParseError("too many values", line);
  return v;
}

}  // namespace

std::string to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::kEnergy: return "energy";
    case NetworkKind::kScore: return "score";
    case NetworkKind::kPosterior: return "posterior";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.params.empty()) throw ConfigError("cannot serialize an empty network");
  std::ostringstream out;
  out << kMagic << '\n';
  out << "kind " << to_string(ckpt.kind) << '\n';
  out << "activation swish\n";
  out << "sigma_conditioned " << (ckpt.sigma_conditioned ? 1 : 0) << '\n';
  out << "widths";
  for (int w : ckpt.params.widths()) out << ' ' << w;
  out << '\n';
  for (const auto& [name, value] : ckpt.meta) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw ConfigError("checkpoint meta names must be single tokens");
    }
    out << "meta " << name << ' ' << format_double(value) << '\n';
  }
  const auto& layers = ckpt.params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out << "layer " << l << '\n';
    for (Eigen::Index r = 0; r < layers[l].weight.rows(); ++r) {
      out << 'w';
      for (Eigen::Index c = 0; c < layers[l].weight.cols(); ++c) {
        out << ' ' << format_double(layers[l].weight(r, c));
      }
      out << '\n';
    }
    out << 'b';
    for (Eigen::Index r = 0; r < layers[l].bias.size(); ++r) {
      out << ' ' << format_double(layers[l].bias[r]);
    }
    out << '\n';
  }
  std::string body = out.str();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
  return body + "checksum " + hex + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  const std::size_t pos = text.rfind("checksum ");
  if (pos == std::string::npos || (pos > 0 && text[pos - 1] != '\n')) {
    throw ParseError("missing checksum line (truncated checkpoint?)", 0);
  }
  const std::string body = text.substr(0, pos);
  std::string stored = text.substr(pos + 9);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
  if (stored != hex) throw ParseError("checksum mismatch", 0);

  LineReader reader(body);
  {
    std::string line;
    std::istringstream first(body);
    std::getline(first, line);
    if (line != kMagic) throw ParseError("not a dsmgibbs checkpoint", 1);
    reader.next("dsmgibbs-checkpoint");
  }
  Checkpoint ckpt;
  {
    auto f = reader.next("kind");
    std::string kind;
    f >> kind;
    ckpt.kind = parse_kind(kind, reader.line());
  }
  {
    auto f = reader.next("activation");
    std::string act;
    f >> act;
    if (act != "swish") throw ParseError("unsupported activation '" + act + "'", reader.line());
  }
  {
    auto f = reader.next("sigma_conditioned");
    int flag = -1;
    f >> flag;
    if (flag != 0 && flag != 1) throw ParseError("sigma_conditioned must be 0 or 1", reader.line());
    ckpt.sigma_conditioned = flag == 1;
  }
  std::vector<int> widths;
  {
    auto f = reader.next("widths");
    int w = 0;
    while (f >> w) {
      if (w <= 0) throw ParseError("layer widths must be positive", reader.line());
      widths.push_back(w);
    }
    if (widths.size() < 2) throw ParseError("need at least two widths", reader.line());
  }
  while (reader.peek_tag("meta")) {
    auto f = reader.next("meta");
    std::string name, value;
    f >> name >> value;
    ckpt.meta[name] = parse_double(value, reader.line());
  }
  std::vector<numgrad::Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    auto header = reader.next("layer");
    std::size_t index = 0;
    if (!(header >> index) || index != l) throw ParseError("layer index out of order", reader.line());
    numgrad::Layer layer{Eigen::MatrixXd(widths[l + 1], widths[l]),
                         Eigen::VectorXd(widths[l + 1])};
    for (int r = 0; r < widths[l + 1]; ++r) {
      auto row = reader.next("w");
      layer.weight.row(r) = read_values(row, widths[l], reader.line()).transpose();
    }
    auto bias = reader.next("b");
    layer.bias = read_values(bias, widths[l + 1], reader.line());
    layers.push_back(std::move(layer));
  }
  ckpt.params = numgrad::MlpParams(std::move(layers));
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string text = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

std::unique_ptr<EnergyModel> make_energy_model(const Checkpoint& ckpt) {
  switch (ckpt.kind) {
    case NetworkKind::kEnergy:
      return std::make_unique<MlpEnergyModel>(ckpt.params, ckpt.sigma_conditioned);
    case NetworkKind::kScore:
      return std::make_unique<ScoreNetModel>(ckpt.params, ckpt.sigma_conditioned);
    case NetworkKind::kPosterior:
      break;
  }
  throw CapabilityError("posterior checkpoint does not define an energy or score model");
}

}  // namespace dsmgibbs
