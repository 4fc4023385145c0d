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

#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dsmgibbs/checkpoint.h"
#include "dsmgibbs/datasets.h"
#include "dsmgibbs/errors.h"
#include "dsmgibbs/evaluation.h"
#include "dsmgibbs/training.h"

namespace dsmgibbs::cli {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kIsoStream = 0x69736f;

int to_int(const std::string& what, std::int64_t v) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(what + " is out of range");
  }
  return int(v);
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError("missing required " + flag);
}

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("malformed " + what + " '" + text + "'");
    out.push_back(v);
  }
  return out;
}

GaussianMixture analytic_mog() { return GaussianMixture::FourModes(0.2); }

DatasetSpec dataset_spec(const RunConfig::Dataset& d) {
  DatasetSpec s;
  s.kind = parse_dataset_kind(d.kind);
  s.n = d.n;
  s.seed = d.seed;
  s.mog_std = d.mog_std;
  s.ring_inner = d.ring_inner;
  s.ring_outer = d.ring_outer;
  s.ring_jitter = d.ring_jitter;
  s.roll_t_min = d.roll_t_min;
  s.roll_t_max = d.roll_t_max;
  s.roll_scale = d.roll_scale;
  s.roll_jitter = d.roll_jitter;
  return s;
}

int cmd_generate_data(RunConfig& c) {
  require(c.io.out, "--out");
  const SampleSet set = generate(dataset_spec(c.dataset));
  save_csv(set, c.io.out);
  std::printf("wrote %lld points to %s\n", static_cast<long long>(set.size()), c.io.out.c_str());
  return 0;
}

int cmd_train(RunConfig& c) {
  require(c.io.data, "--data");
  require(c.io.out, "--out");
  const SampleSet data = load_csv(c.io.data);

  TrainConfig t;
  t.objective = parse_objective(c.train.objective);
  if (c.train.parameterization == "energy") {
    t.parameterization = Parameterization::kEnergy;
  } else if (c.train.parameterization == "score") {
    t.parameterization = Parameterization::kScore;
  } else {
    throw ConfigError("unknown parameterization '" + c.train.parameterization + "'");
  }
  t.sigma = c.train.sigma;
  if (!c.train.schedule.empty()) t.sigma_schedule = parse_schedule(c.train.schedule).levels;
  t.epochs = to_int("train.epochs", c.train.epochs);
  t.batch_size = to_int("train.batch_size", c.train.batch_size);
  t.adam = {c.train.learning_rate, c.train.beta1, c.train.beta2, c.train.epsilon};
  t.seed = c.train.seed;
  t.divergence_floor = c.train.divergence_floor;
  t.validate();

  const int d = data.dim();
  NetworkKind kind = NetworkKind::kEnergy;
  int out_width = 1;
  if (t.objective == Objective::kJointKl) {
    kind = NetworkKind::kPosterior;
    out_width = 2 * d;
  } else if (t.parameterization == Parameterization::kScore) {
    kind = NetworkKind::kScore;
    out_width = d;
  }
  std::vector<int> widths = {d + (t.sigma_conditioned() ? 1 : 0)};
  for (double h : c.train.hidden) {
    if (h != double(int(h)) || h < 1) throw ConfigError("hidden widths must be positive integers");
    widths.push_back(int(h));
  }
  widths.push_back(out_width);

  Rng init = make_stream(t.seed, kInitStream);
  const std::map<std::string, double> meta = {{"sigma", t.sigma},
                                              {"epochs", double(t.epochs)},
                                              {"batch_size", double(t.batch_size)},
                                              {"learning_rate", t.adam.learning_rate},
                                              {"seed", double(t.seed)}};
  try {
    const TrainResult result = train(numgrad::MlpParams::Random(widths, init), data.points, t);
    save_checkpoint({kind, t.sigma_conditioned(), result.params, meta}, c.io.out);
    if (!c.io.loss_trace.empty()) save_loss_trace(result.trace, c.io.loss_trace);
    const double last = result.trace.empty() ? 0.0 : result.trace.back().loss;
    std::printf("trained %d epochs, final minibatch loss %.6g, wrote %s\n", t.epochs, last,
                c.io.out.c_str());
  } catch (const TrainingAborted& e) {
    std::map<std::string, double> partial_meta = meta;
    partial_meta["aborted_iteration"] = double(e.iteration());
    save_checkpoint({kind, t.sigma_conditioned(), e.partial().params, partial_meta},
                    c.io.out + ".partial");
    if (!c.io.loss_trace.empty()) save_loss_trace(e.partial().trace, c.io.loss_trace);
    throw;
  }
  return 0;
}

// Noisy samples x + sigma * eps for the isotropic variance: rows of the
// data file when given, else draws from the analytic mixture.
Eigen::MatrixXd iso_noisy_samples(const RunConfig& c, bool analytic, int dim) {
  Rng rng = make_stream(c.chain.seed, kIsoStream);
  const Eigen::Index n = c.chain.iso_samples;
  if (n < 1) throw ConfigError("chain.iso_samples must be positive");
  Eigen::MatrixXd clean;
  if (!c.io.data.empty()) {
    const SampleSet data = load_csv(c.io.data);
    if (data.size() == 0) throw ConfigError("data file '" + c.io.data + "' is empty");
    if (data.dim() != dim) throw ConfigError("data dimension does not match the model");
    clean = data.points.topRows(std::min(n, data.size()));
  } else if (analytic) {
    const GaussianMixture mog = analytic_mog();
    clean.resize(n, mog.dim());
    for (Eigen::Index i = 0; i < n; ++i) clean.row(i) = mog_sample(mog, rng).transpose();
  } else {
    throw ConfigError("iso posterior needs --data to estimate its variance");
  }
  for (Eigen::Index i = 0; i < clean.rows(); ++i) {
    clean.row(i) += c.chain.sigma * standard_normal(rng, clean.cols()).transpose();
  }
  return clean;
}

std::unique_ptr<PosteriorNet> load_posterior_net(const std::string& path, int dim) {
  if (path.empty()) throw ConfigError("learned posterior needs --posterior-net");
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != NetworkKind::kPosterior) {
    throw CapabilityError("'" + path + "' is not a posterior network checkpoint");
  }
  auto net = std::make_unique<PosteriorNet>(ckpt.params);
  if (net->dim() != dim) throw ConfigError("posterior network dimension does not match the model");
  return net;
}

int cmd_sample(RunConfig& c) {
  require(c.io.out, "--out");
  const auto model = load_model(c.io.model);
  ChainConfig cfg;
  cfg.steps = to_int("chain.steps", c.chain.steps);
  cfg.sigma = c.chain.sigma;
  cfg.init_std = c.chain.init_std;
  cfg.thinning = to_int("chain.thinning", c.chain.thinning);
  cfg.burn_in = to_int("chain.burn_in", c.chain.burn_in);
  cfg.seed = c.chain.seed;
  cfg.posterior = parse_posterior(c.chain.posterior, c.chain.clamp);
  std::unique_ptr<PosteriorNet> net;
  if (cfg.posterior.kind == Provenance::kMMIso) {
    const bool analytic = c.io.model.starts_with("analytic:");
    cfg.posterior.iso_variance =
        iso_variance(*model, iso_noisy_samples(c, analytic, model->dim()), cfg.sigma,
                     cfg.posterior.clamp)
            .variance;
  } else if (cfg.posterior.kind == Provenance::kLearned) {
    net = load_posterior_net(c.io.posterior_net, model->dim());
    cfg.posterior.net = net.get();
  }
  if (cfg.posterior.kind == Provenance::kMMFull && !model->has_exact_hessian()) {
    throw CapabilityError("full posterior needs an energy model; '" + c.io.model +
                          "' has no symmetric Hessian");
  }
  const SampleSet set = run_chains(*model, cfg, to_int("chain.chains", c.chain.chains));
  save_csv(set, c.io.out);
  std::printf("wrote %lld states to %s\n", static_cast<long long>(set.size()), c.io.out.c_str());
  return 0;
}

int cmd_sample_multilevel(RunConfig& c) {
  require(c.io.out, "--out");
  const auto model = load_model(c.io.model);
  if (!model->sigma_conditioned()) {
    throw CapabilityError("multi-level sampling needs a noise-conditioned model");
  }
  NoiseSchedule schedule = parse_schedule(c.multilevel.schedule);
  schedule.gibbs_steps = to_int("multilevel.gibbs_steps", c.multilevel.gibbs_steps);
  schedule.rademacher_samples = to_int("multilevel.rademacher", c.multilevel.rademacher);
  MultilevelOptions options;
  const PosteriorSpec kind = parse_posterior(c.multilevel.posterior, c.multilevel.clamp);
  options.posterior = kind.kind;
  options.clamp = c.multilevel.clamp;
  options.final_denoise = c.multilevel.final_denoise;
  const SampleSet set = multilevel_gibbs(*model, schedule, to_int("multilevel.chains", c.multilevel.chains),
                                         c.multilevel.seed, options);
  save_csv(set, c.io.out);
  std::printf("wrote %lld samples to %s\n", static_cast<long long>(set.size()), c.io.out.c_str());
  return 0;
}

int cmd_eval_mmd(RunConfig& c) {
  require(c.io.a, "--a");
  require(c.io.b, "--b");
  require(c.io.out, "--out");
  const MmdReport report = mmd(load_csv(c.io.a).points, load_csv(c.io.b).points, c.eval.bandwidths);
  write_mmd_csv(report, c.eval.seed, c.io.out);
  std::printf("mmd2=%.17g distance=%.17g\n", report.mmd2, report.distance());
  return 0;
}

int cmd_posterior_grid(RunConfig& c) {
  require(c.io.out, "--out");
  const auto model = load_model(c.io.model);
  const int d = model->dim();
  if (int(c.grid.xtilde.size()) != d) throw ConfigError("--xtilde must have one value per dimension");
  if (!(c.grid.upper > c.grid.lower)) throw ConfigError("grid.upper must exceed grid.lower");
  const GaussianMixture mog = analytic_mog();
  if (mog.dim() != d) throw ConfigError("posterior grid is defined for 2D models only");
  const GridOracle grid(mog, Eigen::VectorXd::Constant(d, c.grid.lower),
                        Eigen::VectorXd::Constant(d, c.grid.upper), to_int("grid.nodes", c.grid.nodes));
  const Eigen::VectorXd xt = Eigen::Map<const Eigen::VectorXd>(c.grid.xtilde.data(), d);
  PosteriorSpec spec = parse_posterior(c.grid.posterior, kDefaultClamp);
  std::unique_ptr<PosteriorNet> net;
  if (spec.kind == Provenance::kLearned) {
    net = load_posterior_net(c.io.posterior_net, d);
    spec.net = net.get();
  } else if (spec.kind == Provenance::kMMIso) {
    throw CapabilityError("posterior-grid supports full, diag and learned posteriors");
  }
  Rng rng = make_stream(c.grid.seed, 0);
  const GaussianApprox approx = build_posterior(*model, xt, NoiseLevel::Single(c.grid.sigma), spec, rng);
  write_posterior_grid_csv(grid, c.grid.sigma, xt, approx, c.io.out);
  std::printf("wrote %lld grid nodes to %s\n", static_cast<long long>(grid.size()),
              c.io.out.c_str());
  return 0;
}

int cmd_verify_identities(RunConfig& c) {
  bool all_pass = true;
  const std::vector<std::string> lines = verify_identities(all_pass);
  std::ofstream report;
  if (!c.io.out.empty()) {
    report.open(c.io.out);
    if (!report) throw IoError("cannot open '" + c.io.out + "' for writing");
  }
  for (const std::string& line : lines) {
    std::printf("%s\n", line.c_str());
    if (report.is_open()) report << line << '\n';
  }
  if (report.is_open() && !report) throw IoError("write to '" + c.io.out + "' failed");
  if (!all_pass) throw NumericError("identity verification failed");
  return 0;
}

int cmd_plot(RunConfig& c) {
  require(c.io.samples, "--samples");
  require(c.io.out, "--out");
  write_scatter_svg(c.io.samples, c.plot, c.io.out);
  std::printf("wrote %s\n", c.io.out.c_str());
  return 0;
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {
      {"generate-data", "Draw a synthetic 2D dataset and write it as CSV", {"io.out", "dataset"},
       cmd_generate_data},
      {"train", "Train an energy, score or posterior network", {"io.data", "io.out", "io.loss_trace", "train"}, cmd_train},
      {"sample", "Run pseudo-Gibbs chains at one noise level", {"io.model", "io.posterior_net", "io.data", "io.out", "chain"}, cmd_sample},
      {"sample-multilevel", "Annealed pseudo-Gibbs over a noise schedule", {"io.model", "io.out", "multilevel"},
       cmd_sample_multilevel},
      {"eval-mmd", "Unbiased MMD^2 between two sample files", {"io.a", "io.b", "io.out", "eval"}, cmd_eval_mmd},
      {"posterior-grid", "Dump true and approximate posterior log densities on a grid",
       {"io.model", "io.posterior_net", "io.out", "grid"}, cmd_posterior_grid},
      {"verify-identities", "Check the moment-matching identities on the analytic mixture",
       {"io.out"}, cmd_verify_identities},
      {"plot", "Render samples as an SVG scatter plot", {"io.samples", "io.out", "plot"}, cmd_plot},
  };
  return all;
}

std::unique_ptr<EnergyModel> load_model(const std::string& spec) {
  if (spec == "analytic:mog") return std::make_unique<MixtureModel>(analytic_mog());
  if (spec.starts_with("analytic:")) throw ConfigError("unknown analytic model '" + spec + "'");
  return make_energy_model(load_checkpoint(spec));
}

NoiseSchedule parse_schedule(const std::string& text) {
  const std::string prefix = "geometric:";
  if (!text.starts_with(prefix)) {
    throw ConfigError("schedule must look like geometric:sigma_max,sigma_min,K; got '" + text + "'");
  }
  const std::vector<double> v = split_numbers(text.substr(prefix.size()), "schedule");
  if (v.size() != 3 || v[2] != double(int(v[2]))) {
    throw ConfigError("schedule must look like geometric:sigma_max,sigma_min,K; got '" + text + "'");
  }
  NoiseSchedule s = NoiseSchedule::Geometric(v[0], v[1], int(v[2]));
  s.validate();
  return s;
}

PosteriorSpec parse_posterior(const std::string& text, double clamp) {
  PosteriorSpec spec;
  spec.clamp = clamp;
  if (text == "full") {
    spec.kind = Provenance::kMMFull;
  } else if (text == "diag" || text.starts_with("diag:")) {
    spec.kind = Provenance::kMMDiag;
    if (text.size() > 5) {
      const std::vector<double> s = split_numbers(text.substr(5), "posterior");
      if (s.size() != 1 || s[0] < 1 || s[0] != double(int(s[0]))) {
        throw ConfigError("diag:S needs a positive integer S");
      }
      spec.rademacher_samples = int(s[0]);
    }
  } else if (text == "iso") {
    spec.kind = Provenance::kMMIso;
  } else if (text == "learned") {
    spec.kind = Provenance::kLearned;
  } else {
    throw ConfigError("posterior must be full, diag[:S], iso or learned; got '" + text + "'");
  }
  return spec;
}

std::string echo_config(RunConfig& config, const std::string& command,
                        const std::vector<std::string>& sections) {
  std::filesystem::path dir = config.output_dir;
  if (dir.empty()) {
    dir = std::filesystem::path(config.io.out).parent_path();
    if (dir.empty()) dir = ".";
    config.output_dir = dir.string();
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = dir / (command + ".config.json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write resolved config '" + path.string() + "'");
  out << to_json(config, sections).dump(2) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
  return path.string();
}

}  // namespace dsmgibbs::cli
