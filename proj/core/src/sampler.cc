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

#include "dsmgibbs/sampler.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

// Runs job(i) for i in [0, count) on up to thread_budget() workers and
// rethrows the first failure.
template <typename Job>
void parallel_for(int count, Job&& job) {
  const int workers = std::max(1, std::min(thread_budget(), count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SampleSet concat(std::vector<SampleSet>& parts, int dim) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  SampleSet out;
  out.points.resize(total, dim);
  Eigen::Index row = 0;
  for (auto& p : parts) {
    out.points.middleRows(row, p.size()) = p.points;
    row += p.size();
    out.chain_id.insert(out.chain_id.end(), p.chain_id.begin(), p.chain_id.end());
    out.step.insert(out.step.end(), p.step.begin(), p.step.end());
  }
  if (!parts.empty()) out.metadata = parts.front().metadata;
  return out;
}

}  // namespace

void ChainConfig::validate() const {
  if (steps < 1) throw ConfigError("chain needs at least one step");
  if (!(sigma > 0.0)) throw ConfigError("chain sigma must be positive");
  if (!(init_std > 0.0)) throw ConfigError("init std must be positive");
  if (thinning < 1) throw ConfigError("thinning must be at least 1");
  if (burn_in < 0 || burn_in >= steps) throw ConfigError("burn-in must be in [0, steps)");
  if (!monitor_means.empty() && (monitor_window < 1 || !(monitor_radius > 0.0))) {
    throw ConfigError("mode monitor needs a positive window and radius");
  }
}

NoiseSchedule NoiseSchedule::Geometric(double sigma_max, double sigma_min, int count) {
  if (count < 1) throw ConfigError("schedule needs at least one level");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min || (count == 1 && sigma_max == sigma_min))) {
    throw ConfigError("geometric schedule needs sigma_max > sigma_min > 0");
  }
  NoiseSchedule s;
  if (count == 1) {
    s.levels = {sigma_max};
    return s;
  }
  const double ratio = std::log(sigma_min / sigma_max) / double(count - 1);
  for (int i = 0; i < count; ++i) s.levels.push_back(sigma_max * std::exp(ratio * double(i)));
  s.levels.front() = sigma_max;
  s.levels.back() = sigma_min;
  return s;
}

void NoiseSchedule::validate() const {
  if (levels.empty()) throw ConfigError("schedule has no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0) || !std::isfinite(levels[i])) {
      throw ConfigError("schedule levels must be positive and finite");
    }
    if (i > 0 && !(levels[i - 1] * levels[i - 1] - levels[i] * levels[i] > 0.0)) {
      throw ConfigError("schedule must be strictly decreasing (level " + std::to_string(i) + ")");
    }
  }
  if (gibbs_steps < 1) throw ConfigError("gibbs_steps must be at least 1");
  if (rademacher_samples < 1) throw ConfigError("rademacher_samples must be at least 1");
}

Eigen::VectorXd gibbs_step(const EnergyModel& model, const Eigen::VectorXd& x, NoiseLevel level,
                           const PosteriorSpec& posterior, Rng& rng) {
  const Eigen::VectorXd noisy = x + level.sigma * standard_normal(rng, x.size());
  return sample_gaussian(build_posterior(model, noisy, level, posterior, rng), rng);
}

SampleSet run_chain(const EnergyModel& model, const ChainConfig& config,
                    std::vector<OccupancyWindow>* occupancy, std::uint64_t chain_id) {
  config.validate();
  Rng rng = make_stream(config.seed, chain_id);
  const int d = model.dim();
  const NoiseLevel level = NoiseLevel::Single(config.sigma);
  const int kept = (config.steps - config.burn_in) / config.thinning;

  SampleSet out;
  out.points.resize(kept, d);
  out.chain_id.reserve(std::size_t(kept));
  out.step.reserve(std::size_t(kept));
  out.metadata["seed"] = std::to_string(config.seed);
  out.metadata["posterior"] = to_string(config.posterior.kind);
  out.metadata["sigma"] = std::to_string(config.sigma);

  const bool monitor = occupancy != nullptr && !config.monitor_means.empty();
  std::vector<double> counts(config.monitor_means.size(), 0.0);
  int in_window = 0;

  Eigen::VectorXd x = config.init_std * standard_normal(rng, d);
  Eigen::Index row = 0;
  for (int step = 1; step <= config.steps; ++step) {
    x = gibbs_step(model, x, level, config.posterior, rng);
    if (!x.allFinite()) {
      throw NumericError("non-finite chain state at step " + std::to_string(step));
    }
    if (step > config.burn_in && (step - config.burn_in) % config.thinning == 0) {
      out.points.row(row++) = x.transpose();
      out.chain_id.push_back(std::int64_t(chain_id));
      out.step.push_back(step);
    }
    if (monitor) {
      for (std::size_t k = 0; k < counts.size(); ++k) {
        if ((x - config.monitor_means[k]).norm() <= config.monitor_radius) counts[k] += 1.0;
      }
      if (++in_window == config.monitor_window || step == config.steps) {
        OccupancyWindow w{step, {}};
        for (double c : counts) w.fractions.push_back(c / in_window);
        occupancy->push_back(std::move(w));
        std::fill(counts.begin(), counts.end(), 0.0);
        in_window = 0;
      }
    }
  }
  return out;
}

SampleSet run_chains(const EnergyModel& model, const ChainConfig& config, int n_chains) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  config.validate();
  std::vector<SampleSet> parts(static_cast<std::size_t>(n_chains));
  parallel_for(n_chains, [&](int c) {
    parts[std::size_t(c)] = run_chain(model, config, nullptr, std::uint64_t(c));
  });
  return concat(parts, model.dim());
}

SampleSet multilevel_gibbs(const EnergyModel& model, const NoiseSchedule& schedule, int n_chains,
                           std::uint64_t seed, const MultilevelOptions& options) {
  schedule.validate();
  if (n_chains < 1) throw ConfigError("need at least one chain");
  if (options.posterior == Provenance::kMMIso || options.posterior == Provenance::kLearned) {
    throw CapabilityError("multi-level sampling supports the full and diagonal posteriors only");
  }
  PosteriorSpec spec;
  spec.kind = options.posterior;
  spec.rademacher_samples = schedule.rademacher_samples;
  spec.clamp = options.clamp;

  const int d = model.dim();
  const std::size_t levels = schedule.levels.size();
  const std::int64_t total_sweeps = std::int64_t(levels) * schedule.gibbs_steps;
  Eigen::MatrixXd finals(n_chains, d);

  parallel_for(n_chains, [&](int c) {
    Rng rng = make_stream(seed, std::uint64_t(c));
    Eigen::VectorXd x = schedule.levels.front() * standard_normal(rng, d);
    for (std::size_t t = 0; t < levels; ++t) {
      const double upper = schedule.levels[t];
      const double lower = t + 1 < levels ? schedule.levels[t + 1] : 0.0;
      const NoiseLevel level{std::sqrt(upper * upper - lower * lower), upper};
      for (int s = 0; s < schedule.gibbs_steps; ++s) {
        const bool last = (t + 1 == levels) && (s + 1 == schedule.gibbs_steps);
        if (last && options.final_denoise) {
          const Eigen::VectorXd noisy = x + level.sigma * standard_normal(rng, d);
          x = mm_mean(model, noisy, level);
        } else {
          x = gibbs_step(model, x, level, spec, rng);
        }
        if (!x.allFinite()) {
          throw NumericError("non-finite state in chain " + std::to_string(c) + " at level " +
                             std::to_string(t));
        }
      }
    }
    finals.row(c) = x.transpose();
  });

  SampleSet out;
  out.points = std::move(finals);
  for (int c = 0; c < n_chains; ++c) {
    out.chain_id.push_back(c);
    out.step.push_back(total_sweeps);
  }
  out.metadata["seed"] = std::to_string(seed);
  out.metadata["posterior"] = to_string(options.posterior);
  out.metadata["levels"] = std::to_string(levels);
  return out;
}

int thread_budget() {
  int hw = int(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("RUN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return int(std::min<long>(v, 1024));
  }
  return hw;
}

}  // namespace dsmgibbs
