// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/protocol_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rpda/access_stats.hpp"
#include "rpda/parallel.hpp"
#include "rpda/trace.hpp"

namespace rpda {
namespace {

constexpr std::uint64_t kActiveStream = 1;
constexpr std::uint64_t kBetaStream = 2;
constexpr std::uint64_t kSlotStream = 3;
constexpr std::uint64_t kHopStream = 4;
constexpr std::uint64_t kFrameStream = 5;

}  // namespace

double DetectionThreshold::level(int antennas) const {
  return 1.0 + zeta * std::sqrt(2.0 / antennas);
}

int FramePlan::pilot(int device, int slot) const {
  const int src = pattern_source.empty() ? device
                                         : pattern_source[static_cast<std::size_t>(device)];
  return static_cast<int>(bounded(
      derive_seed(frame_seed, kHopStream, static_cast<std::uint64_t>(src),
                  static_cast<std::uint64_t>(slot)),
      static_cast<std::uint32_t>(pilots)));
}

FramePlan make_frame_plan(const ProtocolConfig& cfg, std::uint64_t frame_seed) {
  validate(cfg.op);
  if (cfg.n_slots < 1) throw std::invalid_argument("n_slots must be >= 1");
  FramePlan plan;
  plan.n_slots = cfg.n_slots;
  plan.pilots = cfg.op.pilot_length;
  plan.frame_seed = frame_seed;
  if (!cfg.forced_active.empty()) {
    plan.active_set = cfg.forced_active;
    std::sort(plan.active_set.begin(), plan.active_set.end());
  } else {
    Rng rng(derive_seed(frame_seed, kActiveStream));
    plan.active_set = sample_active_set({cfg.op.devices, cfg.op.activation_prob}, rng);
  }
  if (cfg.shared_pattern) {
    const int src = plan.active_set.empty() ? 0 : plan.active_set.front();
    plan.pattern_source.assign(static_cast<std::size_t>(cfg.op.devices), src);
  }
  return plan;
}

Eigen::MatrixXcd pilot_observation(const Eigen::MatrixXcd& gains,
                                   std::span<const int> pilots, int pilot_count,
                                   Rng& rng) {
  if (static_cast<Eigen::Index>(pilots.size()) != gains.cols()) {
    throw std::invalid_argument("one pilot index per channel column required");
  }
  const Eigen::Index m = gains.rows();
  Eigen::MatrixXcd yp(m, pilot_count);
  for (Eigen::Index j = 0; j < pilot_count; ++j) {
    for (Eigen::Index r = 0; r < m; ++r) yp(r, j) = rng.complex_normal(1.0);
  }
  const double amp = std::sqrt(static_cast<double>(pilot_count));
  for (std::size_t k = 0; k < pilots.size(); ++k) {
    yp.col(pilots[k]) += amp * gains.col(static_cast<Eigen::Index>(k));
  }
  return yp;
}

std::vector<int> detect_pilots(const Eigen::MatrixXcd& yp,
                               const DetectionThreshold& threshold) {
  const int m = static_cast<int>(yp.rows());
  const double level = threshold.level(m);
  std::vector<int> out;
  for (Eigen::Index j = 0; j < yp.cols(); ++j) {
    if (yp.col(j).squaredNorm() / m > level) out.push_back(static_cast<int>(j));
  }
  return out;
}

double estimate_sum_power(const Eigen::MatrixXcd& yp, int pilot) {
  const double stat = yp.col(pilot).squaredNorm() / static_cast<double>(yp.rows());
  return std::max(0.0, (stat - 1.0) / static_cast<double>(yp.cols()));
}

Eigen::VectorXcd estimate_channel(const Eigen::MatrixXcd& yp, int pilot,
                                  double beta_sum_estimate) {
  const double tp = static_cast<double>(yp.cols());
  return (std::sqrt(tp) / (tp * beta_sum_estimate + 1.0)) * yp.col(pilot);
}

Eigen::VectorXcd genie_mmse_estimate(const Eigen::MatrixXcd& yp, int pilot,
                                     double beta, double group_beta_sum) {
  return beta * estimate_channel(yp, pilot, group_beta_sum);
}

double genie_sinr(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& yp,
                  int device, std::span<const double> betas,
                  std::span<const int> pilots, double data_power) {
  const double wn = w.squaredNorm();
  if (wn == 0.0 || data_power == 0.0) return 0.0;
  const int pilot = pilots[static_cast<std::size_t>(device)];
  const double tp = static_cast<double>(yp.cols());
  double group = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    total += betas[j];
    if (pilots[j] == pilot) group += betas[j];
  }
  const double denom_y = tp * group + 1.0;
  // Every genie estimate on this pilot is c beta_j y.
  const double c = std::sqrt(tp) / denom_y;
  const double proj = std::norm(w.dot(yp.col(pilot)));
  double coll = 0.0;
  double err = 0.0;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    if (pilots[j] != pilot) continue;
    err += betas[j] - tp * betas[j] * betas[j] / denom_y;
    if (static_cast<int>(j) != device) coll += betas[j] * betas[j];
  }
  const double bk = betas[static_cast<std::size_t>(device)];
  const double num = data_power * c * c * bk * bk * proj;
  const double den = data_power * c * c * coll * proj +
                     wn * (data_power * (err + total - group) + 1.0);
  return num / den;
}

MrcMeasurement mrc_and_measure(const Eigen::MatrixXcd& gains,
                               std::span<const double> betas,
                               std::span<const int> pilots,
                               const Eigen::MatrixXcd& yp,
                               const Eigen::MatrixXcd& combiners,
                               std::span<const std::complex<double>> symbols,
                               Rng& rng, double data_power) {
  const std::size_t n = betas.size();
  if (pilots.size() != n || symbols.size() != n ||
      gains.cols() != static_cast<Eigen::Index>(n) || combiners.rows() != gains.rows()) {
    throw std::invalid_argument("mrc_and_measure: inconsistent dimensions");
  }
  const double amp = std::sqrt(data_power);
  Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) x(static_cast<Eigen::Index>(k)) = amp * symbols[k];
  Eigen::VectorXcd yd = gains * x;
  for (Eigen::Index r = 0; r < yd.size(); ++r) yd(r) += rng.complex_normal(1.0);

  MrcMeasurement out;
  out.sinr.resize(n);
  out.signal_power.resize(n);
  out.output_power.resize(static_cast<std::size_t>(combiners.cols()));
  for (Eigen::Index j = 0; j < combiners.cols(); ++j) {
    out.output_power[static_cast<std::size_t>(j)] = std::norm(combiners.col(j).dot(yd));
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::VectorXcd w = combiners.col(pilots[k]);
    out.sinr[k] = genie_sinr(w, yp, static_cast<int>(k), betas, pilots, data_power);
    out.signal_power[k] =
        std::norm(w.dot(gains.col(static_cast<Eigen::Index>(k))) * x(static_cast<Eigen::Index>(k)));
  }
  return out;
}

std::vector<int> match_patterns(const std::vector<std::vector<int>>& detected,
                                const FramePlan& plan, int devices, double rho) {
  const int slots = static_cast<int>(detected.size());
  if (slots < 1) throw std::invalid_argument("match_patterns needs at least one slot");
  std::vector<std::vector<char>> used(detected.size(),
                                      std::vector<char>(static_cast<std::size_t>(plan.pilots), 0));
  for (std::size_t l = 0; l < detected.size(); ++l) {
    for (int j : detected[l]) used[l][static_cast<std::size_t>(j)] = 1;
  }
  const double need = rho * slots;
  std::vector<int> out;
  for (int k = 0; k < devices; ++k) {
    int hits = 0;
    for (int l = 0; l < slots; ++l) hits += used[static_cast<std::size_t>(l)][static_cast<std::size_t>(plan.pilot(k, l))];
    if (hits >= need) out.push_back(k);
  }
  return out;
}

FrameReport run_frame(const ProtocolConfig& cfg, std::uint64_t frame_seed,
                      TraceWriter* trace) {
  const FramePlan plan = make_frame_plan(cfg, frame_seed);
  const int m = cfg.op.antennas;
  const int tp = cfg.op.pilot_length;
  const double pre = prelog(cfg.op.slot_length, tp);
  const std::size_t n = plan.active_set.size();

  FrameReport rep;
  rep.active = plan.active_set;
  rep.betas.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cfg.forced_betas.empty()) {
      rep.betas[i] = cfg.forced_betas.at(i);
    } else {
      Rng rng(derive_seed(frame_seed, kBetaStream, static_cast<std::uint64_t>(rep.active[i])));
      rep.betas[i] = sample_beta(cfg.model, rng);
    }
  }
  rep.device_rate.assign(n, 0.0);

  std::vector<std::vector<int>> detected_sets(static_cast<std::size_t>(plan.n_slots));
  std::vector<int> pilots(n);
  std::vector<std::complex<double>> symbols(n);
  double nmse_sum = 0.0;
  long nmse_count = 0;
  for (int l = 0; l < plan.n_slots; ++l) {
    Rng rng(derive_seed(frame_seed, kSlotStream, static_cast<std::uint64_t>(l)));
    for (std::size_t i = 0; i < n; ++i) pilots[i] = plan.pilot(rep.active[i], l);
    const ChannelRealization ch = sample_channels(rep.betas, m, rng);
    const Eigen::MatrixXcd yp = pilot_observation(ch.gains, pilots, tp, rng);

    SlotOutcome out;
    out.detected = detect_pilots(yp, cfg.threshold);
    std::vector<char> occupied(static_cast<std::size_t>(tp), 0);
    for (int p : pilots) occupied[static_cast<std::size_t>(p)] = 1;
    Eigen::MatrixXcd combiners = Eigen::MatrixXcd::Zero(m, tp);
    for (int j : out.detected) {
      if (!occupied[static_cast<std::size_t>(j)]) ++rep.false_alarms;
      const double s = estimate_sum_power(yp, j);
      out.est_sum_power.push_back(s);
      combiners.col(j) = estimate_channel(yp, j, s);
    }
    for (std::size_t i = 0; i < n; ++i) symbols[i] = rng.complex_normal(1.0);
    const MrcMeasurement meas =
        mrc_and_measure(ch.gains, rep.betas, pilots, yp, combiners, symbols, rng, cfg.data_power);
    for (int j : out.detected) out.mrc_output_power.push_back(meas.output_power[static_cast<std::size_t>(j)]);

    out.sinr.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXcd w = combiners.col(pilots[i]);
      if (w.squaredNorm() == 0.0) {
        ++rep.missed_detections;
        out.sinr[i] = 0.0;
        continue;
      }
      out.sinr[i] = meas.sinr[i];
      rep.device_rate[i] += pre * std::log2(1.0 + meas.sinr[i]);
      const double assumed = cfg.beta_knowledge_error * rep.betas[i];
      nmse_sum += (assumed * w - ch.gains.col(static_cast<Eigen::Index>(i))).squaredNorm() /
                  (m * rep.betas[i]);
      ++nmse_count;
    }
    if (trace) trace->write(static_cast<std::uint32_t>(l), out);
    detected_sets[static_cast<std::size_t>(l)] = std::move(out.detected);
  }
  for (double& r : rep.device_rate) r /= plan.n_slots;
  rep.estimate_nmse = nmse_count > 0 ? nmse_sum / nmse_count : 0.0;

  rep.identified = match_patterns(detected_sets, plan, cfg.op.devices, cfg.rho);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(rep.identified.begin(), rep.identified.end(), rep.active[i])) {
      rep.sum_rate += rep.device_rate[i];
    }
  }
  return rep;
}

FrameBatch run_frames(const ProtocolConfig& cfg, int n_frames, std::uint64_t seed,
                      unsigned jobs) {
  if (n_frames < 1) throw std::invalid_argument("n_frames must be >= 1");
  FrameBatch batch;
  batch.frames.resize(static_cast<std::size_t>(n_frames));
  parallel_for(
      batch.frames.size(),
      [&](std::size_t f) {
        batch.frames[f] = run_frame(cfg, derive_seed(seed, kFrameStream, f));
      },
      jobs);
  std::vector<double> rates;
  for (const FrameReport& r : batch.frames) rates.push_back(r.sum_rate);
  batch.mean_sum_rate = pairwise_sum(rates.data(), rates.size()) / n_frames;
  if (n_frames > 1) {
    double ss = 0.0;
    for (double r : rates) ss += (r - batch.mean_sum_rate) * (r - batch.mean_sum_rate);
    batch.std_err = std::sqrt(ss / (n_frames - 1) / n_frames);
  }
  return batch;
}

}  // namespace rpda
