// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/bounds.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rpda/parallel.hpp"

namespace rpda {
namespace {

std::atomic<long> g_r1_evaluations{0};

constexpr std::uint64_t kBankStream = 0x62657461ULL;  // "beta"
constexpr int kSampleChunk = 32;

struct Cell {
  int active;
  int colliders;
  double weight;  // p(K_a) * K_a * p(c | K_a)
};

std::vector<Cell> activity_cells(const OperatingPoint& op, double eps_tail,
                                 int only_active = -1) {
  std::vector<Cell> cells;
  if (op.activation_prob <= 0.0) return cells;
  const ActivationLaw law{op.devices, op.activation_prob};
  const TruncatedSupport act = truncate_support(law, eps_tail);
  int lo = std::max(1, act.lo);
  int hi = act.hi;
  if (only_active >= 0) lo = hi = only_active;
  for (int a = lo; a <= hi; ++a) {
    const double pa = only_active >= 0 ? 1.0 : binomial_pmf(op.devices, op.activation_prob, a);
    if (pa == 0.0) continue;
    const CollisionLaw coll{a, op.pilot_length};
    const TruncatedSupport cs = truncate_support(coll, eps_tail);
    for (int c = cs.lo; c <= cs.hi; ++c) {
      const double w = pa * a * collision_pmf(coll, c);
      if (w > 0.0) cells.push_back({a, c, w});
    }
  }
  return cells;
}

// MRC SINR bound from sums over the pilot group {0, C_0} and the rest.
// The middle term sum_i beta_i (1 + tau_p sum_{j in group, j != i} beta_j)
// equals S + tau_p (S^2 - Q) with S, Q the group sum and sum of squares.
inline double sinr1_from_sums(double beta_ref, double coll_sum, double coll_sq,
                              double others_sum, int pilot_length,
                              int antennas) {
  const double tm = static_cast<double>(pilot_length) * (antennas - 1);
  const double group = beta_ref + coll_sum;
  const double group_sq = beta_ref * beta_ref + coll_sq;
  const double den = tm * coll_sq + group +
                     pilot_length * (group * group - group_sq) +
                     (1.0 + others_sum) * (1.0 + pilot_length * group);
  return tm * beta_ref * beta_ref / den;
}

struct SampleStats {
  double mean = 0.0;
  double std_err = 0.0;
};

SampleStats summarize(const std::vector<double>& g) {
  const std::size_t n = g.size();
  SampleStats st;
  if (n == 0) return st;
  st.mean = pairwise_sum(g.data(), n) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (g[i] - st.mean) * (g[i] - st.mean);
    const double var = pairwise_sum(dev.data(), n) / static_cast<double>(n - 1);
    st.std_err = std::sqrt(var / static_cast<double>(n));
  }
  return st;
}

// Evaluates per-sample cell sums g(s) = sum_cells w * f(cell, s) in fixed
// chunks, so the reduction order never depends on the thread count.
template <class F>
std::vector<double> per_sample_sums(int samples, unsigned jobs, F&& f) {
  std::vector<double> g(static_cast<std::size_t>(samples), 0.0);
  const std::size_t chunks = (static_cast<std::size_t>(samples) + kSampleChunk - 1) / kSampleChunk;
  parallel_for(
      chunks,
      [&](std::size_t chunk) {
        const int first = static_cast<int>(chunk) * kSampleChunk;
        const int last = std::min(samples, first + kSampleChunk);
        for (int s = first; s < last; ++s) g[static_cast<std::size_t>(s)] = f(s);
      },
      jobs);
  return g;
}

void require_depth(const BetaBank& bank, const std::vector<Cell>& cells) {
  int need = 0;
  for (const Cell& c : cells) need = std::max(need, c.active - 1);
  if (bank.depth() < need) {
    throw std::invalid_argument("beta bank depth " + std::to_string(bank.depth()) +
                                " below required " + std::to_string(need));
  }
}

BoundResult r1_from_cells(const OperatingPoint& op, const BetaBank& bank,
                          const std::vector<Cell>& cells, unsigned jobs,
                          const double* fixed_ref) {
  require_depth(bank, cells);
  const double pre = prelog(op.slot_length, op.pilot_length);
  auto g = per_sample_sums(bank.samples(), jobs, [&](int s) {
    const double b0 = fixed_ref ? *fixed_ref : bank.reference(s);
    double acc = 0.0;
    for (const Cell& cell : cells) {
      const double coll_sum = bank.prefix_sum(s, cell.colliders);
      const double coll_sq = bank.prefix_sum_sq(s, cell.colliders);
      const double others = bank.prefix_sum(s, cell.active - 1) - coll_sum;
      const double sinr = sinr1_from_sums(b0, coll_sum, coll_sq, others,
                                          op.pilot_length, op.antennas);
      acc += cell.weight * std::log2(1.0 + sinr);
    }
    return pre * acc;
  });
  const SampleStats st = summarize(g);
  return {st.mean, BoundId::R1, bank.samples(), st.std_err};
}

}  // namespace

void validate(const OperatingPoint& op) {
  if (op.antennas < 2) throw std::invalid_argument("antennas: must be >= 2");
  if (op.devices < 1) throw std::invalid_argument("devices: must be >= 1");
  if (op.slot_length < 1) throw std::invalid_argument("slot_length: must be >= 1");
  if (op.pilot_length < 1 || op.pilot_length > op.slot_length) {
    throw std::invalid_argument("pilot_length: must lie in [1, slot_length]");
  }
  if (!(op.activation_prob >= 0.0 && op.activation_prob <= 1.0)) {
    throw std::invalid_argument("activation_prob: must lie in [0, 1]");
  }
}

std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::R1: return "R1";
    case BoundId::R2: return "R2";
    case BoundId::R3: return "R3";
    case BoundId::Ra: return "Ra";
  }
  return "?";
}

double prelog(int slot_length, int pilot_length) {
  if (pilot_length > slot_length) {
    throw std::domain_error("pilot length exceeds slot length");
  }
  return static_cast<double>(slot_length - pilot_length) / slot_length;
}

double rate_from_sinr(double sinr, int slot_length, int pilot_length) {
  return prelog(slot_length, pilot_length) * std::log2(1.0 + sinr);
}

double sinr1(const CollisionScenario& s, std::span<const double> others) {
  if (s.antennas < 2) throw std::domain_error("sinr1 needs at least 2 antennas");
  if (static_cast<int>(others.size()) + static_cast<int>(s.colliders.size()) + 1 != s.active) {
    throw std::invalid_argument("others must hold active - 1 - |colliders| gains");
  }
  double coll_sum = 0.0;
  double coll_sq = 0.0;
  for (double b : s.colliders) {
    coll_sum += b;
    coll_sq += b * b;
  }
  double others_sum = 0.0;
  for (double b : others) others_sum += b;
  return sinr1_from_sums(s.beta_ref, coll_sum, coll_sq, others_sum,
                         s.pilot_length, s.antennas);
}

SinrComponents sinr1_components(const CollisionScenario& s,
                                std::span<const double> others) {
  if (s.antennas < 2) throw std::domain_error("sinr1 needs at least 2 antennas");
  const double tp = s.pilot_length;
  double group = s.beta_ref;
  for (double b : s.colliders) group += b;
  // Variance of y_p = Y_p Phi^* and of the MMSE estimate of g_0.
  const double var_y = tp * group + 1.0;
  const double var_est = tp * s.beta_ref * s.beta_ref / var_y;
  const double scale = (s.antennas - 1) * var_est;

  SinrComponents out;
  double err_sum = s.beta_ref - tp * s.beta_ref * s.beta_ref / var_y;
  for (double b : s.colliders) {
    out.pilot_contamination += b * b;
    err_sum += b - tp * b * b / var_y;
  }
  out.pilot_contamination /= s.beta_ref * s.beta_ref;
  out.estimation_error = err_sum / scale;
  double rest = 1.0;
  for (double b : others) rest += b;
  out.residual_interference = rest / scale;
  return out;
}

double rate1(const CollisionScenario& s, std::span<const double> others,
             int slot_length) {
  return rate_from_sinr(sinr1(s, others), slot_length, s.pilot_length);
}

BetaBank::BetaBank(const LargeScaleModel& model, int samples, int depth,
                   std::uint64_t seed)
    : model_(model),
      samples_(is_deterministic(model) ? 1 : samples),
      depth_(depth) {
  if (samples < 1) throw std::invalid_argument("n_beta_samples must be >= 1");
  if (depth < 0) throw std::invalid_argument("bank depth must be >= 0");
  validate_model(model);
  const std::size_t row = static_cast<std::size_t>(depth_) + 1;
  reference_.resize(static_cast<std::size_t>(samples_));
  sums_.resize(row * static_cast<std::size_t>(samples_));
  sums_sq_.resize(row * static_cast<std::size_t>(samples_));
  for (int s = 0; s < samples_; ++s) {
    Rng rng(derive_seed(seed, kBankStream, static_cast<std::uint64_t>(s)));
    reference_[static_cast<std::size_t>(s)] = sample_beta(model_, rng);
    double sum = 0.0;
    double sum_sq = 0.0;
    sums_[index(s, 0)] = 0.0;
    sums_sq_[index(s, 0)] = 0.0;
    for (int n = 1; n <= depth_; ++n) {
      const double b = sample_beta(model_, rng);
      sum += b;
      sum_sq += b * b;
      sums_[index(s, n)] = sum;
      sums_sq_[index(s, n)] = sum_sq;
    }
  }
}

int required_bank_depth(const OperatingPoint& op, double eps_tail) {
  if (op.activation_prob <= 0.0) return 0;
  const TruncatedSupport act =
      truncate_support(ActivationLaw{op.devices, op.activation_prob}, eps_tail);
  return std::max(0, act.hi - 1);
}

BoundResult r1_bar(const OperatingPoint& op, const LargeScaleModel& model,
                   const McConfig& mc) {
  validate(op);
  const BetaBank bank(model, mc.n_beta_samples,
                      required_bank_depth(op, mc.eps_tail), mc.seed);
  return r1_bar(op, bank, mc.eps_tail);
}

BoundResult r1_bar(const OperatingPoint& op, const BetaBank& bank,
                   double eps_tail, unsigned jobs) {
  validate(op);
  g_r1_evaluations.fetch_add(1);
  if (op.activation_prob <= 0.0 || op.pilot_length == op.slot_length) {
    return {0.0, BoundId::R1, bank.samples(), 0.0};
  }
  return r1_from_cells(op, bank, activity_cells(op, eps_tail), jobs, nullptr);
}

BoundResult r1_given_active(const OperatingPoint& op, const BetaBank& bank,
                            int active, double eps_tail) {
  validate(op);
  if (active < 1 || active > op.devices) {
    throw std::domain_error("active count outside [1, devices]");
  }
  if (op.pilot_length == op.slot_length) return {0.0, BoundId::R1, bank.samples(), 0.0};
  OperatingPoint all = op;
  all.activation_prob = 1.0;  // only used to enable cell construction
  return r1_from_cells(op, bank, activity_cells(all, eps_tail, active), 0, nullptr);
}

BoundResult per_device_rate(const OperatingPoint& op,
                            const LargeScaleModel& model, double beta_ref,
                            const McConfig& mc) {
  validate(op);
  if (op.activation_prob <= 0.0 || op.pilot_length == op.slot_length) {
    return {0.0, BoundId::R1, 0, 0.0};
  }
  const BetaBank bank(model, mc.n_beta_samples,
                      required_bank_depth(op, mc.eps_tail), mc.seed);
  BoundResult r = r1_from_cells(op, bank, activity_cells(op, mc.eps_tail), 0, &beta_ref);
  r.value /= op.devices;
  r.mc_std_err /= op.devices;
  return r;
}

double sinr2(int colliders, int active, double beta_ref,
             const BetaMoments& moments, int pilot_length, int antennas) {
  if (antennas < 2) throw std::domain_error("sinr2 needs at least 2 antennas");
  if (colliders < 0 || colliders > active - 1) {
    throw std::domain_error("collider count outside [0, active - 1]");
  }
  const double c = colliders;
  const double tp = pilot_length;
  const double mb = moments.mean;
  const double den = tp * (antennas - 1) * moments.mean_sq * c +
                     beta_ref * (1.0 + tp * c * mb) - c * mb * mb * tp +
                     (1.0 + (active - 1) * mb) * (1.0 + beta_ref * tp + tp * c * mb);
  if (!(den > 0.0)) throw std::logic_error("sinr2 denominator not positive");
  return tp * (antennas - 1) * beta_ref * beta_ref / den;
}

BoundResult r2_bar(const OperatingPoint& op, const LargeScaleModel& model,
                   const McConfig& mc) {
  validate(op);
  const BetaBank bank(model, mc.n_beta_samples, 0, mc.seed);
  return r2_bar(op, bank, mc.eps_tail);
}

BoundResult r2_bar(const OperatingPoint& op, const BetaBank& bank,
                   double eps_tail, unsigned jobs) {
  validate(op);
  if (op.activation_prob <= 0.0 || op.pilot_length == op.slot_length) {
    return {0.0, BoundId::R2, bank.samples(), 0.0};
  }
  const BetaMoments mom = analytic_moments(bank.model());
  const std::vector<Cell> cells = activity_cells(op, eps_tail);
  const double pre = prelog(op.slot_length, op.pilot_length);
  auto g = per_sample_sums(bank.samples(), jobs, [&](int s) {
    const double b0 = bank.reference(s);
    double acc = 0.0;
    for (const Cell& cell : cells) {
      acc += cell.weight *
             std::log2(1.0 + sinr2(cell.colliders, cell.active, b0, mom,
                                   op.pilot_length, op.antennas));
    }
    return pre * acc;
  });
  const SampleStats st = summarize(g);
  return {st.mean, BoundId::R2, bank.samples(), st.std_err};
}

double sinr3(double beta_ref, const BetaMoments& moments, int pilot_length,
             double activation_prob, int devices, int antennas) {
  if (antennas < 2) throw std::domain_error("sinr3 needs at least 2 antennas");
  const double pk = activation_prob * devices;
  if (pk < 1.0 - 1e-12) {
    throw std::domain_error(
        "sinr3 requires p_a K >= 1; evaluate r1_bar directly for lighter load");
  }
  const double x = pk - 1.0;  // mean number of other active devices
  const double tp = pilot_length;
  const double mb = moments.mean;
  const double mb2 = mb * mb;
  const double second =
      activation_prob * activation_prob * devices * (devices - 1.0) - x;
  const double den = moments.mean_sq * (antennas - 1) * x +
                     beta_ref * (1.0 + mb * x) - mb2 * x +
                     (1.0 + x * mb) * (1.0 + beta_ref * tp) + x * mb +
                     mb2 * second;
  return tp * (antennas - 1) * beta_ref * beta_ref / den;
}

BoundResult r3(const OperatingPoint& op, const LargeScaleModel& model) {
  validate(op);
  validate_model(model);
  const double pk = op.mean_active();
  if (pk <= 0.0 || op.pilot_length == op.slot_length) return {0.0, BoundId::R3, 0, 0.0};
  const BetaMoments mom = analytic_moments(model);
  const double e = expect_over_beta(model, [&](double b0) {
    return std::log2(1.0 + sinr3(b0, mom, op.pilot_length, op.activation_prob,
                                 op.devices, op.antennas));
  });
  return {prelog(op.slot_length, op.pilot_length) * pk * e, BoundId::R3, 0, 0.0};
}

double sinra(double beta_ref, const BetaMoments& moments, int pilot_length,
             double mean_active, int antennas) {
  if (!(mean_active > 0.0)) throw std::domain_error("sinra requires p_a K > 0");
  const double m = antennas;
  const double tp = pilot_length;
  const double p = mean_active;
  return m * tp * beta_ref * beta_ref /
         (moments.mean_sq * m * p + moments.mean * moments.mean * p * p +
          moments.mean * beta_ref * p * tp);
}

SinraTerms sinra_terms(double beta_ref, const BetaMoments& moments,
                       int pilot_length, double mean_active, int antennas) {
  if (!(mean_active > 0.0)) throw std::domain_error("sinra requires p_a K > 0");
  const double m = antennas;
  const double tp = pilot_length;
  const double p = mean_active;
  const double b2 = beta_ref * beta_ref;
  SinraTerms t;
  t.pilot_collision = moments.mean_sq * p / (tp * b2);
  t.residual_users = moments.mean * moments.mean * p * p / (m * tp * b2);
  t.residual_self = moments.mean * beta_ref * p / (m * b2);
  return t;
}

BoundResult ra(const OperatingPoint& op, const LargeScaleModel& model) {
  validate(op);
  validate_model(model);
  const double pk = op.mean_active();
  if (pk <= 0.0 || op.pilot_length == op.slot_length) return {0.0, BoundId::Ra, 0, 0.0};
  const BetaMoments mom = analytic_moments(model);
  const double e = expect_over_beta(model, [&](double b0) {
    return std::log2(1.0 + sinra(b0, mom, op.pilot_length, pk, op.antennas));
  });
  return {prelog(op.slot_length, op.pilot_length) * pk * e, BoundId::Ra, 0, 0.0};
}

long r1_evaluation_count() { return g_r1_evaluations.load(); }
void reset_r1_evaluation_count() { g_r1_evaluations.store(0); }

}  // namespace rpda
