// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/channel_models.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rpda {
namespace {

constexpr double kDbToNeper = std::numbers::ln10 / 10.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// E[(1 + v)^n], v ~ U[-a, a]: only even powers of v survive.
double uniform_poly_moment(double a, int n) {
  double sum = 0.0;
  double binom = 1.0;  // C(n, k)
  for (int k = 0; k <= n; ++k) {
    if (k % 2 == 0) sum += binom * std::pow(a, k) / (k + 1);
    binom = binom * (n - k) / (k + 1);
  }
  return sum;
}

// E[(1 + v)^(-s)], v ~ U[-a, a], a in [0, 1).
double uniform_power_moment(double a, double s) {
  if (a == 0.0) return 1.0;
  const double gap = std::log1p(-a) - std::log1p(a);  // < 0
  if (std::abs(s - 1.0) < 1e-12) return -gap / (2.0 * a);
  const double q = 1.0 - s;
  // (1-a)^q - (1+a)^q, written to avoid cancellation for small a.
  const double diff = std::exp(q * std::log1p(a)) * std::expm1(q * gap);
  return diff / (2.0 * a * (s - 1.0));
}

template <int Points>
double composite_gauss(const std::function<double(double)>& g, double lo,
                       double hi, int panels) {
  using Rule = boost::math::quadrature::gauss<double, Points>;
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double b = p + 1 == panels ? hi : a + width;
    total += Rule::integrate(g, a, b);
  }
  return total;
}

}  // namespace

void validate_model(const LargeScaleModel& model) {
  std::visit(
      Overloaded{
          [](const UniformPowerError& m) {
            if (!(m.delta_bar > 0.0))
              throw std::invalid_argument("delta_bar must be positive");
            if (!(m.alpha >= 0.0 && m.alpha <= 1.0))
              throw std::invalid_argument("alpha must lie in [0, 1]");
          },
          [](const LogNormalShadowing& m) {
            if (!(m.delta_bar > 0.0))
              throw std::invalid_argument("delta_bar must be positive");
            if (!(m.sigma_v2 >= 0.0))
              throw std::invalid_argument("sigma_v2 must be non-negative");
          },
          [](const UniformDistance& m) {
            if (!(m.delta_bar > 0.0))
              throw std::invalid_argument("delta_bar must be positive");
            if (!(m.alpha >= 0.0 && m.alpha < 1.0))
              throw std::invalid_argument("alpha must lie in [0, 1)");
            if (!(m.d0 > 0.0)) throw std::invalid_argument("d0 must be positive");
            if (!(m.pathloss_exp > 0.0))
              throw std::invalid_argument("pathloss exponent must be positive");
          },
      },
      model);
}

bool is_deterministic(const LargeScaleModel& model) {
  return std::visit(
      Overloaded{
          [](const UniformPowerError& m) { return m.alpha == 0.0; },
          [](const LogNormalShadowing& m) { return m.sigma_v2 == 0.0; },
          [](const UniformDistance& m) { return m.alpha == 0.0; },
      },
      model);
}

std::string describe(const LargeScaleModel& model) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const UniformPowerError& m) {
                   os << "model1(delta_bar=" << m.delta_bar
                      << ", alpha=" << m.alpha << ")";
                 },
                 [&](const LogNormalShadowing& m) {
                   os << "model2(delta_bar=" << m.delta_bar
                      << ", sigma_v2=" << m.sigma_v2 << ")";
                 },
                 [&](const UniformDistance& m) {
                   os << "model3(delta_bar=" << m.delta_bar
                      << ", alpha=" << m.alpha << ", d0=" << m.d0
                      << ", pathloss_exp=" << m.pathloss_exp << ")";
                 },
             },
             model);
  return os.str();
}

double sample_beta(const LargeScaleModel& model, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const UniformPowerError& m) {
            if (m.alpha == 0.0) return m.delta_bar;
            return m.delta_bar * (1.0 + rng.uniform(-m.alpha, m.alpha));
          },
          [&](const LogNormalShadowing& m) {
            if (m.sigma_v2 == 0.0) return m.delta_bar;
            const double v = std::sqrt(m.sigma_v2) * rng.normal();
            return m.delta_bar * std::pow(10.0, v / 10.0);
          },
          [&](const UniformDistance& m) {
            if (m.alpha == 0.0) return m.delta_bar;
            const double d = m.d0 * (1.0 + rng.uniform(-m.alpha, m.alpha));
            return m.delta_bar * std::pow(d / m.d0, -m.pathloss_exp);
          },
      },
      model);
}

double raw_moment(const LargeScaleModel& model, int order) {
  return std::visit(
      Overloaded{
          [&](const UniformPowerError& m) {
            return std::pow(m.delta_bar, order) *
                   uniform_poly_moment(m.alpha, order);
          },
          [&](const LogNormalShadowing& m) {
            const double n = order;
            return std::pow(m.delta_bar, order) *
                   std::exp(0.5 * n * n * kDbToNeper * kDbToNeper *
                            m.sigma_v2);
          },
          [&](const UniformDistance& m) {
            return std::pow(m.delta_bar, order) *
                   uniform_power_moment(m.alpha, order * m.pathloss_exp);
          },
      },
      model);
}

BetaMoments analytic_moments(const LargeScaleModel& model) {
  return {raw_moment(model, 1), raw_moment(model, 2), raw_moment(model, 4)};
}

double expect_over_beta(const LargeScaleModel& model,
                        const std::function<double(double)>& f) {
  return std::visit(
      Overloaded{
          [&](const UniformPowerError& m) {
            if (m.alpha == 0.0) return f(m.delta_bar);
            auto g = [&](double v) { return f(m.delta_bar * (1.0 + v)); };
            return composite_gauss<20>(g, -m.alpha, m.alpha, 4) /
                   (2.0 * m.alpha);
          },
          [&](const LogNormalShadowing& m) {
            if (m.sigma_v2 == 0.0) return f(m.delta_bar);
            const double sd = std::sqrt(m.sigma_v2);
            const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
            auto g = [&](double v) {
              const double z = v / sd;
              return norm * std::exp(-0.5 * z * z) *
                     f(m.delta_bar * std::pow(10.0, v / 10.0));
            };
            return composite_gauss<20>(g, -8.5 * sd, 8.5 * sd, 16);
          },
          [&](const UniformDistance& m) {
            if (m.alpha == 0.0) return f(m.delta_bar);
            auto g = [&](double v) {
              return f(m.delta_bar * std::pow(1.0 + v, -m.pathloss_exp));
            };
            return composite_gauss<20>(g, -m.alpha, m.alpha, 16) /
                   (2.0 * m.alpha);
          },
      },
      model);
}

ChannelRealization sample_channels(std::span<const double> betas, int antennas,
                                   Rng& rng) {
  if (antennas < 1) throw std::invalid_argument("antenna count must be >= 1");
  ChannelRealization out;
  out.betas.assign(betas.begin(), betas.end());
  out.gains.resize(antennas, static_cast<Eigen::Index>(betas.size()));
  for (Eigen::Index j = 0; j < out.gains.cols(); ++j) {
    for (Eigen::Index m = 0; m < antennas; ++m) {
      out.gains(m, j) = rng.complex_normal(betas[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace rpda
