/*
 * Copyright 2026 The siasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "siasim/linksim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <algorithm>
#include <limits>
#include <numeric>

#include "siasim/errors.hpp"

namespace siasim {

namespace {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

constexpr std::uint64_t kFrameTag = 0x6c696e6b;
constexpr std::uint64_t kProbeTag = 0x70726f62;

template <FloatScalar S>
constexpr double rate_factor() {
  return ScalarTraits<S>::kind == RingKind::kReal ? 0.5 : 1.0;
}

template <FloatScalar S>
Mat<S> normalized_basis(const PrecodingBasis<S>& basis) {
  const auto rows = static_cast<Eigen::Index>(basis.dim());
  const auto cols = static_cast<Eigen::Index>(basis.size());
  Mat<S> out(rows, cols);
  basis.compute_columns(0, basis.size(), std::span<S>(out.data(), static_cast<std::size_t>(rows * cols)));
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double norm = out.col(c).norm();
    if (norm == 0.0) throw DegenerateRealization("precoder column " + std::to_string(c) + " is zero");
    out.col(c) /= norm;
  }
  return out;
}

template <FloatScalar S>
struct Precoders {
  std::vector<Mat<S>> base;  // per stream, unit-norm columns
  std::vector<Mat<S>> next;
};

template <FloatScalar S>
Precoders<S> make_precoders(const Scheme<S>& scheme) {
  Precoders<S> p;
  for (const auto& b : scheme.bases.base) p.base.push_back(normalized_basis(b));
  for (const auto& b : scheme.bases.next) p.next.push_back(normalized_basis(b));
  return p;
}

template <FloatScalar S>
struct SubspaceModel {
  Mat<S> nulling;         // orthonormal basis of the complement of the interference span
  Vec<double> noise;      // diagonal noise covariance of the combined subspace
  Mat<S> channel;         // projected effective channel of the desired stream, unit power
  Mat<S> whitened;        // channel after whitening the projected noise
  Eigen::LLT<Mat<S>> noise_chol;
};

template <FloatScalar S>
Vec<S> to_vec(const DiagonalOperator<S>& d) {
  Vec<S> v(static_cast<Eigen::Index>(d.dim()));
  for (std::size_t t = 0; t < d.dim(); ++t) v[static_cast<Eigen::Index>(t)] = d[t];
  return v;
}

template <FloatScalar S>
std::vector<SubspaceModel<S>> decoder_model(const Scheme<S>& scheme, const Precoders<S>& pre, int k) {
  const auto& proc = scheme.processed[static_cast<std::size_t>(k)];
  const int M = scheme.params.M;
  const auto lambda = static_cast<Eigen::Index>(proc.state.dim);

  const Vec<S> tk = to_vec(proc.Tk);
  Eigen::Index span_cols = 0;
  for (const auto& f : pre.next) span_cols += f.cols();
  Mat<S> span(lambda, span_cols);
  Eigen::Index at = 0;
  for (const auto& f : pre.next) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      Vec<S> col = tk.cwiseProduct(f.col(c));
      span.col(at++) = col / col.norm();
    }
  }
  Eigen::ColPivHouseholderQR<Mat<S>> qr(span);
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  const Mat<S> q = qr.householderQ() * Mat<S>::Identity(lambda, lambda);
  const Mat<S> nulling = q.rightCols(lambda - r);

  std::vector<SubspaceModel<S>> out(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    auto& sm = out[static_cast<std::size_t>(m)];
    const auto& row = proc.state.rows[static_cast<std::size_t>(m)];
    sm.nulling = nulling;
    sm.noise = Vec<double>::Zero(lambda);
    for (const auto& c : row.combiner) {
      for (Eigen::Index t = 0; t < lambda; ++t) sm.noise[t] += std::norm(c[static_cast<std::size_t>(t)]);
    }
    const Vec<S> g = to_vec(row.desired);
    sm.channel = nulling.adjoint() * g.asDiagonal() * pre.base[static_cast<std::size_t>(m)];
    const Mat<S> w = nulling.adjoint() * sm.noise.template cast<S>().asDiagonal() * nulling;
    sm.noise_chol.compute(w);
    sm.whitened = sm.noise_chol.matrixL().solve(sm.channel);
  }
  return out;
}

template <FloatScalar S>
double amplitude_for(const SchemeParams& params, double snr) {
  return std::sqrt(snr * static_cast<double>(params.extension_length()) /
                   (static_cast<double>(params.M) * static_cast<double>(params.stream_count(Level::kBase))));
}

template <FloatScalar S>
TransmitFrame<S> frame_from(const SchemeParams& params, const Precoders<S>& pre, double snr,
                            std::vector<std::vector<std::vector<S>>> symbols) {
  const double a = amplitude_for<S>(params, snr);
  const auto lambda = static_cast<Eigen::Index>(params.extension_length());
  TransmitFrame<S> f;
  f.symbols = std::move(symbols);
  if (static_cast<int>(f.symbols.size()) != params.K) throw InvalidArgument("symbols: expected one entry per user");
  for (const auto& user : f.symbols) {
    if (static_cast<int>(user.size()) != params.M) throw InvalidArgument("symbols: expected one vector per stream");
    Vec<S> x = Vec<S>::Zero(lambda);
    for (int j = 0; j < params.M; ++j) {
      const auto& s = user[static_cast<std::size_t>(j)];
      const auto& fj = pre.base[static_cast<std::size_t>(j)];
      if (static_cast<Eigen::Index>(s.size()) != fj.cols()) throw InvalidArgument("symbols: stream length must be mu_n");
      x += fj * Eigen::Map<const Vec<S>>(s.data(), fj.cols());
    }
    x *= S(a);
    f.x.emplace_back(x.data(), x.data() + lambda);
  }
  return f;
}

template <FloatScalar S>
std::vector<std::vector<std::vector<S>>> random_symbols(const SchemeParams& params, Rng& rng) {
  const auto mu = params.stream_count(Level::kBase);
  std::vector<std::vector<std::vector<S>>> out(static_cast<std::size_t>(params.K));
  for (auto& user : out) {
    user.assign(static_cast<std::size_t>(params.M), std::vector<S>(mu));
    for (auto& stream : user) {
      for (auto& s : stream) s = sample_gaussian<S>(rng);
    }
  }
  return out;
}

template <FloatScalar S>
void check_link_size(const Scheme<S>& scheme, std::size_t bound) {
  if (!scheme.params.materializable) throw ResourceLimit("link simulation: extension length is not materializable");
  const auto lambda = scheme.params.extension_length();
  if (lambda > bound) {
    throw ResourceLimit("link simulation: extension length " + std::to_string(lambda) + " exceeds bound " +
                        std::to_string(bound));
  }
}

template <FloatScalar S>
Vec<S> projected(const SubspaceModel<S>& sm, const std::vector<S>& y) {
  return sm.nulling.adjoint() * Eigen::Map<const Vec<S>>(y.data(), static_cast<Eigen::Index>(y.size()));
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

template <FloatScalar S>
TransmitFrame<S> make_transmit_frame(const Scheme<S>& scheme, double snr,
                                     std::vector<std::vector<std::vector<S>>> symbols) {
  if (!(snr >= 0.0)) throw InvalidArgument("snr must be nonnegative");
  return frame_from(scheme.params, make_precoders(scheme), snr, std::move(symbols));
}

template <FloatScalar S>
TransmitFrame<S> random_transmit_frame(const Scheme<S>& scheme, double snr, Rng& rng) {
  return make_transmit_frame(scheme, snr, random_symbols<S>(scheme.params, rng));
}

template <FloatScalar S>
ReceiveFrame<S> propagate(const Scheme<S>& scheme, const TransmitFrame<S>& frame, Rng* noise) {
  const int K = scheme.params.K;
  const std::size_t lambda = scheme.channels.dim;
  ReceiveFrame<S> out;
  out.y.assign(static_cast<std::size_t>(K), std::vector<S>(lambda, S(0)));
  for (int r = 0; r < K; ++r) {
    auto& y = out.y[static_cast<std::size_t>(r)];
    for (int i = 0; i < K; ++i) {
      const auto& h = scheme.channels(r, i);
      const auto& x = frame.x[static_cast<std::size_t>(i)];
      for (std::size_t t = 0; t < lambda; ++t) y[t] += h[t] * x[t];
    }
    if (noise != nullptr) {
      for (auto& v : y) v += sample_gaussian<S>(*noise);
    }
  }
  return out;
}

template <FloatScalar S>
std::vector<S> combine_subspace(const Scheme<S>& scheme, const ReceiveFrame<S>& frame, int k, int subspace) {
  if (k < 0 || k >= scheme.params.K) throw InvalidArgument("decoder index out of range");
  if (subspace < 0 || subspace >= scheme.params.M) throw InvalidArgument("subspace index out of range");
  const auto& st = scheme.processed[static_cast<std::size_t>(k)].state;
  const auto& row = st.rows[static_cast<std::size_t>(subspace)];
  std::vector<S> out(st.dim, S(0));
  for (std::size_t q = 0; q < row.combiner.size(); ++q) {
    const auto& y = frame.y[static_cast<std::size_t>(st.receivers[q])];
    for (std::size_t t = 0; t < st.dim; ++t) out[t] += row.combiner[q][t] * y[t];
  }
  return out;
}

template <FloatScalar S>
RateReport run_link(const Scheme<S>& scheme, const std::vector<double>& snr_linear, const LinkOptions& options) {
  check_link_size(scheme, options.lambda_bound);
  if (options.noise_realizations < 0) throw InvalidArgument("noise realizations must be nonnegative");
  for (double snr : snr_linear) {
    if (!(snr >= 0.0) || !std::isfinite(snr)) throw InvalidArgument("snr must be finite and nonnegative");
  }
  const auto& params = scheme.params;
  const int K = params.K;
  const int M = params.M;
  const double lambda = static_cast<double>(params.extension_length());
  const auto pre = make_precoders(scheme);

  std::vector<std::vector<SubspaceModel<S>>> models(static_cast<std::size_t>(K));
  parallel_for(options.pool, static_cast<std::size_t>(K), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) models[k] = decoder_model(scheme, pre, static_cast<int>(k));
  });

  RateReport report;
  report.target_slope = rate_factor<S>() * static_cast<double>(K * M) *
                        static_cast<double>(params.stream_count(Level::kBase)) / lambda;
  report.points.resize(snr_linear.size());
  for (std::size_t p = 0; p < snr_linear.size(); ++p) {
    report.points[p].snr = snr_linear[p];
    report.points[p].user_rates.assign(static_cast<std::size_t>(K), 0.0);
    report.points[p].subspaces.resize(static_cast<std::size_t>(K * M));
  }

  const std::size_t jobs = snr_linear.size() * static_cast<std::size_t>(K);
  parallel_for(options.pool, jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t job = begin; job < end; ++job) {
      const std::size_t p = job / static_cast<std::size_t>(K);
      const int k = static_cast<int>(job % static_cast<std::size_t>(K));
      const double snr = snr_linear[p];
      const double a = amplitude_for<S>(params, snr);
      auto& point = report.points[p];

      for (int m = 0; m < M; ++m) {
        const auto& sm = models[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
        auto& link = point.subspaces[static_cast<std::size_t>(k * M + m)];
        link.decoder = k;
        link.subspace = m;
        Eigen::JacobiSVD<Mat<S>> svd(sm.channel);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv[0] : 0.0;
        const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
        link.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
        link.rank_deficient = sm.noise_chol.info() != Eigen::Success || !(smin > options.rank_threshold * smax);
        if (link.rank_deficient) continue;
        const auto mu = sm.channel.cols();
        const Mat<S> gram = sm.whitened.adjoint() * sm.whitened;
        const Mat<S> info = Mat<S>::Identity(mu, mu) + S(a * a) * gram;
        Eigen::LLT<Mat<S>> chol(info);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < mu; ++i) logdet += 2.0 * std::log2(std::abs(chol.matrixL()(i, i)));
        link.rate_bits = rate_factor<S>() * logdet;
        if (snr > 0.0) {
          const Mat<S> inv = gram.inverse();
          link.predicted_mse = std::abs(inv.trace()) / (a * a * static_cast<double>(mu));
        }
      }

      if (snr == 0.0 || options.noise_realizations == 0) continue;
      std::vector<double> err(static_cast<std::size_t>(M), 0.0);
      for (int rz = 0; rz < options.noise_realizations; ++rz) {
        Rng rng(derive_seed(options.seed, {kFrameTag, p, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(rz)}));
        const auto frame = frame_from(params, pre, snr, random_symbols<S>(params, rng));
        const auto rx = propagate(scheme, frame, &rng);
        for (int m = 0; m < M; ++m) {
          const auto& link = point.subspaces[static_cast<std::size_t>(k * M + m)];
          if (link.rank_deficient) continue;
          const auto& sm = models[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
          const Vec<S> z = sm.noise_chol.matrixL().solve(projected(sm, combine_subspace(scheme, rx, k, m)));
          const Vec<S> est = sm.whitened.colPivHouseholderQr().solve(z) / S(a);
          const auto& truth = frame.symbols[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
          err[static_cast<std::size_t>(m)] +=
              (est - Eigen::Map<const Vec<S>>(truth.data(), est.size())).squaredNorm() / static_cast<double>(est.size());
        }
      }
      for (int m = 0; m < M; ++m) {
        point.subspaces[static_cast<std::size_t>(k * M + m)].empirical_mse =
            err[static_cast<std::size_t>(m)] / options.noise_realizations;
      }
    }
  });

  std::vector<double> sums;
  for (auto& point : report.points) {
    for (const auto& link : point.subspaces) point.user_rates[static_cast<std::size_t>(link.decoder)] += link.rate_bits;
    for (auto& r : point.user_rates) r /= lambda;
    point.sum_rate = std::accumulate(point.user_rates.begin(), point.user_rates.end(), 0.0);
    sums.push_back(point.sum_rate);
  }
  try {
    report.fit = estimate_dof_slope(snr_linear, sums);
  } catch (const InvalidArgument&) {
    report.fit.reset();
  }
  return report;
}

SlopeFit estimate_dof_slope(const std::vector<double>& snr_linear, const std::vector<double>& sum_rates) {
  if (snr_linear.size() != sum_rates.size()) throw InvalidArgument("slope fit: snr and rate counts differ");
  if (snr_linear.size() < 3) throw InvalidArgument("slope fit: at least 3 points required");
  std::vector<double> x;
  for (double s : snr_linear) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("slope fit: snr must be positive");
    x.push_back(std::log2(s));
  }
  const auto [lo, hi] = std::minmax_element(snr_linear.begin(), snr_linear.end());
  if (10.0 * std::log10(*hi / *lo) < 20.0 - 1e-9) throw InvalidArgument("slope fit: points must span at least 20 dB");

  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(sum_rates.begin(), sum_rates.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (sum_rates[i] - my);
  }
  SlopeFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = sum_rates[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

template <FloatScalar S>
LeakageProbe probe_leakage(const Scheme<S>& scheme, std::uint64_t seed, int trials, double amplitude_tolerance) {
  check_link_size(scheme, std::max(kDefaultLinkLambdaBound, scheme.params.extension_length()));
  const auto& params = scheme.params;
  const auto pre = make_precoders(scheme);
  LeakageProbe probe;
  for (int k = 0; k < params.K; ++k) {
    const auto models = decoder_model(scheme, pre, k);
    for (int trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, {kProbeTag, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(trial)}));
      auto symbols = random_symbols<S>(params, rng);
      auto silent = symbols;
      for (auto& s : silent[static_cast<std::size_t>(k)]) std::fill(s.begin(), s.end(), S(0));
      auto redrawn = random_symbols<S>(params, rng);
      redrawn[static_cast<std::size_t>(k)] = symbols[static_cast<std::size_t>(k)];

      const auto rx_silent = propagate(scheme, frame_from(params, pre, 1.0, silent), nullptr);
      const auto rx_a = propagate(scheme, frame_from(params, pre, 1.0, symbols), nullptr);
      const auto rx_b = propagate(scheme, frame_from(params, pre, 1.0, redrawn), nullptr);
      for (int m = 0; m < params.M; ++m) {
        const auto& sm = models[static_cast<std::size_t>(m)];
        const auto y = combine_subspace(scheme, rx_silent, k, m);
        const double in = Eigen::Map<const Vec<S>>(y.data(), static_cast<Eigen::Index>(y.size())).norm();
        const double out = projected(sm, y).norm();
        const double amp = in > 0.0 ? out / in : 0.0;
        probe.worst_amplitude = std::max(probe.worst_amplitude, amp);
        probe.worst_energy = std::max(probe.worst_energy, amp * amp);
        const Vec<S> pa = projected(sm, combine_subspace(scheme, rx_a, k, m));
        const Vec<S> pb = projected(sm, combine_subspace(scheme, rx_b, k, m));
        const double ref = pa.norm();
        probe.worst_symbol_sensitivity =
            std::max(probe.worst_symbol_sensitivity, ref > 0.0 ? (pa - pb).norm() / ref : 0.0);
      }
    }
  }
  probe.passed = probe.worst_amplitude <= amplitude_tolerance && probe.worst_energy <= 1e-18 &&
                 probe.worst_symbol_sensitivity <= amplitude_tolerance;
  return probe;
}

#define SIASIM_INSTANTIATE(S)                                                                                      \
  template TransmitFrame<S> make_transmit_frame(const Scheme<S>&, double, std::vector<std::vector<std::vector<S>>>); \
  template TransmitFrame<S> random_transmit_frame(const Scheme<S>&, double, Rng&);                                 \
  template ReceiveFrame<S> propagate(const Scheme<S>&, const TransmitFrame<S>&, Rng*);                             \
  template std::vector<S> combine_subspace(const Scheme<S>&, const ReceiveFrame<S>&, int, int);                    \
  template RateReport run_link(const Scheme<S>&, const std::vector<double>&, const LinkOptions&);                  \
  template LeakageProbe probe_leakage(const Scheme<S>&, std::uint64_t, int, double);

SIASIM_INSTANTIATE(double)
SIASIM_INSTANTIATE(Complex)

}  // namespace siasim
