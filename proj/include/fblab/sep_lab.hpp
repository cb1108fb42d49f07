// fblab/sep_lab.hpp

// Copyright 2026 The fblab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fblab/codec.hpp"
#include "fblab/dsp_core.hpp"
#include "fblab/erb.hpp"
#include "fblab/error.hpp"
#include "fblab/filterbank.hpp"
#include "fblab/gammatone.hpp"
#include "fblab/wav.hpp"

namespace fblab {

struct SiSnrResult {
  double value_db = 0.0;
  double target_energy = 0.0;
  double noise_energy = 0.0;
};

/// Scale-invariant SNR without mean removal:
///   s_t = <est, ref> ref / |ref|^2,  e = est - s_t,  10 log10(|s_t|^2 / |e|^2).
///
/// Both signals are first divided by their peak magnitudes. Any positive
/// scale factor that maps the estimate exactly onto another double then
/// cancels to the last bit, and an estimate proportional to the reference
/// projects with no residual.
inline SiSnrResult si_snr(const Waveform &estimate, const Waveform &reference) {
  detail::require(estimate.size() == reference.size(), "si_snr: length mismatch");
  auto peak_of = [](const Waveform &w) {
    double peak = 0.0;
    for (double v : w.samples()) peak = std::max(peak, std::abs(v));
    return peak;
  };
  const double ref_peak = peak_of(reference);
  if (!(ref_peak > 0.0)) throw InvalidArgument("si_snr: zero-energy reference");
  const double peak = peak_of(estimate);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (peak == 0.0) return {-inf, 0.0, 0.0};

  const std::size_t n = estimate.size();
  std::vector<double> est(n), ref(n);
  for (std::size_t i = 0; i < n; ++i) {
    est[i] = estimate[i] / peak;
    ref[i] = reference[i] / ref_peak;
  }
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += est[i] * ref[i];
    ref_energy += ref[i] * ref[i];
  }
  const double beta = dot / ref_energy;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = beta * ref[i];
    const double e = est[i] - t;
    target += t * t;
    noise += e * e;
  }
  SiSnrResult r;
  r.value_db = noise > 0.0 ? 10.0 * std::log10(target / noise) : inf;
  r.target_energy = target * peak * peak;
  r.noise_energy = noise * peak * peak;
  return r;
}

/// Items scoring above this are clipped before averaging into a loss.
inline constexpr double kSiSnrClipDb = 60.0;

inline double clip_si_snr(double db) { return std::min(db, kSiSnrClipDb); }

/// Ideal ratio masks m_c = E_c / sum E over the C sources. E_c(n, i) is the
/// magnitude of source c's linear-mode encoding in the time-frequency bin of
/// row n (root of the summed power over the rows sharing that bin, see
/// tf_bins). Cells where every source is zero get 1/C. The last mask is one
/// minus the others so the masks sum to one.
inline std::vector<Mask> oracle_irm_masks(const std::vector<Waveform> &sources, const Filterbank &bank,
                                          const FrameParams &p) {
  detail::require(sources.size() >= 2, "oracle masks need at least two sources");
  for (const auto &s : sources) {
    detail::require(s.size() == sources.front().size(), "sources must have equal lengths");
    detail::require(s.sample_rate() == sources.front().sample_rate(), "sources must share a sample rate");
  }
  const std::size_t C = sources.size();
  const std::vector<int> bins = tf_bins(bank);
  const int num_bins = bins.empty() ? 0 : *std::max_element(bins.begin(), bins.end()) + 1;
  std::vector<Matrix> mag;
  mag.reserve(C);
  for (const auto &s : sources) {
    const Matrix x = encode(s, bank, p, false).values;
    Matrix power = Matrix::Zero(num_bins, x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) power.row(bins[static_cast<std::size_t>(r)]) += x.row(r).cwiseAbs2();
    const Matrix bin_mag = power.cwiseSqrt();
    Matrix m(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) m.row(r) = bin_mag.row(bins[static_cast<std::size_t>(r)]);
    mag.push_back(std::move(m));
  }
  Matrix total = mag[0];
  for (std::size_t c = 1; c < C; ++c) total += mag[c];

  std::vector<Mask> masks(C, Mask{Matrix(total.rows(), total.cols())});
  for (Eigen::Index i = 0; i < total.cols(); ++i)
    for (Eigen::Index n = 0; n < total.rows(); ++n) {
      const double denom = total(n, i);
      double used = 0.0;
      for (std::size_t c = 0; c + 1 < C; ++c) {
        const double m = denom > 0.0 ? mag[c](n, i) / denom : 1.0 / static_cast<double>(C);
        masks[c].values(n, i) = m;
        used += m;
      }
      masks[C - 1].values(n, i) = std::clamp(1.0 - used, 0.0, 1.0);
    }
  return masks;
}

/// Encodes the mixture, applies each mask and decodes every estimate,
/// trimmed to the mixture length.
inline std::vector<Waveform> separate_with_masks(const Waveform &mixture, const std::vector<Mask> &masks,
                                                 const Filterbank &enc_bank, const Filterbank &dec_bank,
                                                 const FrameParams &p, bool apply_relu) {
  const TFRepresentation rep = encode(mixture, enc_bank, p, apply_relu);
  std::vector<Waveform> estimates;
  estimates.reserve(masks.size());
  for (const auto &m : masks) estimates.push_back(decode(apply_mask(rep, m), dec_bank).resized(mixture.size()));
  return estimates;
}

struct ItemResult {
  std::string item_id;
  std::vector<double> si_snr_db;
  /// SI-SNR of the unprocessed mixture against each source.
  std::vector<double> mixture_si_snr_db;
};

struct TraceRow {
  int iter = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
};

struct ExperimentReport {
  std::vector<ItemResult> per_item;
  double mean_si_snr_db = 0.0;
  std::vector<TraceRow> trainer_trace;

  /// Recomputes the mean over every (item, source) score in a fixed order.
  void finalize() {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto &it : per_item)
      for (double v : it.si_snr_db) {
        sum += v;
        ++count;
      }
    mean_si_snr_db = count ? sum / static_cast<double>(count) : 0.0;
  }

  /// Negative mean SI-SNR with each score clipped at kSiSnrClipDb.
  double loss() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto &it : per_item)
      for (double v : it.si_snr_db) {
        sum += clip_si_snr(v);
        ++count;
      }
    return count ? -sum / static_cast<double>(count) : 0.0;
  }
};

/// A mixture given by its sources; the mixture is their exact sum.
struct SeparationItem {
  std::string id;
  std::vector<Waveform> sources;

  Waveform mixture() const {
    detail::require(!sources.empty(), "item has no sources");
    Waveform x = sources.front();
    for (std::size_t c = 1; c < sources.size(); ++c) x = x + sources[c];
    return x;
  }
};

struct SeparationOptions {
  bool apply_relu = true;
};

inline ItemResult separate_item(const std::string &id, const Waveform &mixture, const std::vector<Waveform> &sources,
                                const Filterbank &enc_bank, const Filterbank &dec_bank, const FrameParams &p,
                                const SeparationOptions &opt = {}) {
  for (const auto &s : sources) detail::require(s.size() == mixture.size(), "source and mixture lengths differ");
  const auto masks = oracle_irm_masks(sources, enc_bank, p);
  const auto estimates = separate_with_masks(mixture, masks, enc_bank, dec_bank, p, opt.apply_relu);
  ItemResult r{id, {}, {}};
  for (std::size_t c = 0; c < sources.size(); ++c) {
    r.si_snr_db.push_back(si_snr(estimates[c], sources[c]).value_db);
    r.mixture_si_snr_db.push_back(si_snr(mixture, sources[c]).value_db);
  }
  return r;
}

/// Oracle-mask separation of one mixture, scored per source.
inline ExperimentReport run_separation(const Waveform &mixture, const std::vector<Waveform> &sources,
                                       const Filterbank &enc_bank, const Filterbank &dec_bank, const FrameParams &p,
                                       const SeparationOptions &opt = {}) {
  ExperimentReport rep;
  rep.per_item.push_back(separate_item("0", mixture, sources, enc_bank, dec_bank, p, opt));
  rep.finalize();
  return rep;
}

inline ExperimentReport run_separation(const std::vector<SeparationItem> &items, const Filterbank &enc_bank,
                                       const Filterbank &dec_bank, const FrameParams &p,
                                       const SeparationOptions &opt = {}) {
  detail::require(!items.empty(), "no items to separate");
  ExperimentReport rep;
  for (const auto &item : items)
    rep.per_item.push_back(separate_item(item.id, item.mixture(), item.sources, enc_bank, dec_bank, p, opt));
  rep.finalize();
  return rep;
}

/// Rows `item_id,source_idx,si_snr_db`.
inline std::string report_csv(const ExperimentReport &r) {
  std::string out = "item_id,source_idx,si_snr_db\n";
  for (const auto &it : r.per_item)
    for (std::size_t c = 0; c < it.si_snr_db.size(); ++c)
      out += it.item_id + ',' + std::to_string(c) + ',' + detail::format_double(it.si_snr_db[c]) + '\n';
  return out;
}

/// Rows `iter,c1,c2,train_loss,dev_loss`.
inline std::string trace_csv(const std::vector<TraceRow> &trace) {
  std::string out = "iter,c1,c2,train_loss,dev_loss\n";
  for (const auto &t : trace)
    out += std::to_string(t.iter) + ',' + detail::format_double(t.c1) + ',' + detail::format_double(t.c2) + ',' +
           detail::format_double(t.train_loss) + ',' + detail::format_double(t.dev_loss) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// ParaMPGTF training

enum class GradMode { FiniteDifference };

struct TrainerConfig {
  double learning_rate = 0.05;
  int max_iters = 20;
  double fd_epsilon = 1e-3;
  GradMode grad_mode = GradMode::FiniteDifference;
  std::uint64_t seed = 0;
  int n_filters = 512;
  FrameParams frame_params{16, 8};
  int sample_rate = 8000;
  bool apply_relu = true;

  void validate() const {
    detail::require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning rate must be >= 0");
    detail::require(max_iters >= 0, "max_iters must be >= 0");
    detail::require(fd_epsilon > 0.0 && fd_epsilon <= 1e-2, "fd_epsilon must lie in (0, 1e-2]");
    frame_params.validate();
  }
};

/// Raised when the loss turns non-finite; carries the trace so far.
class TrainingError : public Error {
 public:
  TrainingError(const std::string &what, std::vector<TraceRow> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<TraceRow> &trace() const { return trace_; }

 private:
  std::vector<TraceRow> trace_;
};

/// Loss of a ParaMPGTF bank at `p` over `items`: the bank and its decoder are
/// rebuilt from (c1, c2) and scored by oracle-mask separation.
inline double parampgtf_loss(const ErbParams &p, const std::vector<SeparationItem> &items, const TrainerConfig &cfg) {
  const Filterbank enc = build_parampgtf(p, cfg.n_filters, cfg.frame_params.frame_len, cfg.sample_rate);
  const Filterbank dec = decoder_for(enc, cfg.apply_relu);
  return run_separation(items, enc, dec, cfg.frame_params, SeparationOptions{cfg.apply_relu}).loss();
}

/// Central differences with per-coordinate step eps * |p_i|.
inline std::pair<double, double> fd_gradient(const std::function<double(const ErbParams &)> &loss,
                                             const ErbParams &p, double eps) {
  const double h1 = eps * std::abs(p.c1);
  const double h2 = eps * std::abs(p.c2);
  const double g1 = (loss({p.c1 + h1, p.c2}) - loss({p.c1 - h1, p.c2})) / (2.0 * h1);
  const double g2 = (loss({p.c1, p.c2 + h2}) - loss({p.c1, p.c2 - h2})) / (2.0 * h2);
  return {g1, g2};
}

struct TrainResult {
  ErbParams params;
  int best_iter = -1;
  std::vector<TraceRow> trace;
};

/// Gradient descent on (c1, c2). Every iteration records the train and dev
/// loss at the current parameters, then steps along the finite-difference
/// gradient of the train loss. Returns the parameters with the lowest dev
/// loss seen (the first on ties); with max_iters = 0 the init is returned.
inline TrainResult train_parampgtf(const std::vector<SeparationItem> &train_items,
                                   const std::vector<SeparationItem> &dev_items, const TrainerConfig &cfg,
                                   const ErbParams &init) {
  cfg.validate();
  init.validate();
  detail::require(!train_items.empty() && !dev_items.empty(), "train and dev sets must be non-empty");
  constexpr double kMinParam = 1e-3;
  auto train_loss = [&](const ErbParams &p) { return parampgtf_loss(p, train_items, cfg); };

  TrainResult result{init, -1, {}};
  double best_dev = std::numeric_limits<double>::infinity();
  ErbParams p = init;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double tl = train_loss(p);
    const double dl = parampgtf_loss(p, dev_items, cfg);
    result.trace.push_back({it, p.c1, p.c2, tl, dl});
    if (!std::isfinite(tl) || !std::isfinite(dl))
      throw TrainingError("non-finite loss at iteration " + std::to_string(it), result.trace);
    if (dl < best_dev) {
      best_dev = dl;
      result.params = p;
      result.best_iter = it;
    }
    if (cfg.learning_rate == 0.0 || it + 1 == cfg.max_iters) continue;
    const auto [g1, g2] = fd_gradient(train_loss, p, cfg.fd_epsilon);
    if (!std::isfinite(g1) || !std::isfinite(g2))
      throw TrainingError("non-finite gradient at iteration " + std::to_string(it), result.trace);
    p.c1 = std::max(kMinParam, p.c1 - cfg.learning_rate * g1);
    p.c2 = std::max(kMinParam, p.c2 - cfg.learning_rate * g2);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticOptions {
  int count = 10;
  std::size_t length = 2000;
  int sample_rate = 8000;
  double f_lo = 150.0;
  double f_hi = 3500.0;
  double min_separation_hz = 200.0;
  double snr_lo = -5.0;
  double snr_hi = 5.0;
};

/// Two-sinusoid mixtures at random SNR. Each item's sources are returned
/// already scaled, so their sum is the mixture.
inline std::vector<SeparationItem> make_two_sinusoid_set(std::uint64_t seed, const SyntheticOptions &opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(opt.f_lo, opt.f_hi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> snr(opt.snr_lo, opt.snr_hi);
  std::vector<SeparationItem> items;
  for (int k = 0; k < opt.count; ++k) {
    const double f1 = freq(rng);
    double f2 = freq(rng);
    while (std::abs(f2 - f1) < opt.min_separation_hz) f2 = freq(rng);
    const double ph1 = phase(rng), ph2 = phase(rng);
    const double snr_db = snr(rng);
    std::vector<double> a(opt.length), b(opt.length);
    for (std::size_t t = 0; t < opt.length; ++t) {
      const double tt = static_cast<double>(t) / opt.sample_rate;
      a[t] = 0.5 * std::sin(2.0 * std::numbers::pi * f1 * tt + ph1);
      b[t] = 0.5 * std::sin(2.0 * std::numbers::pi * f2 * tt + ph2);
    }
    auto mixed = mix_at_snr(Waveform(std::move(a), opt.sample_rate), Waveform(std::move(b), opt.sample_rate),
                            MixSpec{snr_db, seed});
    char id[32];
    std::snprintf(id, sizeof id, "item%03d", k);
    items.push_back(SeparationItem{id, {std::move(mixed.source1), std::move(mixed.source2)}});
  }
  return items;
}

}  // namespace fblab
