// tools/fblab.cpp

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

// Command-line front end: bank construction, frequency responses, round-trip
// checks, oracle-mask separation and ParaMPGTF training.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fblab/fblab.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

std::uint64_t default_seed() {
  if (const char *env = std::getenv("FBLAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception &) {
      throw fblab::InvalidArgument("FBLAB_SEED must be a non-negative integer");
    }
  }
  return kDefaultSeed;
}

// JSON has no infinities; scores of +/-inf are written as strings.
ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

ordered_json bank_json(const fblab::Filterbank &bank) {
  ordered_json j;
  j["kind"] = std::string(fblab::to_string(bank.kind));
  j["n"] = bank.num_filters();
  j["len"] = bank.length();
  j["fs"] = bank.sample_rate;
  if (bank.erb_params) {
    j["c1"] = bank.erb_params->c1;
    j["c2"] = bank.erb_params->c2;
  }
  if (bank.center_freqs) j["num_centers"] = bank.center_freqs->size();
  return j;
}

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw fblab::IoError("cannot create directory " + dir);
}

std::string join(const std::string &dir, const std::string &name) { return (fs::path(dir) / name).string(); }

// --- build-bank -------------------------------------------------------------

struct BankOptions {
  std::string kind;
  std::string out;
  double c1 = 24.7;
  double c2 = 9.265;
  int n_filters = 512;
  int frame_len = 16;
  int fs = 8000;
  int order = 2;
  double alpha = 1.0;
  std::string mode = "signsplit";
  int nfreqs = 128;
  std::string window = "rect";
};

int cmd_build_bank(const BankOptions &o) {
  fblab::Filterbank bank;
  std::size_t centers = 0;
  if (o.kind == "mpgtf" || o.kind == "parampgtf") {
    const fblab::ErbParams p{o.c1, o.c2};
    p.validate();
    fblab::MpgtfOptions opt;
    opt.order_n = o.order;
    opt.amplitude_alpha = o.alpha;
    bank = o.kind == "mpgtf" ? fblab::build_mpgtf(p, o.n_filters, o.frame_len, o.fs, opt)
                             : fblab::build_parampgtf(p, o.n_filters, o.frame_len, o.fs, opt);
    centers = bank.center_freqs->size();
  } else {
    fblab::StftSpec spec;
    spec.frame_len = o.frame_len;
    spec.n_freqs = o.nfreqs;
    spec.mode = o.mode == "linear" ? fblab::StftMode::Linear : fblab::StftMode::SignSplit;
    spec.window = o.window == "hann" ? fblab::StftWindow::Hann : fblab::StftWindow::Rectangular;
    bank = fblab::build_stft_bank(spec, o.fs);
    centers = static_cast<std::size_t>(spec.n_freqs);
  }
  fblab::save_fbank(o.out, bank);
  std::cout << "N=" << bank.num_filters() << " L=" << bank.length() << " M=" << centers << "\n";
  if (bank.conditioning_warning) std::cout << "note: overcomplete bank (more than L/2 frequencies)\n";
  return 0;
}

// --- freq-response ----------------------------------------------------------

int cmd_freq_response(const std::string &bank_path, const std::string &out, int nfft) {
  if (nfft < 1) throw fblab::InvalidArgument("nfft must be positive");
  const auto bank = fblab::load_fbank(bank_path);
  fblab::write_text(out, fblab::frequency_response_csv(bank, nfft));
  return 0;
}

// --- roundtrip --------------------------------------------------------------

int cmd_roundtrip(const std::string &bank_path, const std::string &in_wav, const std::string &out_wav, bool relu,
                  std::optional<int> hop, bool write_float) {
  if (hop && *hop < 1) throw fblab::InvalidArgument("hop must be >= 1");
  const auto bank = fblab::load_fbank(bank_path);
  const fblab::FrameParams p{static_cast<int>(bank.length()), hop.value_or(static_cast<int>(bank.length()))};
  p.validate();
  const auto x = fblab::read_wav(in_wav);
  if (x.sample_rate() != bank.sample_rate)
    throw fblab::InvalidArgument("sample rate mismatch: wav " + std::to_string(x.sample_rate()) + " Hz, bank " +
                                 std::to_string(bank.sample_rate) + " Hz");
  if (x.empty()) throw fblab::InvalidArgument("empty input");
  const auto dec = fblab::decoder_for(bank, relu);
  const auto y = fblab::decode(fblab::encode(x, bank, p, relu), dec).resized(x.size());
  fblab::write_wav(out_wav, y, write_float ? fblab::WavEncoding::Float32 : fblab::WavEncoding::Pcm16);
  if (!(x.energy() > 0.0)) {
    std::cout << "si_snr_db=n/a\n";
    return 0;
  }
  const double db = fblab::clip_si_snr(fblab::si_snr(y, x).value_db);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", db);
  std::cout << "si_snr_db=" << buf << "\n";
  return 0;
}

// --- separate ---------------------------------------------------------------

struct SeparateOptions {
  std::string bank;
  std::vector<std::string> sources;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;
  std::optional<int> hop;
  bool no_relu = false;
  std::string out_dir = "separation";
};

int cmd_separate(const SeparateOptions &o) {
  if (o.sources.size() < 2) throw fblab::InvalidArgument("separate needs at least two source WAVs");
  const std::uint64_t seed = o.seed.value_or(default_seed());
  const fblab::MixSpec mix = o.snr_db ? fblab::MixSpec{*o.snr_db, seed} : fblab::MixSpec::random(seed);
  if (!std::isfinite(mix.snr_db)) throw fblab::InvalidArgument("snr_db must be finite");
  const bool relu = !o.no_relu;

  const auto enc = fblab::load_fbank(o.bank);
  const fblab::FrameParams p{static_cast<int>(enc.length()), o.hop.value_or(8)};
  p.validate();

  std::vector<fblab::Waveform> raw;
  for (const auto &path : o.sources) {
    raw.push_back(fblab::read_wav(path));
    if (raw.back().sample_rate() != enc.sample_rate)
      throw fblab::InvalidArgument("sample rate mismatch between " + path + " and the bank");
  }
  std::size_t len = raw.front().size();
  for (const auto &w : raw) len = std::min(len, w.size());
  // Every further source is mixed against the first at the requested SNR.
  std::vector<fblab::Waveform> targets{raw.front().resized(len)};
  std::vector<double> gains{1.0};
  for (std::size_t c = 1; c < raw.size(); ++c) {
    const auto m = fblab::mix_at_snr(targets.front(), raw[c].resized(len), mix);
    targets.push_back(m.source2);
    gains.push_back(m.gain);
  }
  fblab::SeparationItem item{"mix", targets};
  const auto mixture = item.mixture();
  const auto dec = fblab::decoder_for(enc, relu);
  const auto masks = fblab::oracle_irm_masks(targets, enc, p);
  const auto estimates = fblab::separate_with_masks(mixture, masks, enc, dec, p, relu);
  fblab::ExperimentReport report = fblab::run_separation({item}, enc, dec, p, fblab::SeparationOptions{relu});

  ensure_dir(o.out_dir);
  fblab::write_wav(join(o.out_dir, "mixture.wav"), mixture, fblab::WavEncoding::Float32);
  for (std::size_t c = 0; c < estimates.size(); ++c)
    fblab::write_wav(join(o.out_dir, "estimate_" + std::to_string(c) + ".wav"), estimates[c],
                     fblab::WavEncoding::Float32);
  fblab::write_text(join(o.out_dir, "report.csv"), fblab::report_csv(report));

  ordered_json j;
  j["mean_si_snr_db"] = json_number(report.mean_si_snr_db);
  ordered_json per = ordered_json::array();
  for (std::size_t c = 0; c < targets.size(); ++c)
    per.push_back({{"source_idx", c},
                   {"si_snr_db", json_number(report.per_item[0].si_snr_db[c])},
                   {"mixture_si_snr_db", json_number(report.per_item[0].mixture_si_snr_db[c])},
                   {"gain", gains[c]}});
  j["sources"] = per;
  j["config"] = {{"snr_db", mix.snr_db}, {"seed", seed},   {"frame_len", p.frame_len},
                 {"hop", p.hop},         {"relu", relu},   {"num_sources", targets.size()},
                 {"length", len}};
  j["bank"] = bank_json(enc);
  fblab::write_text(join(o.out_dir, "report.json"), j.dump(2) + "\n");

  for (std::size_t c = 0; c < targets.size(); ++c)
    std::cout << "source " << c << ": si_snr_db=" << report.per_item[0].si_snr_db[c]
              << " (mixture " << report.per_item[0].mixture_si_snr_db[c] << ")\n";
  return 0;
}

// --- train ------------------------------------------------------------------

/// Pairs `<id>_s1.wav`, `<id>_s2.wav`, ... found in `dir`, ordered by id.
std::vector<fblab::SeparationItem> load_item_dir(const std::string &dir) {
  if (!fs::is_directory(dir)) throw fblab::IoError("not a directory: " + dir);
  std::map<std::string, std::map<int, std::string>> found;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".wav") continue;
    const std::string stem = entry.path().stem().string();
    const auto us = stem.rfind("_s");
    if (us == std::string::npos || us + 2 >= stem.size()) continue;
    const std::string idx = stem.substr(us + 2);
    if (!std::all_of(idx.begin(), idx.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) continue;
    found[stem.substr(0, us)][std::stoi(idx)] = entry.path().string();
  }
  std::vector<fblab::SeparationItem> items;
  for (const auto &[id, files] : found) {
    if (files.size() < 2) continue;
    fblab::SeparationItem item{id, {}};
    for (const auto &[idx, path] : files) item.sources.push_back(fblab::read_wav(path));
    std::size_t len = item.sources.front().size();
    for (const auto &w : item.sources) len = std::min(len, w.size());
    for (auto &w : item.sources) w = w.resized(len);
    items.push_back(std::move(item));
  }
  if (items.empty()) throw fblab::IoError("no paired-source WAVs in " + dir);
  return items;
}

struct TrainOptions {
  std::string train_dir;
  std::string dev_dir;
  std::string out_dir = "training";
  double lr = fblab::TrainerConfig{}.learning_rate;
  int max_iters = fblab::TrainerConfig{}.max_iters;
  double fd_eps = fblab::TrainerConfig{}.fd_epsilon;
  double c1 = 24.7;
  double c2 = 9.265;
  int n_filters = 512;
  int frame_len = 16;
  int hop = 8;
  int fs = 8000;
  bool no_relu = false;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainOptions &o) {
  fblab::TrainerConfig cfg;
  cfg.learning_rate = o.lr;
  cfg.max_iters = o.max_iters;
  cfg.fd_epsilon = o.fd_eps;
  cfg.seed = o.seed.value_or(default_seed());
  cfg.n_filters = o.n_filters;
  cfg.frame_params = {o.frame_len, o.hop};
  cfg.sample_rate = o.fs;
  cfg.apply_relu = !o.no_relu;
  cfg.validate();
  const fblab::ErbParams init{o.c1, o.c2};
  init.validate();
  // Fails early on n_filters / frame_len / fs combinations the builder rejects.
  fblab::build_parampgtf(init, cfg.n_filters, cfg.frame_params.frame_len, cfg.sample_rate);

  const auto train = load_item_dir(o.train_dir);
  const auto dev = load_item_dir(o.dev_dir);
  for (const auto *set : {&train, &dev})
    for (const auto &item : *set)
      if (item.sources.front().sample_rate() != cfg.sample_rate)
        throw fblab::InvalidArgument("item " + item.id + " is not at " + std::to_string(cfg.sample_rate) + " Hz");

  ensure_dir(o.out_dir);
  fblab::TrainResult result;
  try {
    result = fblab::train_parampgtf(train, dev, cfg, init);
  } catch (const fblab::TrainingError &e) {
    fblab::write_text(join(o.out_dir, "trace.csv"), fblab::trace_csv(e.trace()));
    throw;
  }
  fblab::write_text(join(o.out_dir, "trace.csv"), fblab::trace_csv(result.trace));
  const auto bank = fblab::build_parampgtf(result.params, cfg.n_filters, cfg.frame_params.frame_len, cfg.sample_rate);
  fblab::save_fbank(join(o.out_dir, "parampgtf.fbank"), bank);

  ordered_json j;
  j["c1"] = result.params.c1;
  j["c2"] = result.params.c2;
  j["best_iter"] = result.best_iter;
  if (result.best_iter >= 0) {
    j["best_dev_loss"] = result.trace[static_cast<std::size_t>(result.best_iter)].dev_loss;
    j["initial_dev_loss"] = result.trace.front().dev_loss;
  }
  j["config"] = {{"learning_rate", cfg.learning_rate}, {"max_iters", cfg.max_iters},
                 {"fd_epsilon", cfg.fd_epsilon},       {"grad_mode", "finite_difference"},
                 {"seed", cfg.seed},                   {"n_filters", cfg.n_filters},
                 {"frame_len", cfg.frame_params.frame_len}, {"hop", cfg.frame_params.hop},
                 {"fs", cfg.sample_rate},              {"relu", cfg.apply_relu},
                 {"init_c1", init.c1},                 {"init_c2", init.c2},
                 {"train_items", train.size()},        {"dev_items", dev.size()}};
  j["bank"] = bank_json(bank);
  fblab::write_text(join(o.out_dir, "params.json"), j.dump(2) + "\n");
  std::cout << "c1=" << result.params.c1 << " c2=" << result.params.c2 << " best_iter=" << result.best_iter << "\n";
  return 0;
}

// --- make-synthetic ---------------------------------------------------------

int cmd_make_synthetic(const std::string &out_dir, int count, std::size_t length, std::optional<std::uint64_t> seed_opt) {
  if (count < 1) throw fblab::InvalidArgument("count must be >= 1");
  if (length < 16) throw fblab::InvalidArgument("length must be >= 16 samples");
  const std::uint64_t seed = seed_opt.value_or(default_seed());
  fblab::SyntheticOptions opt;
  opt.count = count;
  opt.length = length;
  for (const auto &[sub, s] : {std::pair{std::string("train"), seed}, std::pair{std::string("dev"), seed + 1}}) {
    const std::string dir = join(out_dir, sub);
    ensure_dir(dir);
    for (const auto &item : fblab::make_two_sinusoid_set(s, opt))
      for (std::size_t c = 0; c < item.sources.size(); ++c)
        fblab::write_wav(join(dir, item.id + "_s" + std::to_string(c + 1) + ".wav"), item.sources[c],
                         fblab::WavEncoding::Float32);
  }
  std::cout << "wrote " << count << " train and " << count << " dev items to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"fblab: gammatone, MPGTF, ParaMPGTF and STFT analysis/synthesis filterbanks"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  BankOptions bank_opt;
  auto *build = app.add_subcommand("build-bank", "Build a filterbank and write it in FBANK1 format");
  build->add_option("kind", bank_opt.kind, "Bank kind")->required()->check(CLI::IsMember({"mpgtf", "parampgtf", "stft"}));
  build->add_option("-o,--out", bank_opt.out, "Output FBANK1 path")->required();
  build->add_option("--c1", bank_opt.c1, "ERB intercept c1 (Hz)");
  build->add_option("--c2", bank_opt.c2, "ERB slope divisor c2");
  build->add_option("--n-filters", bank_opt.n_filters, "Number of filters N (gammatone kinds)");
  build->add_option("--frame-len", bank_opt.frame_len, "Filter length L in samples (2 ms at 8 kHz)");
  build->add_option("--fs", bank_opt.fs, "Sample rate (Hz)");
  build->add_option("--order", bank_opt.order, "Gammatone order n");
  build->add_option("--alpha", bank_opt.alpha, "Gammatone amplitude alpha");
  build->add_option("--mode", bank_opt.mode, "STFT mode")->check(CLI::IsMember({"linear", "signsplit"}));
  build->add_option("--nfreqs", bank_opt.nfreqs, "STFT frequency count");
  build->add_option("--window", bank_opt.window, "STFT window")->check(CLI::IsMember({"rect", "hann"}));

  std::string fr_bank, fr_out;
  int fr_nfft = 512;
  auto *freq = app.add_subcommand("freq-response", "Write per-filter FFT magnitudes as CSV");
  freq->add_option("bank", fr_bank, "FBANK1 file")->required();
  freq->add_option("-o,--out", fr_out, "Output CSV path")->required();
  freq->add_option("--nfft", fr_nfft, "Zero-padded FFT size");

  std::string rt_bank, rt_in, rt_out;
  bool rt_relu = false, rt_float = false;
  std::optional<int> rt_hop;
  auto *rt = app.add_subcommand("roundtrip", "Encode, pseudo-inverse decode and report SI-SNR");
  rt->add_option("bank", rt_bank, "FBANK1 file")->required();
  rt->add_option("input", rt_in, "Input WAV")->required();
  rt->add_option("output", rt_out, "Output WAV")->required();
  rt->add_flag("--relu", rt_relu, "Apply ReLU in the encoder");
  rt->add_option("--hop", rt_hop, "Frame hop D (default: the filter length)");
  rt->add_flag("--float", rt_float, "Write IEEE float32 instead of PCM16");

  SeparateOptions sep_opt;
  auto *sep = app.add_subcommand("separate", "Mix sources and separate them with oracle masks");
  sep->add_option("bank", sep_opt.bank, "Encoder FBANK1 file")->required();
  sep->add_option("sources", sep_opt.sources, "Two or more source WAVs")->required();
  sep->add_option("--snr-db", sep_opt.snr_db, "Mixing SNR in dB (default: uniform in [-5, 5] from the seed)");
  sep->add_option("--seed", sep_opt.seed, "Random seed (default: $FBLAB_SEED or 1)");
  sep->add_option("--hop", sep_opt.hop, "Frame hop D (default: 8)");
  sep->add_flag("--no-relu", sep_opt.no_relu, "Use the linear encoder");
  sep->add_option("-o,--out-dir", sep_opt.out_dir, "Output directory");

  TrainOptions tr_opt;
  auto *tr = app.add_subcommand("train", "Fit ParaMPGTF (c1, c2) by finite-difference gradient descent");
  tr->add_option("train_dir", tr_opt.train_dir, "Directory of <id>_s<k>.wav training items")->required();
  tr->add_option("dev_dir", tr_opt.dev_dir, "Directory of <id>_s<k>.wav dev items")->required();
  tr->add_option("-o,--out-dir", tr_opt.out_dir, "Output directory");
  tr->add_option("--lr", tr_opt.lr, "Learning rate");
  tr->add_option("--max-iters", tr_opt.max_iters, "Iterations");
  tr->add_option("--fd-eps", tr_opt.fd_eps, "Relative finite-difference step");
  tr->add_option("--c1", tr_opt.c1, "Initial c1 (Hz)");
  tr->add_option("--c2", tr_opt.c2, "Initial c2");
  tr->add_option("--n-filters", tr_opt.n_filters, "Number of filters N");
  tr->add_option("--frame-len", tr_opt.frame_len, "Filter length L");
  tr->add_option("--hop", tr_opt.hop, "Frame hop D");
  tr->add_option("--fs", tr_opt.fs, "Sample rate (Hz)");
  tr->add_flag("--no-relu", tr_opt.no_relu, "Use the linear encoder");
  tr->add_option("--seed", tr_opt.seed, "Random seed (default: $FBLAB_SEED or 1)");

  std::string syn_dir;
  int syn_count = 10;
  std::size_t syn_len = 2000;
  std::optional<std::uint64_t> syn_seed;
  auto *syn = app.add_subcommand("make-synthetic", "Write the two-sinusoid train/dev set");
  syn->add_option("out_dir", syn_dir, "Output directory (train/ and dev/ are created)")->required();
  syn->add_option("--count", syn_count, "Items per split");
  syn->add_option("--length", syn_len, "Samples per item");
  syn->add_option("--seed", syn_seed, "Random seed (default: $FBLAB_SEED or 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build_bank(bank_opt);
    if (*freq) return cmd_freq_response(fr_bank, fr_out, fr_nfft);
    if (*rt) return cmd_roundtrip(rt_bank, rt_in, rt_out, rt_relu, rt_hop, rt_float);
    if (*sep) return cmd_separate(sep_opt);
    if (*tr) return cmd_train(tr_opt);
    if (*syn) return cmd_make_synthetic(syn_dir, syn_count, syn_len, syn_seed);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
