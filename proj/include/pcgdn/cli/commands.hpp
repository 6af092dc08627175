// Copyright 2026 The pcgdn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/checkpoint.hpp"
#include "pcgdn/cli/config.hpp"
#include "pcgdn/cli/svg.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/data/dataset.hpp"
#include "pcgdn/data/manifest.hpp"
#include "pcgdn/data/segments.hpp"
#include "pcgdn/denoise.hpp"
#include "pcgdn/eval/classifier.hpp"
#include "pcgdn/eval/embed.hpp"
#include "pcgdn/eval/report.hpp"
#include "pcgdn/eval/spectrogram.hpp"
#include "pcgdn/noise.hpp"
#include "pcgdn/training.hpp"
#include "pcgdn/wav.hpp"

// Subcommand implementations. Each is a function of (config, files, seed)
// and writes under config.out.
namespace pcgdn::cli {

namespace fs = std::filesystem;

namespace detail {

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create directory '" + p.string() + "': " + ec.message());
}

// Echoes the resolved configuration before the command does any work.
inline void echo_config(const RunConfig& cfg, const std::string& command) {
  ensure_dir(cfg.out);
  std::ofstream(cfg.out / ("config." + command + ".ini"), std::ios::trunc) << render_config(cfg);
}

inline bool is_synthetic_kind(const std::string& k) { return k == "white" || k == "pink" || k == "red"; }

inline NoiseBank load_banks(const RunConfig& cfg, const std::vector<std::string>& labels, Diagnostics& diag) {
  NoiseBank bank;
  bank.sample_rate_hz = cfg.segmentation.target_rate_hz;
  for (const auto& l : labels) {
    if (is_synthetic_kind(l) || bank.has(l)) continue;
    if (cfg.noise_root.empty())
      throw ConfigError("noise kind '" + l + "' needs recordings; set [noise] root");
    bank.banks[l] = load_noise_bank(cfg.noise_root, l, bank.sample_rate_hz, &diag);
  }
  return bank;
}

inline void write_diagnostics(const Diagnostics& d, const fs::path& path, std::ostream& log) {
  if (d.empty()) return;
  d.write(path.string());
  log << d.warnings.size() << " warning(s) written to " << path.string() << '\n';
}

inline data::SegmentLoader make_loader(const RunConfig& cfg) {
  return data::SegmentLoader(cfg.dataset.root, cfg.segmentation.target_rate_hz,
                             cfg.cache ? std::optional<fs::path>(cfg.cache_path()) : std::nullopt);
}

inline data::Manifest require_manifest(const RunConfig& cfg) {
  const auto p = cfg.manifest_path();
  if (!fs::exists(p)) throw DataError("manifest '" + p.string() + "' not found; run 'prepare' first");
  return data::load_manifest(p);
}

inline std::vector<AudioSegment> subset(std::vector<AudioSegment> segs, std::size_t max, std::uint64_t seed) {
  const auto idx = eval::subsample(segs.size(), max, seed);
  std::vector<AudioSegment> out;
  for (auto i : idx) out.push_back(std::move(segs[i]));
  return out;
}

inline std::vector<std::string> class_names() {
  std::vector<std::string> n;
  for (auto c : kAllClasses) n.emplace_back(to_string(c));
  return n;
}

}  // namespace detail

// Scans the dataset, builds (or confirms) the manifest and fills the cache.
inline int cmd_prepare(const RunConfig& cfg, std::ostream& log) {
  detail::echo_config(cfg, "prepare");
  Diagnostics diag;
  const auto inv = data::scan(cfg.dataset, &diag);
  const auto manifest = data::build_manifest(inv, cfg.segmentation, cfg.train.split, cfg.seed, &diag);
  const auto text = data::serialize(manifest);
  const auto path = cfg.manifest_path();
  bool unchanged = false;
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    unchanged = ss.str() == text;
  }
  if (!unchanged) data::save(manifest, path);

  auto loader = detail::make_loader(cfg);
  std::set<std::string> done;
  for (const auto& e : manifest.entries)
    if (done.insert(e.path).second) loader.recording(e);

  log << "recordings per class:";
  for (std::size_t c = 0; c < kNumClasses; ++c) log << ' ' << to_string(kAllClasses[c]) << '=' << inv.counts[c];
  log << '\n';
  std::map<Split, std::set<std::string>> recs;
  std::map<Split, std::size_t> segs;
  for (const auto& e : manifest.entries) {
    recs[e.split].insert(e.source_id);
    ++segs[e.split];
  }
  for (auto s : {Split::Train, Split::Val, Split::Test})
    log << to_string(s) << ": " << recs[s].size() << " recordings, " << segs[s] << " segments\n";
  log << "manifest " << (unchanged ? "unchanged" : "written") << ": " << path.string() << '\n';
  if (cfg.cache) log << "cache: " << loader.cache_hits() << " hit(s), " << loader.cache_writes() << " written\n";
  detail::write_diagnostics(diag, cfg.out / "prepare_warnings.txt", log);
  return 0;
}

// Trains the denoiser on the manifest's train split (noisy recordings only),
// validating on the val split.
inline int cmd_train(const RunConfig& cfg, std::ostream& log) {
  detail::echo_config(cfg, "train");
  cfg.validate();
  const auto manifest = detail::require_manifest(cfg);
  auto loader = detail::make_loader(cfg);
  const NoisyCorpus train(loader.load_all(manifest.in_split(Split::Train)));
  const NoisyCorpus val(loader.load_all(manifest.in_split(Split::Val)));
  Diagnostics diag;
  const auto bank = detail::load_banks(cfg, cfg.augment.sustained_noise.kinds, diag);
  const Augmenter aug{cfg.augment, &bank};
  log << "training on " << train.size() << " segments, validating on " << val.size() << " (lambda "
      << cfg.train.contrastive_weight << ", tau " << cfg.train.temperature << ", seed " << cfg.seed << ")\n";
  FitOptions fo;
  fo.out_dir = cfg.out / "train";
  fo.resume = cfg.resume;
  fo.on_epoch = [&](const EpochSummary& e) {
    log << "epoch " << e.epoch + 1 << "/" << cfg.train.epochs << "  step " << e.step << "  train "
        << format_double(e.train_total) << "  val " << format_double(e.val.total) << (e.improved ? "  *" : "") << '\n';
  };
  fit(train, val, cfg.model, cfg.train, aug, fo);
  log << "checkpoints: " << (fo.out_dir / "best.ckpt").string() << ", " << (fo.out_dir / "last.ckpt").string() << '\n';
  detail::write_diagnostics(diag, cfg.out / "train_warnings.txt", log);
  return 0;
}

// Denoises one WAV file of any length; the output keeps the input's length
// and sample rate.
inline int cmd_denoise(const RunConfig& cfg, const fs::path& checkpoint_path, const fs::path& input,
                       const fs::path& output, std::ostream& log) {
  const auto state = load(checkpoint_path);
  const auto in = wav::read(input);
  Diagnostics diag;
  const auto out = denoise_recording(state, in, cfg.segmentation.target_rate_hz, &diag);
  for (const auto& w : diag.warnings) log << "warning: " << w << '\n';
  if (output.has_parent_path()) detail::ensure_dir(output.parent_path());
  wav::write(output, out, wav::SampleFormat::Float32);
  log << "wrote " << output.string() << " (" << out.size() << " samples at " << out.sample_rate_hz << " Hz)\n";
  return 0;
}

struct EvaluateOptions {
  std::optional<fs::path> checkpoint;  // unset: identity denoiser (calibration)
  std::optional<fs::path> classifier;  // unset: train one on clean train-split segments
  bool skip_classifier = false;
};

// Output-SNR grid on the test split, classifier degradation study and plots.
inline int cmd_evaluate(const RunConfig& cfg, const EvaluateOptions& opt, std::ostream& log) {
  detail::echo_config(cfg, "evaluate");
  const fs::path dir = cfg.out / "eval";
  detail::ensure_dir(dir);
  const auto manifest = detail::require_manifest(cfg);
  auto loader = detail::make_loader(cfg);
  std::optional<ModelState> state;
  if (opt.checkpoint) state = load(*opt.checkpoint);
  const auto denoiser = state ? eval::model_denoiser(*state) : eval::identity_denoiser();

  eval::CleanSegments test{loader.load_all(manifest.in_split(Split::Test))};
  if (test.segments.empty()) throw DataError("evaluate: the test split is empty");
  Diagnostics diag;
  auto labels = cfg.eval.grid.kinds;
  labels.push_back(cfg.eval.degradation_kind);
  const auto bank = detail::load_banks(cfg, labels, diag);

  eval::EvalReport report;
  report.context = {{"denoiser", state ? opt.checkpoint->string() : "identity"},
                    {"seed", cfg.seed},
                    {"test_segments", test.segments.size()},
                    {"max_segments", cfg.eval.grid.max_segments}};
  report.snr_rows = eval::eval_snr(denoiser, test, cfg.eval.grid, &bank);
  for (const auto& r : report.snr_rows)
    log << r.kind << " @ " << format_double(r.input_snr_db) << " dB -> " << format_double(r.mean_output_snr_db)
        << " dB (n=" << r.n << (r.unseen_by_training ? ", unseen" : "") << ")\n";
  report.write_snr_csv(dir / "snr_grid.csv");

  {
    std::vector<std::string> kinds = cfg.eval.grid.kinds;
    std::vector<std::string> series;
    for (double s : cfg.eval.grid.snrs_db) series.push_back(format_double(s) + " dB in");
    std::vector<std::vector<double>> v(kinds.size(), std::vector<double>(series.size()));
    for (const auto& r : report.snr_rows) {
      const auto g = static_cast<std::size_t>(std::find(kinds.begin(), kinds.end(), r.kind) - kinds.begin());
      const auto s = static_cast<std::size_t>(
          std::find(cfg.eval.grid.snrs_db.begin(), cfg.eval.grid.snrs_db.end(), r.input_snr_db) - cfg.eval.grid.snrs_db.begin());
      v[g][s] = r.mean_output_snr_db;
    }
    svg::bar_chart("Output SNR by noise type", kinds, series, v, "dB").save(dir / "snr_grid.svg");
  }

  if (!opt.skip_classifier) {
    eval::ClassifierState clf;
    if (opt.classifier) {
      clf = eval::load_classifier(*opt.classifier);
    } else {
      auto clean_train = detail::subset(loader.load_all(manifest.in_split(Split::Train)), cfg.eval.classifier_max_train,
                                        derive_seed(cfg.seed, {5}));
      log << "training reference classifier on " << clean_train.size() << " clean segments\n";
      clf = eval::train_classifier(clean_train, cfg.eval.classifier);
      eval::save_classifier(clf, dir / "classifier.ckpt");
    }
    const eval::CleanSegments clf_test{
        detail::subset(test.segments, cfg.eval.grid.max_segments, derive_seed(cfg.seed, {6}))};
    const auto spec = noise_spec_from_label(cfg.eval.degradation_kind, cfg.eval.degradation_snr_db, derive_seed(cfg.seed, {7}));
    report.classifier = eval::degradation_study(clf, denoiser, clf_test, spec, &bank);
    report.write_classifier_csv(dir / "classifier.csv");
    std::vector<std::string> groups = {"Se", "Sp", "Acc"};
    std::vector<std::string> series;
    std::vector<std::vector<double>> v(3);
    for (const auto& c : report.classifier) {
      series.push_back(c.condition);
      v[0].push_back(c.metrics.macro.se);
      v[1].push_back(c.metrics.macro.sp);
      v[2].push_back(c.metrics.macro.acc);
      log << c.condition << ": Se " << format_double(c.metrics.macro.se) << " Sp " << format_double(c.metrics.macro.sp)
          << " Acc " << format_double(c.metrics.macro.acc) << '\n';
    }
    svg::bar_chart("Classifier under " + spec.label() + " noise at " + format_double(spec.target_snr_db) + " dB", groups,
                   series, v, "macro rate")
        .save(dir / "classifier.svg");
  }
  report.write_summary_json(dir / "summary.json");

  // Spectrograms of the first test segment: clean, noisy, denoised.
  {
    const auto& clean = test.segments.front();
    const auto spec = noise_spec_from_label(cfg.eval.degradation_kind, cfg.eval.degradation_snr_db, derive_seed(cfg.seed, {8}));
    AudioSegment noisy = apply_noise(clean, spec, &bank);
    AudioSegment den = noisy;
    den.samples = denoiser({noisy.samples}).front();
    for (const auto& [name, seg] : std::vector<std::pair<std::string, const AudioSegment*>>{
             {"clean", &clean}, {"noisy", &noisy}, {"denoised", &den}}) {
      const auto s = eval::spectrogram(*seg, cfg.eval.spectrogram);
      eval::write_csv(s, dir / ("spectrogram_" + name + ".csv"));
      svg::heatmap("Spectrogram (" + name + ")", s.db, s.db.maxCoeff() - 80.0, s.db.maxCoeff(), "time", "frequency")
          .save(dir / ("spectrogram_" + name + ".svg"));
    }
  }
  detail::write_diagnostics(diag, cfg.out / "evaluate_warnings.txt", log);
  log << "evaluation written to " << dir.string() << '\n';
  return 0;
}

// Projection-head embeddings and t-SNE coordinates for labeled test segments.
inline int cmd_embed(const RunConfig& cfg, const fs::path& checkpoint_path, std::ostream& log,
                     const std::string& tag = "embed") {
  detail::echo_config(cfg, "embed");
  const fs::path dir = cfg.out / tag;
  detail::ensure_dir(dir);
  const auto state = load(checkpoint_path);
  const auto manifest = detail::require_manifest(cfg);
  auto loader = detail::make_loader(cfg);
  const auto segs = detail::subset(loader.load_all(manifest.in_split(Split::Test)), cfg.eval.embed_max_segments,
                                   derive_seed(cfg.seed, {9}));
  const auto ex = eval::export_embeddings(state, segs, cfg.eval.tsne);
  eval::write_csv(ex, dir / "embeddings.csv");
  svg::scatter("t-SNE of projection-head embeddings", ex.coords, ex.labels, detail::class_names())
      .save(dir / "tsne.svg");
  log << "embedded " << segs.size() << " segments into " << (dir / "embeddings.csv").string() << '\n';
  return 0;
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw DataError("'" + path.string() + "' is empty");
  return rows;
}

inline double cell_number(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("not a number: '" + s + "'");
  }
}

}  // namespace detail

// Re-renders a plot from an exported file: kind is "snr" (snr_grid.csv),
// "embed" (embeddings.csv) or "spectrogram" (a WAV file).
inline int cmd_plot(const RunConfig& cfg, const std::string& kind, const fs::path& input, const fs::path& output,
                    std::ostream& log) {
  if (output.has_parent_path()) detail::ensure_dir(output.parent_path());
  if (kind == "snr") {
    const auto rows = detail::read_csv(input);
    std::vector<std::string> kinds, series;
    std::map<std::pair<std::string, std::string>, double> v;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 3) throw DataError("malformed SNR grid row " + std::to_string(i));
      if (std::find(kinds.begin(), kinds.end(), r[0]) == kinds.end()) kinds.push_back(r[0]);
      const auto s = r[1] + " dB in";
      if (std::find(series.begin(), series.end(), s) == series.end()) series.push_back(s);
      v[{r[0], s}] = detail::cell_number(r[2]);
    }
    std::vector<std::vector<double>> vals(kinds.size(), std::vector<double>(series.size()));
    for (std::size_t g = 0; g < kinds.size(); ++g)
      for (std::size_t s = 0; s < series.size(); ++s) vals[g][s] = v[{kinds[g], series[s]}];
    svg::bar_chart("Output SNR by noise type", kinds, series, vals, "dB").save(output);
  } else if (kind == "embed") {
    const auto rows = detail::read_csv(input);
    nn::Mat xy(static_cast<nn::Index>(rows.size() - 1), 2);
    std::vector<int> labels;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 5) throw DataError("malformed embedding row " + std::to_string(i));
      const auto cls = parse_class(r[2]);
      labels.push_back(cls ? static_cast<int>(*cls) : -1);
      xy(static_cast<nn::Index>(i - 1), 0) = detail::cell_number(r[3]);
      xy(static_cast<nn::Index>(i - 1), 1) = detail::cell_number(r[4]);
    }
    svg::scatter("t-SNE of projection-head embeddings", xy, labels, detail::class_names()).save(output);
  } else if (kind == "spectrogram") {
    auto seg = wav::read(input);
    const auto s = eval::spectrogram(seg, cfg.eval.spectrogram);
    svg::heatmap("Spectrogram", s.db, s.db.maxCoeff() - 80.0, s.db.maxCoeff(), "time", "frequency").save(output);
  } else {
    throw ConfigError("plot: unknown kind '" + kind + "' (expected snr, embed or spectrogram)");
  }
  log << "wrote " << output.string() << '\n';
  return 0;
}

}  // namespace pcgdn::cli
