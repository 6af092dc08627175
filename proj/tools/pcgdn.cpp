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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pcgdn/cli/commands.hpp"

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

pcgdn::cli::RunConfig resolve(const Globals& g) {
  pcgdn::cli::RunConfig cfg = g.config.empty() ? pcgdn::cli::RunConfig{} : pcgdn::cli::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.out = g.out;
  if (g.quiet) cfg.quiet = true;
  cfg.resolve_seeds();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcgdn: self-supervised PCG denoising"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "master seed (overrides [run] seed)");
  app.add_option("--out", g.out, "output directory (overrides [run] out)");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  auto* prepare = app.add_subcommand("prepare", "scan the dataset, write the manifest and segment cache");

  auto* train = app.add_subcommand("train", "train the denoiser");
  std::optional<double> lambda;
  bool resume = false;
  train->add_option("--lambda", lambda, "contrastive weight (0 disables the contrastive term)");
  train->add_flag("--resume", resume, "continue from <out>/train/last.ckpt");

  auto* denoise = app.add_subcommand("denoise", "denoise one WAV file");
  std::string ckpt, input, output;
  denoise->add_option("--checkpoint", ckpt)->required();
  denoise->add_option("--input", input)->required()->check(CLI::ExistingFile);
  denoise->add_option("--output", output)->required();

  auto* evaluate = app.add_subcommand("evaluate", "SNR grid, classifier degradation study and plots");
  std::string eval_ckpt, eval_clf;
  bool identity = false, no_classifier = false;
  auto* ck = evaluate->add_option("--checkpoint", eval_ckpt);
  auto* id = evaluate->add_flag("--identity", identity, "use the identity denoiser (harness calibration)");
  ck->excludes(id);
  evaluate->add_option("--classifier", eval_clf, "reuse a trained classifier checkpoint");
  evaluate->add_flag("--no-classifier", no_classifier, "skip the degradation study");

  auto* embed = app.add_subcommand("embed", "export projection-head embeddings and t-SNE coordinates");
  std::string embed_ckpt, embed_tag = "embed";
  embed->add_option("--checkpoint", embed_ckpt)->required();
  embed->add_option("--tag", embed_tag, "output subdirectory under --out");

  auto* plot = app.add_subcommand("plot", "render an SVG from an exported CSV or a WAV file");
  std::string plot_kind, plot_in, plot_out;
  plot->add_option("kind", plot_kind, "snr | embed | spectrogram")->required();
  plot->add_option("--input", plot_in)->required()->check(CLI::ExistingFile);
  plot->add_option("--output", plot_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::ofstream null_stream;
  try {
    auto cfg = resolve(g);
    std::ostream& log = cfg.quiet ? null_stream : std::cout;
    if (*prepare) return pcgdn::cli::cmd_prepare(cfg, log);
    if (*train) {
      if (lambda) cfg.train.contrastive_weight = *lambda;
      if (resume) cfg.resume = true;
      return pcgdn::cli::cmd_train(cfg, log);
    }
    if (*denoise) return pcgdn::cli::cmd_denoise(cfg, ckpt, input, output, log);
    if (*evaluate) {
      if (eval_ckpt.empty() && !identity) throw pcgdn::ConfigError("evaluate: pass --checkpoint or --identity");
      pcgdn::cli::EvaluateOptions opt;
      if (!identity) opt.checkpoint = eval_ckpt;
      if (!eval_clf.empty()) opt.classifier = eval_clf;
      opt.skip_classifier = no_classifier;
      return pcgdn::cli::cmd_evaluate(cfg, opt, log);
    }
    if (*embed) return pcgdn::cli::cmd_embed(cfg, embed_ckpt, log, embed_tag);
    if (*plot) return pcgdn::cli::cmd_plot(cfg, plot_kind, plot_in, plot_out, log);
  } catch (const pcgdn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pcgdn::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const pcgdn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
