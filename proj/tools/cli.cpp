// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <sstream>

#include "ridnet/config.hpp"
#include "ridnet/gradcheck.hpp"
#include "ridnet/manifest.hpp"
#include "ridnet/metrics.hpp"
#include "ridnet/parallel.hpp"
#include "ridnet/synthetic.hpp"
#include "ridnet/train.hpp"
#include "ridnet/version.hpp"

namespace ridnet::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSynthStream = 0x73796e7468ULL;     // "synth"
constexpr std::uint64_t kGenerateStream = 0x67656e6572ULL;  // "gener"
constexpr std::uint64_t kHeldoutStream = 0x68656c64ULL;     // "held"

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::config:
      return kConfig;
    case Errc::io:
      return kIo;
    case Errc::numeric:
      return kNumeric;
    case Errc::checkpoint_magic:
    case Errc::checkpoint_version:
    case Errc::checkpoint_crc:
    case Errc::checkpoint_shape:
    case Errc::checkpoint_truncated:
      return kCheckpoint;
    case Errc::invalid_argument:
    case Errc::shape_mismatch:
      return kArgument;
    case Errc::graph_state:
      break;
  }
  return kInternal;
}

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

RunManifest new_manifest(const std::string& command) {
  RunManifest m;
  m.version = kVersion;
  m.command = command;
  m.threads = num_threads();
  return m;
}

// Refuses to overwrite unless forced.
void check_writable(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) fail(Errc::io, "'" + path.string() + "' exists; pass --force to overwrite");
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string in;
  std::string out;
  double sigma = 25.0;
  std::uint64_t seed = 0;
  bool force = false;
  int generate = 0;
  int height = 256;
  int width = 256;
  int channels = 1;
  double low = 0.0;
  double high = 1.0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.out.empty()) fail(Errc::config, "synth: --out is required");
  if ((a.generate > 0) == !a.in.empty()) fail(Errc::config, "synth: pass exactly one of --in or --generate");
  fs::create_directories(a.out);
  RunManifest m = new_manifest("synth");
  m.args = {"--out", absolute(a.out), "--seed", std::to_string(a.seed)};
  if (a.force) m.args.push_back("--force");

  if (a.generate > 0) {
    if (a.channels != 1 && a.channels != 3) fail(Errc::config, "synth: --channels must be 1 or 3");
    m.args.insert(m.args.end(), {"--generate", std::to_string(a.generate), "--height", std::to_string(a.height),
                                 "--width", std::to_string(a.width), "--channels", std::to_string(a.channels), "--low",
                                 fixed(a.low, 17), "--high", fixed(a.high, 17)});
    ProceduralSpec spec;
    spec.channels = a.channels;
    spec.height = a.height;
    spec.width = a.width;
    spec.low = static_cast<float>(a.low);
    spec.high = static_cast<float>(a.high);
    for (int i = 0; i < a.generate; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "img%04d.%s", i, a.channels == 1 ? "pgm" : "ppm");
      const fs::path dst = fs::path(a.out) / name;
      check_writable(dst, a.force);
      write_image(procedural_image(spec, derive_seed(a.seed, kGenerateStream, static_cast<std::uint64_t>(i))), dst);
      m.outputs.push_back(absolute(dst.string()));
    }
    out << "generated " << a.generate << " clean images in " << a.out << "\n";
  } else {
    if (a.sigma < 0.0) fail(Errc::config, "synth: --sigma must be non-negative");
    if (fs::equivalent(a.in, a.out)) fail(Errc::config, "synth: --in and --out must differ");
    m.args.insert(m.args.end(), {"--in", absolute(a.in), "--sigma", fixed(a.sigma, 17)});
    m.add_input(a.in);
    const auto files = list_images(a.in);
    if (files.empty()) fail(Errc::io, "synth: no .pgm/.ppm images in '" + a.in + "'");
    MetricReport report;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const ImageBuffer clean = read_image(files[i]);
      const ImageBuffer noisy = add_awgn(clean, {a.sigma, derive_seed(a.seed, kSynthStream, i)});
      const fs::path dst = fs::path(a.out) / files[i].filename();
      check_writable(dst, a.force);
      write_image(noisy, dst);
      m.outputs.push_back(absolute(dst.string()));
      if (clean.height >= 11 && clean.width >= 11) report.add(files[i].filename().string(), quantized(noisy), clean);
    }
    out << "wrote " << files.size() << " noisy images (sigma " << a.sigma << ") to " << a.out << "\n";
    if (!report.entries.empty()) out << "noisy vs clean: " << report.summary() << "\n";
  }
  m.save(fs::path(a.out) / "synth.manifest.json");
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string corpus;
  std::string out;
  std::string resume;
  bool print_config = false;
  bool quiet = false;
};

void require_patch_fits(const std::vector<ImageBuffer>& corpus, int patch) {
  const bool any = std::any_of(corpus.begin(), corpus.end(),
                               [&](const ImageBuffer& img) { return img.height >= patch && img.width >= patch; });
  if (!any) {
    fail(Errc::config, "corpus too small: no image is at least " + std::to_string(patch) + "x" +
                           std::to_string(patch) + " (the configured patch size)");
  }
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const RunConfig config = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (a.print_config) {
    out << format_config(config);
    return kOk;
  }
  if (a.corpus.empty() || a.out.empty()) fail(Errc::config, "train: --corpus and --out are required");
  const auto corpus = load_corpus(a.corpus);
  require_patch_fits(corpus, config.train.patch);

  RunManifest m = new_manifest("train");
  m.args = {"--corpus", absolute(a.corpus), "--out", absolute(a.out)};
  m.config = format_config(config);
  m.add_input(a.corpus);

  RIDNet net;
  TrainState state;
  if (!a.resume.empty()) {
    m.args.insert(m.args.end(), {"--resume", absolute(a.resume)});
    m.add_input(a.resume);
    LoadedCheckpoint loaded = load_checkpoint(a.resume);
    if (!(loaded.net.config() == config.network)) {
      fail(Errc::config, "train: network settings differ from the checkpoint being resumed");
    }
    state = training_state_from(loaded);
    net = std::move(loaded.net);
    out << "resuming at iteration " << state.next_iter << "\n";
  } else {
    net = RIDNet::initialized(config.network, config.train.seed);
  }

  const fs::path ckpt = a.out;
  const fs::path log_path = ckpt.string() + ".loss.csv";
  const bool append = !a.resume.empty();
  if (!append) write_loss_log(log_path, {}, false);

  std::vector<LossRecord> pending;
  const std::int64_t report_every = std::max<std::int64_t>(1, config.train.max_iters / 20);
  TrainCallbacks callbacks;
  callbacks.on_iteration = [&](const LossRecord& r) {
    pending.push_back(r);
    if (!a.quiet && ((r.iter + 1) % report_every == 0 || r.iter == 0)) {
      out << "iter " << r.iter + 1 << "/" << config.train.max_iters << "  loss " << fixed(r.loss, 6) << "  lr "
          << r.lr << "\n";
      out.flush();
    }
  };
  callbacks.on_checkpoint = [&](std::int64_t, RIDNet& current, const TrainState& s) {
    save_checkpoint(current, ckpt, training_state_records(current, s));
    write_loss_log(log_path, pending, true);
    pending.clear();
  };
  if (state.next_iter >= config.train.max_iters) {
    save_checkpoint(net, ckpt, training_state_records(net, state));
  }
  train(net, corpus, config.train, state, callbacks);

  m.outputs = {absolute(ckpt.string()), absolute(log_path.string())};
  m.save(ckpt.string() + ".manifest.json");
  out << "checkpoint " << ckpt.string() << " (" << net.parameter_count() << " parameters, " << state.next_iter
      << " iterations)\n";
  return kOk;
}

// ---------------------------------------------------------------- denoise

int cmd_denoise(const std::string& ckpt, const std::string& in, const std::string& dst, std::ostream& out) {
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  const ImageBuffer noisy = read_image(in);
  write_image(denoise(loaded.net, noisy), dst);
  RunManifest m = new_manifest("denoise");
  m.args = {"--ckpt", absolute(ckpt), "--in", absolute(in), "--out", absolute(dst)};
  m.add_input(ckpt);
  m.add_input(in);
  m.outputs = {absolute(dst)};
  m.save(dst + ".manifest.json");
  out << "wrote " << dst << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string ckpt;
  std::string clean;
  std::string noisy;
  std::string report;
  bool quantize = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto clean_files = list_images(a.clean);
  const auto noisy_files = list_images(a.noisy);
  std::map<std::string, fs::path> noisy_by_name;
  for (const auto& p : noisy_files) noisy_by_name[p.filename().string()] = p;
  std::vector<std::string> unpaired;
  for (const auto& p : clean_files) {
    if (noisy_by_name.erase(p.filename().string()) == 0) unpaired.push_back(p.filename().string() + " (clean only)");
  }
  for (const auto& [name, p] : noisy_by_name) unpaired.push_back(name + " (noisy only)");
  if (!unpaired.empty()) {
    std::string list;
    for (const auto& u : unpaired) list += "\n  " + u;
    fail(Errc::io, "eval: unpaired files:" + list);
  }
  if (clean_files.empty()) fail(Errc::io, "eval: no images in '" + a.clean + "'");

  std::optional<LoadedCheckpoint> loaded;
  if (!a.ckpt.empty()) loaded = load_checkpoint(a.ckpt);
  MetricReport report;
  for (const auto& p : clean_files) {
    const ImageBuffer clean = read_image(p);
    const ImageBuffer noisy = read_image(fs::path(a.noisy) / p.filename());
    ImageBuffer estimate = loaded ? denoise(loaded->net, noisy) : noisy;
    if (a.quantize) estimate = quantized(estimate);
    report.add(p.filename().string(), estimate, clean);
  }
  report.write_csv(a.report);

  RunManifest m = new_manifest("eval");
  m.args = {"--clean", absolute(a.clean), "--noisy", absolute(a.noisy), "--report", absolute(a.report)};
  if (loaded) {
    m.args.insert(m.args.end(), {"--ckpt", absolute(a.ckpt)});
    m.add_input(a.ckpt);
  }
  if (a.quantize) m.args.push_back("--quantize");
  m.add_input(a.clean);
  m.add_input(a.noisy);
  m.outputs = {absolute(a.report)};
  m.save(a.report + ".manifest.json");
  out << report.summary() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out) {
  const auto results = run_gradcheck_suite(options);
  bool ok = true;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %14s %9s %8s  %s\n", "case", "max rel err", "checked", "skipped", "result");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-26s %14.3e %9zu %8zu  %s\n", r.name.c_str(), r.max_error, r.checked,
                  r.skipped, r.passed() ? "PASS" : "FAIL");
    out << line;
    ok = ok && r.passed();
  }
  out << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance " << options.tolerance << ", " << options.seeds
      << " seeds from " << options.seed << ")\n";
  return ok ? kOk : kNumeric;
}

// ---------------------------------------------------------------- ablate

struct AblateArgs {
  std::string config;
  std::string corpus;
  std::string heldout;
  std::string configs = "study";
  std::string report;
  std::int64_t budget = 0;
  int seeds = 1;
  double eval_sigma = -1.0;
  std::uint64_t eval_seed = 1;
};

std::vector<Ablation> parse_ablation_list(const std::string& text) {
  if (text == "study") {
    const auto rows = Ablation::study_rows();
    return {rows.begin(), rows.end()};
  }
  std::vector<Ablation> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(Ablation::parse(item));
  }
  if (out.empty()) fail(Errc::config, "ablate: --configs lists no configurations");
  return out;
}

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  RunConfig base = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (a.budget > 0) base.train.max_iters = a.budget;
  if (base.train.max_iters < 1) fail(Errc::config, "ablate: the budget must be at least one iteration");
  if (a.seeds < 1) fail(Errc::config, "ablate: --seeds must be >= 1");
  if (a.report.empty() || a.corpus.empty()) fail(Errc::config, "ablate: --corpus and --report are required");
  const auto rows = parse_ablation_list(a.configs);
  const auto corpus = load_corpus(a.corpus);
  require_patch_fits(corpus, base.train.patch);
  std::vector<ImageBuffer> heldout_clean;
  std::vector<ImageBuffer> heldout_noisy;
  const double eval_sigma = a.eval_sigma >= 0.0 ? a.eval_sigma : base.train.sigma;
  if (!a.heldout.empty()) {
    heldout_clean = load_corpus(a.heldout);
    for (std::size_t i = 0; i < heldout_clean.size(); ++i) {
      heldout_noisy.push_back(add_awgn(heldout_clean[i], {eval_sigma, derive_seed(a.eval_seed, kHeldoutStream, i)}));
    }
  }
  double noisy_db = 0.0;
  for (std::size_t i = 0; i < heldout_clean.size(); ++i) noisy_db += psnr(heldout_noisy[i], heldout_clean[i]);
  if (!heldout_clean.empty()) {
    noisy_db /= static_cast<double>(heldout_clean.size());
    out << "held-out noisy baseline " << fixed(noisy_db, 3) << " dB over " << heldout_clean.size() << " images\n";
  }

  std::string csv = "label,lsc,ssc,lc,fa,seed,params,final_loss,psnr,noisy_psnr\n";
  struct Summary {
    double loss = 0.0;
    double psnr = 0.0;
  };
  std::vector<Summary> summary(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int s = 0; s < a.seeds; ++s) {
      RunConfig cfg = base;
      cfg.network.ablation = rows[r];
      cfg.train.seed = base.train.seed + static_cast<std::uint64_t>(s);
      cfg.validate();
      RIDNet net = RIDNet::initialized(cfg.network, cfg.train.seed);
      TrainState state;
      const auto started = std::chrono::steady_clock::now();
      const auto result = train(net, corpus, cfg.train, state);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      // Mean over the last tenth of the run smooths per-batch variation.
      const std::size_t tail = std::max<std::size_t>(1, result.log.size() / 10);
      double loss = 0.0;
      for (std::size_t i = result.log.size() - tail; i < result.log.size(); ++i) loss += result.log[i].loss;
      loss /= static_cast<double>(tail);
      double psnr_db = 0.0;
      for (std::size_t i = 0; i < heldout_clean.size(); ++i) psnr_db += psnr(denoise(net, heldout_noisy[i]), heldout_clean[i]);
      if (!heldout_clean.empty()) psnr_db /= static_cast<double>(heldout_clean.size());
      summary[r].loss += loss / a.seeds;
      summary[r].psnr += psnr_db / a.seeds;
      const auto& ab = rows[r];
      csv += ab.label() + "," + std::to_string(ab.lsc) + "," + std::to_string(ab.ssc) + "," + std::to_string(ab.lc) +
             "," + std::to_string(ab.fa) + "," + std::to_string(cfg.train.seed) + "," +
             std::to_string(net.parameter_count()) + "," + fixed(loss, 8) + "," +
             (heldout_clean.empty() ? std::string() : fixed(psnr_db, 6)) + "," +
             (heldout_clean.empty() ? std::string() : fixed(noisy_db, 6)) + "\n";
      out << ab.label() << " seed " << cfg.train.seed << ": loss " << fixed(loss, 6);
      if (!heldout_clean.empty()) out << ", held-out PSNR " << fixed(psnr_db, 3) << " dB";
      out << " (" << fixed(seconds, 1) << " s)\n";
      out.flush();
    }
  }
  {
    const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size());
    write_file_bytes(a.report, bytes);
  }

  // Flag rows and one column per configuration.
  auto row = [&](const std::string& head, const std::function<std::string(std::size_t)>& cell) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-6s", head.c_str());
    out << buf;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::snprintf(buf, sizeof buf, " %9s", cell(r).c_str());
      out << buf;
    }
    out << "\n";
  };
  auto mark = [](bool b) { return std::string(b ? "x" : "-"); };
  row("LSC", [&](std::size_t r) { return mark(rows[r].lsc); });
  row("SSC", [&](std::size_t r) { return mark(rows[r].ssc); });
  row("LC", [&](std::size_t r) { return mark(rows[r].lc); });
  row("FA", [&](std::size_t r) { return mark(rows[r].fa); });
  row("loss", [&](std::size_t r) { return fixed(summary[r].loss, 5); });
  if (!heldout_clean.empty()) row("PSNR", [&](std::size_t r) { return fixed(summary[r].psnr, 2); });

  RunManifest m = new_manifest("ablate");
  m.args = {"--corpus", absolute(a.corpus), "--configs", a.configs, "--seeds", std::to_string(a.seeds), "--report",
            absolute(a.report)};
  if (!a.heldout.empty()) {
    m.args.insert(m.args.end(), {"--heldout", absolute(a.heldout), "--eval-sigma", fixed(eval_sigma, 17),
                                 "--eval-seed", std::to_string(a.eval_seed)});
    m.add_input(a.heldout);
  }
  m.config = format_config(base);
  m.add_input(a.corpus);
  m.outputs = {absolute(a.report)};
  m.save(a.report + ".manifest.json");
  return kOk;
}

// ---------------------------------------------------------------- replay

// Option naming the primary output of each verb.
const std::map<std::string, std::string>& output_flags() {
  static const std::map<std::string, std::string> flags = {
      {"synth", "--out"}, {"train", "--out"}, {"denoise", "--out"}, {"eval", "--report"}, {"ablate", "--report"}};
  return flags;
}

int cmd_replay(const std::string& manifest_path, const std::string& new_out, std::ostream& out, std::ostream& err) {
  const RunManifest m = RunManifest::load(manifest_path);
  if (m.tool != "ridnet") fail(Errc::config, "replay: manifest was not written by ridnet");
  const auto flag = output_flags().find(m.command);
  if (flag == output_flags().end()) fail(Errc::config, "replay: command '" + m.command + "' cannot be replayed");
  m.verify_inputs();

  std::vector<std::string> args = m.args;
  if (!new_out.empty()) {
    const auto it = std::find(args.begin(), args.end(), flag->second);
    if (it == args.end() || it + 1 == args.end()) fail(Errc::config, "replay: manifest lacks " + flag->second);
    *(it + 1) = absolute(new_out);
  }
  if (!m.config.empty()) {
    const auto it = std::find(args.begin(), args.end(), flag->second);
    const fs::path cfg_path = fs::path(*(it + 1)).string() + ".replay.cfg";
    if (cfg_path.has_parent_path()) fs::create_directories(cfg_path.parent_path());
    write_file_bytes(cfg_path, std::span(reinterpret_cast<const std::uint8_t*>(m.config.data()), m.config.size()));
    args.insert(args.end(), {"--config", cfg_path.string()});
  }
  if (m.command == "synth" && std::find(args.begin(), args.end(), "--force") == args.end()) args.push_back("--force");
  std::vector<std::string> argv = {"ridnet", m.command};
  argv.insert(argv.end(), args.begin(), args.end());
  out << "replaying " << m.command << " from " << manifest_path << "\n";
  return run(argv, out, err);
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ridnet: blind image denoiser with feature attention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Add Gaussian noise to clean images, or generate a clean corpus");
  s->add_option("--in", synth.in, "Directory of clean .pgm/.ppm images");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--sigma", synth.sigma, "Noise standard deviation on the 0-255 scale");
  s->add_option("--seed", synth.seed, "Noise seed");
  s->add_flag("--force", synth.force, "Overwrite existing outputs");
  s->add_option("--generate", synth.generate, "Write this many procedural clean images instead");
  s->add_option("--height", synth.height, "Generated image height");
  s->add_option("--width", synth.width, "Generated image width");
  s->add_option("--channels", synth.channels, "Generated image channels (1 or 3)");
  s->add_option("--low", synth.low, "Generated value floor in [0,1]");
  s->add_option("--high", synth.high, "Generated value ceiling in [0,1]");

  TrainArgs train_args;
  auto* t = app.add_subcommand("train", "Train a denoiser on a clean corpus with synthetic noise");
  t->add_option("--config", train_args.config, "key=value config file");
  t->add_option("--corpus", train_args.corpus, "Directory of clean training images");
  t->add_option("--out", train_args.out, "Checkpoint path");
  t->add_option("--resume", train_args.resume, "Checkpoint to continue from");
  t->add_flag("--print-config", train_args.print_config, "Print the resolved config and exit");
  t->add_flag("--quiet", train_args.quiet, "No progress lines");

  std::string dn_ckpt, dn_in, dn_out;
  auto* d = app.add_subcommand("denoise", "Denoise one image (blind: no noise level is given)");
  d->add_option("--ckpt", dn_ckpt, "Checkpoint")->required();
  d->add_option("--in", dn_in, "Noisy image")->required();
  d->add_option("--out", dn_out, "Denoised image")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "PSNR/SSIM of paired clean and noisy directories");
  e->add_option("--ckpt", eval.ckpt, "Checkpoint; without it the noisy images are scored as-is");
  e->add_option("--clean", eval.clean, "Clean reference directory")->required();
  e->add_option("--noisy", eval.noisy, "Noisy directory, paired by filename")->required();
  e->add_option("--report", eval.report, "CSV report path")->required();
  e->add_flag("--quantize", eval.quantize, "Round estimates to 8 bits before scoring");

  GradcheckOptions gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  g->add_option("--seed", gc.seed, "First seed");
  g->add_option("--seeds", gc.seeds, "Random draws per case");

  AblateArgs ablate;
  auto* a = app.add_subcommand("ablate", "Train each connection/attention configuration under one budget");
  a->add_option("--config", ablate.config, "Base key=value config");
  a->add_option("--corpus", ablate.corpus, "Training corpus")->required();
  a->add_option("--heldout", ablate.heldout, "Clean held-out images for PSNR");
  a->add_option("--configs", ablate.configs, "'study' (every row of the ablation study) or comma-separated labels such as none,all,ssc+lc+fa");
  a->add_option("--budget", ablate.budget, "Iterations per configuration (overrides max_iters)");
  a->add_option("--seeds", ablate.seeds, "Seeds per configuration");
  a->add_option("--eval-sigma", ablate.eval_sigma, "Held-out noise level (default: training sigma)");
  a->add_option("--eval-seed", ablate.eval_seed, "Seed of the held-out noise");
  a->add_option("--report", ablate.report, "CSV report path")->required();

  std::string manifest, replay_out;
  auto* r = app.add_subcommand("replay", "Re-run a command from its manifest");
  r->add_option("--manifest", manifest, "Manifest JSON")->required();
  r->add_option("--out", replay_out, "Write the primary output here instead");

  std::vector<const char*> cargv;
  for (const auto& arg : argv) cargv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& pe) {
    if (pe.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "ridnet: " << pe.what() << "\n";
    return kUsage;
  }

  try {
    if (*s) return cmd_synth(synth, out);
    if (*t) return cmd_train(train_args, out);
    if (*d) return cmd_denoise(dn_ckpt, dn_in, dn_out, out);
    if (*e) return cmd_eval(eval, out);
    if (*g) return cmd_gradcheck(gc, out);
    if (*a) return cmd_ablate(ablate, out);
    if (*r) return cmd_replay(manifest, replay_out, out, err);
  } catch (const Error& ex) {
    err << "ridnet: " << errc_name(ex.code()) << ": " << ex.what() << "\n";
    return exit_code_for(ex.code());
  } catch (const fs::filesystem_error& ex) {
    err << "ridnet: io: " << ex.what() << "\n";
    return kIo;
  } catch (const std::exception& ex) {
    err << "ridnet: internal: " << ex.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace ridnet::cli
