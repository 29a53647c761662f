// Copyright 2026 The Hacomp Authors. All Rights Reserved.
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
//
// Operator entry point. Subcommands: train, eval, process, profile.
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical abort.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eval/evalkit.hpp"
#include "train/synthvoice.hpp"
#include "train/trainer.hpp"
#include "train/wav.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace hacomp;

constexpr const char* kVersion = "hacomp 1.0.0";

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  CheckData(os.good(), "cannot write " + path);
  os << content;
  CheckData(os.good(), "write failed for " + path);
}

// Strict JSON config loading: every key must be known, values override the
// given option map.
void ApplyJsonConfig(const std::string& path,
                     const std::map<std::string, std::function<void(const json&)>>& setters) {
  std::ifstream is(path);
  CheckData(is.good(), "cannot read config file " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    FailConfig("config " + path + " is not valid JSON: " + e.what());
  }
  CheckConfig(j.is_object(), "config " + path + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    CheckConfig(it != setters.end(), "config " + path + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      FailConfig("config " + path + ": bad value for '" + key + "': " + e.what());
    }
  }
}

json EffectiveConfigEcho(const std::map<std::string, json>& kv) {
  json j;
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

void WriteManifest(const std::string& out_dir, const std::string& command,
                   uint64_t seed, const json& config_echo) {
  json j;
  j["tool"] = kVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config_echo;
  WriteFile(out_dir + "/manifest.json", j.dump(2));
}

std::vector<double> ParseCounts(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  CheckConfig(out.size() == 3, "fiber counts must be H,M,L");
  return out;
}

periphery::HearingProfile ResolveProfile(const std::string& name_or_path,
                                         const periphery::CFMap& map) {
  if (name_or_path.size() > 5 &&
      name_or_path.substr(name_or_path.size() - 5) == ".json") {
    std::ifstream is(name_or_path);
    CheckData(is.good(), "cannot read profile file " + name_or_path);
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return periphery::ProfileFromJson(text, map);
  }
  return periphery::PresetProfile(name_or_path, map);
}

losses::LossSpec ResolveLoss(const std::string& name_or_path) {
  if (name_or_path.size() > 5 &&
      name_or_path.substr(name_or_path.size() - 5) == ".json") {
    std::ifstream is(name_or_path);
    CheckData(is.good(), "cannot read loss spec file " + name_or_path);
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return losses::LossSpecFromJson(text);
  }
  return losses::Preset(name_or_path);
}

// ---------------------------------------------------------------------------

struct TrainCli {
  std::string corpus, out_dir, config_file;
  std::string loss = "L_r2rp2Rp2+Tx";
  std::string profile = "Slope35+CS-7-0-0";
  std::string arch = "paper";
  int64_t epochs = 60;
  int64_t sentences = 0;  // 0 = all
  uint64_t seed = 1;
  double lr = 1e-4;
  double level_db = 70.0;
  int64_t cf_step = 10;
  int64_t window = 2048;
  bool desk = false;
};

int CmdTrain(TrainCli cli) {
  if (!cli.config_file.empty()) {
    ApplyJsonConfig(
        cli.config_file,
        {{"corpus", [&](const json& v) { cli.corpus = v.get<std::string>(); }},
         {"out", [&](const json& v) { cli.out_dir = v.get<std::string>(); }},
         {"loss", [&](const json& v) { cli.loss = v.get<std::string>(); }},
         {"profile", [&](const json& v) { cli.profile = v.get<std::string>(); }},
         {"arch", [&](const json& v) { cli.arch = v.get<std::string>(); }},
         {"epochs", [&](const json& v) { cli.epochs = v.get<int64_t>(); }},
         {"sentences", [&](const json& v) { cli.sentences = v.get<int64_t>(); }},
         {"seed", [&](const json& v) { cli.seed = v.get<uint64_t>(); }},
         {"lr", [&](const json& v) { cli.lr = v.get<double>(); }},
         {"level_db", [&](const json& v) { cli.level_db = v.get<double>(); }},
         {"cf_step", [&](const json& v) { cli.cf_step = v.get<int64_t>(); }},
         {"window", [&](const json& v) { cli.window = v.get<int64_t>(); }},
         {"desk", [&](const json& v) { cli.desk = v.get<bool>(); }}});
  }
  CheckConfig(!cli.corpus.empty(), "train: --corpus is required");
  CheckConfig(!cli.out_dir.empty(), "train: --out is required");

  trainer::TrainConfig cfg =
      cli.desk ? trainer::TrainConfig::Desk() : trainer::TrainConfig();
  if (cli.desk && cli.arch == "paper") cli.arch = "desk";
  cfg.loss = ResolveLoss(cli.loss);
  cfg.hi_profile = cli.profile;
  cfg.arch = dnn::ArchSpec::Parse(cli.arch);
  cfg.epochs = cli.epochs;
  cfg.learning_rate = cli.lr;
  cfg.seed = cli.seed;
  cfg.level_db_spl = cli.level_db;
  cfg.cf_step = cli.cf_step;
  cfg.window = cli.window;

  // Validate the profile name before touching data.
  (void)periphery::PresetProfile;
  {
    periphery::CFMap map =
        periphery::GreenwoodCf(cfg.n_channels, cfg.cf_min_hz, cfg.cf_max_hz);
    (void)ResolveProfile(cli.profile, map);
  }

  std::vector<trainer::DatasetItem> items =
      trainer::IngestDir(cli.corpus, cfg.ingest(), cli.sentences);
  std::printf("[train] %zu sentences, loss %s, profile %s, arch %s, %lld epochs\n",
              items.size(), cfg.loss.name.c_str(), cli.profile.c_str(),
              cli.arch.c_str(), static_cast<long long>(cfg.epochs));

  trainer::TrainResult result = trainer::Train(cfg, items);

  fs::create_directories(cli.out_dir);
  json meta;
  meta["seed"] = cfg.seed;
  meta["loss"] = cfg.loss.name;
  meta["profile"] = cli.profile;
  meta["epochs"] = cfg.epochs;
  meta["lr"] = cfg.learning_rate;
  meta["tool"] = kVersion;
  dnn::SaveCheckpoint(cli.out_dir + "/checkpoint.dnnha", result.model, meta.dump());
  WriteFile(cli.out_dir + "/loss_log.csv", trainer::LossLogCsv(result.log));
  WriteManifest(cli.out_dir, "train", cfg.seed,
                EffectiveConfigEcho({{"corpus", cli.corpus},
                                     {"out", cli.out_dir},
                                     {"loss", cli.loss},
                                     {"profile", cli.profile},
                                     {"arch", cli.arch},
                                     {"epochs", cli.epochs},
                                     {"sentences", cli.sentences},
                                     {"seed", cli.seed},
                                     {"lr", cli.lr},
                                     {"level_db", cli.level_db},
                                     {"cf_step", cli.cf_step},
                                     {"window", cli.window},
                                     {"desk", cli.desk}}));
  for (size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
    std::printf("[train] epoch %zu mean loss %.6g\n", e, result.epoch_mean_loss[e]);
  std::printf("[train] wrote %s\n", (cli.out_dir + "/checkpoint.dnnha").c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalCli {
  std::string corpus, out_dir, config_file, checkpoint;
  std::string profile = "Slope35+CS-7-0-0";
  bool unprocessed = false;
  bool no_efr = false;
  std::vector<double> levels = {30, 40, 50, 60, 70};
  std::vector<double> snrs;
  int64_t sentences = 0;
  uint64_t seed = 1;
  int64_t cf_step = 10;
  int64_t window = 2048;
};

int CmdEval(EvalCli cli) {
  if (!cli.config_file.empty()) {
    ApplyJsonConfig(
        cli.config_file,
        {{"corpus", [&](const json& v) { cli.corpus = v.get<std::string>(); }},
         {"out", [&](const json& v) { cli.out_dir = v.get<std::string>(); }},
         {"checkpoint", [&](const json& v) { cli.checkpoint = v.get<std::string>(); }},
         {"profile", [&](const json& v) { cli.profile = v.get<std::string>(); }},
         {"unprocessed", [&](const json& v) { cli.unprocessed = v.get<bool>(); }},
         {"no_efr", [&](const json& v) { cli.no_efr = v.get<bool>(); }},
         {"levels", [&](const json& v) { cli.levels = v.get<std::vector<double>>(); }},
         {"snr", [&](const json& v) { cli.snrs = v.get<std::vector<double>>(); }},
         {"sentences", [&](const json& v) { cli.sentences = v.get<int64_t>(); }},
         {"seed", [&](const json& v) { cli.seed = v.get<uint64_t>(); }},
         {"cf_step", [&](const json& v) { cli.cf_step = v.get<int64_t>(); }},
         {"window", [&](const json& v) { cli.window = v.get<int64_t>(); }}});
  }
  CheckConfig(!cli.corpus.empty(), "eval: --corpus is required");
  CheckConfig(!cli.out_dir.empty(), "eval: --out is required");
  CheckConfig(cli.unprocessed != !cli.checkpoint.empty(),
              "eval: pass exactly one of --checkpoint or --unprocessed");

  dnn::ModelParams model;
  bool have_model = false;
  if (!cli.checkpoint.empty()) {
    std::string meta;
    model = dnn::LoadCheckpoint(cli.checkpoint, &meta);
    have_model = true;
    CheckConfig(cli.window % model.arch.granularity() == 0,
                "eval: window " + std::to_string(cli.window) +
                    " is not a multiple of the checkpoint granularity " +
                    std::to_string(model.arch.granularity()));
  }

  evalkit::EvalConfig ecfg;
  ecfg.hi_profile = cli.profile;
  ecfg.levels_db = cli.levels;
  ecfg.snrs_db = cli.snrs;
  ecfg.with_efr = !cli.no_efr;
  ecfg.seed = cli.seed;
  ecfg.cf_step = cli.cf_step;
  ecfg.window = cli.window;

  // Load corpus sentences at the periphery rate, uncalibrated.
  std::vector<std::vector<double>> sentences;
  std::vector<std::string> names;
  {
    std::vector<std::string> paths;
    CheckData(fs::is_directory(cli.corpus), "corpus directory not found: " + cli.corpus);
    for (const auto& entry : fs::directory_iterator(cli.corpus))
      if (entry.is_regular_file() && entry.path().extension() == ".wav")
        paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    CheckData(!paths.empty(), "no .wav files in corpus directory: " + cli.corpus);
    if (cli.sentences > 0 && static_cast<int64_t>(paths.size()) > cli.sentences)
      paths.resize(static_cast<size_t>(cli.sentences));
    for (const std::string& p : paths) {
      wav::WavData w = wav::Read(p);
      sentences.push_back(wav::Resample(w.samples, w.sample_rate_hz,
                                        ecfg.periphery.sample_rate_hz));
      names.push_back(fs::path(p).filename().string());
    }
  }

  evalkit::EvalReport report =
      evalkit::Evaluate(have_model ? &model : nullptr, ecfg, sentences, names);

  fs::create_directories(cli.out_dir);
  WriteFile(cli.out_dir + "/report.json", evalkit::ReportToJson(report));
  WriteFile(cli.out_dir + "/report.csv", evalkit::ReportCsv(report));
  WriteFile(cli.out_dir + "/nrmse_vs_level.csv", evalkit::NrmseVsLevelCsv(report));
  WriteFile(cli.out_dir + "/efr.csv", evalkit::EfrCsv(report));
  WriteManifest(cli.out_dir, "eval", cli.seed,
                EffectiveConfigEcho({{"corpus", cli.corpus},
                                     {"out", cli.out_dir},
                                     {"checkpoint", cli.checkpoint},
                                     {"profile", cli.profile},
                                     {"unprocessed", cli.unprocessed},
                                     {"levels", cli.levels},
                                     {"snr", cli.snrs},
                                     {"no_efr", cli.no_efr},
                                     {"sentences", cli.sentences},
                                     {"seed", cli.seed},
                                     {"cf_step", cli.cf_step},
                                     {"window", cli.window}}));
  for (const auto& [cond, value] : report.aggregate_nrmse)
    std::printf("[eval] %s mean NRMSE %.2f%%\n", cond.c_str(), 100.0 * value);
  if (report.has_efr)
    std::printf("[eval] EFR_sum nV: NH %.3f, HI unprocessed %.3f, HI processed %.3f\n",
                report.efr_nh_nv, report.efr_hi_unprocessed_nv,
                report.efr_hi_processed_nv);
  return 0;
}

// ---------------------------------------------------------------------------

int CmdProcess(const std::string& checkpoint, const std::string& in_path,
               const std::string& out_path) {
  std::string meta;
  dnn::ModelParams model = dnn::LoadCheckpoint(checkpoint, &meta);
  wav::WavData in = wav::Read(in_path);
  const double model_rate = 20000.0;
  std::vector<double> x = wav::Resample(in.samples, in.sample_rate_hz, model_rate);

  // Pad up to a whole number of processing windows (2048 covers the required
  // multiple-of-granularity contract).
  const int64_t window = 2048;
  CheckConfig(window % model.arch.granularity() == 0,
              "process: checkpoint granularity " +
                  std::to_string(model.arch.granularity()) +
                  " does not divide the processing window");
  const int64_t padded_len =
      ((static_cast<int64_t>(x.size()) + window - 1) / window) * window;
  std::vector<double> padded(x);
  padded.resize(static_cast<size_t>(padded_len), 0.0);

  Array input = Array::FromVector({padded_len}, padded);
  Array processed = dnn::ForwardWindowed(nullptr, model, input, window);

  std::vector<double> y(processed.values().begin(),
                        processed.values().begin() + static_cast<int64_t>(x.size()));
  // Peak limit into full scale.
  double peak = 0;
  for (double v : y) peak = std::max(peak, std::fabs(v));
  if (peak > 1.0) {
    std::fprintf(stderr,
                 "[process] warning: peak %.3f exceeded full scale; output limited\n",
                 peak);
    for (double& v : y) v /= peak;
  }
  std::vector<double> out = wav::Resample(y, model_rate, in.sample_rate_hz);
  wav::Write(out_path, out, in.sample_rate_hz, /*float32=*/true);
  std::printf("[process] %s -> %s (%zu samples at %.0f Hz)\n", in_path.c_str(),
              out_path.c_str(), out.size(), in.sample_rate_hz);
  return 0;
}

// ---------------------------------------------------------------------------

int CmdProfile(const std::string& action, const std::string& name,
               double hl_at_8k, const std::string& counts_text,
               const std::string& new_name, const std::string& out_path) {
  periphery::CFMap map = periphery::GreenwoodCf(201, 112.0, 12000.0);
  if (action == "list") {
    for (const std::string& n : periphery::PresetProfileNames())
      std::printf("%s\n", n.c_str());
    return 0;
  }
  if (action == "show") {
    CheckConfig(!name.empty(), "profile show: a preset name is required");
    periphery::HearingProfile p = ResolveProfile(name, map);
    const std::string text = periphery::ProfileToJson(p);
    if (out_path.empty()) {
      std::printf("%s\n", text.c_str());
    } else {
      WriteFile(out_path, text);
    }
    return 0;
  }
  if (action == "make-sloping") {
    CheckConfig(hl_at_8k >= 0, "profile make-sloping: --hl-at-8k must be >= 0");
    periphery::HearingProfile p;
    p.name = new_name.empty()
                 ? ("Slope" + std::to_string(static_cast<int>(hl_at_8k)))
                 : new_name;
    p.ohc_loss_db = periphery::SlopingAudiogram(hl_at_8k, map);
    if (!counts_text.empty()) {
      std::vector<double> c = ParseCounts(counts_text);
      p.fibers_h = c[0];
      p.fibers_m = c[1];
      p.fibers_l = c[2];
    }
    const std::string text = periphery::ProfileToJson(p);
    if (out_path.empty()) {
      std::printf("%s\n", text.c_str());
    } else {
      WriteFile(out_path, text);
    }
    return 0;
  }
  FailConfig("profile: unknown action '" + action + "' (list | show | make-sloping)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - closed-loop hearing-loss compensation trainer"};
  app.require_subcommand(1);

  TrainCli train_cli;
  CLI::App* train = app.add_subcommand("train", "train a compensation model");
  train->add_option("--corpus", train_cli.corpus, "directory of mono WAV files");
  train->add_option("--out", train_cli.out_dir, "output directory");
  train->add_option("--config", train_cli.config_file, "JSON config file");
  train->add_option("--loss", train_cli.loss, "loss preset name or JSON file");
  train->add_option("--profile", train_cli.profile, "hearing profile preset or .json");
  train->add_option("--arch", train_cli.arch, "paper | desk | comma-separated filters");
  train->add_option("--epochs", train_cli.epochs);
  train->add_option("--sentences", train_cli.sentences, "cap on corpus items (0 = all)");
  train->add_option("--seed", train_cli.seed);
  train->add_option("--lr", train_cli.lr);
  train->add_option("--level-db", train_cli.level_db, "calibration level, dB SPL");
  train->add_option("--cf-step", train_cli.cf_step, "channel subsampling step");
  train->add_option("--window", train_cli.window, "processing window, samples");
  train->add_flag("--desk", train_cli.desk, "desk-scale defaults (small arch, 5 epochs)");

  EvalCli eval_cli;
  CLI::App* eval = app.add_subcommand("eval", "evaluate restoration");
  eval->add_option("--corpus", eval_cli.corpus, "directory of mono WAV files");
  eval->add_option("--out", eval_cli.out_dir, "output directory");
  eval->add_option("--config", eval_cli.config_file, "JSON config file");
  eval->add_option("--checkpoint", eval_cli.checkpoint, "trained checkpoint");
  eval->add_flag("--unprocessed", eval_cli.unprocessed, "baseline without processing");
  eval->add_option("--profile", eval_cli.profile);
  eval->add_option("--levels", eval_cli.levels, "SPL levels for the quiet sweep");
  eval->add_option("--snr", eval_cli.snrs, "SNR conditions (dB) at 70 dB SPL");
  eval->add_flag("--no-efr", eval_cli.no_efr, "skip the SAM-tone EFR block");
  eval->add_option("--sentences", eval_cli.sentences, "cap on corpus items (0 = all)");
  eval->add_option("--seed", eval_cli.seed);
  eval->add_option("--cf-step", eval_cli.cf_step);
  eval->add_option("--window", eval_cli.window);

  std::string proc_checkpoint, proc_in, proc_out;
  CLI::App* process = app.add_subcommand("process", "run a WAV through a checkpoint");
  process->add_option("--checkpoint", proc_checkpoint)->required();
  process->add_option("in", proc_in, "input WAV")->required();
  process->add_option("out", proc_out, "output WAV")->required();

  std::string prof_action, prof_name, prof_counts, prof_new_name, prof_out;
  double prof_hl = -1;
  CLI::App* profile = app.add_subcommand("profile", "list/show/make hearing profiles");
  profile->add_option("action", prof_action, "list | show | make-sloping")->required();
  profile->add_option("preset", prof_name, "preset name (for show)");
  profile->add_option("--hl-at-8k", prof_hl, "dB HL at 8 kHz (make-sloping)");
  profile->add_option("--counts", prof_counts, "fiber counts H,M,L");
  profile->add_option("--name", prof_new_name, "name for the generated profile");
  profile->add_option("--out", prof_out, "write JSON here instead of stdout");

  int gen_count = 20;
  double gen_duration = 3.0, gen_rate = 16000.0;
  uint64_t gen_seed = 42;
  std::string gen_dir;
  CLI::App* gen = app.add_subcommand(
      "make-corpus", "generate a deterministic synthetic demo corpus");
  gen->add_option("--out", gen_dir)->required();
  gen->add_option("--count", gen_count);
  gen->add_option("--duration", gen_duration, "seconds per sentence");
  gen->add_option("--rate", gen_rate, "WAV sample rate");
  gen->add_option("--seed", gen_seed);

  try {
    app.parse(argc, argv);
    if (train->parsed()) return CmdTrain(train_cli);
    if (eval->parsed()) return CmdEval(eval_cli);
    if (process->parsed()) return CmdProcess(proc_checkpoint, proc_in, proc_out);
    if (profile->parsed())
      return CmdProfile(prof_action, prof_name, prof_hl, prof_counts,
                        prof_new_name, prof_out);
    if (gen->parsed()) {
      synthvoice::WriteCorpus(gen_dir, gen_count, gen_duration, gen_rate, gen_seed);
      std::printf("[make-corpus] wrote %d sentences to %s\n", gen_count,
                  gen_dir.c_str());
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error (data): %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error (numeric): %s\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
