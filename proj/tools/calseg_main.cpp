/*
 * Copyright 2026 The calseg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// calseg command-line tool. Talks to the library only through calseg.h.
//
// Exit status: 0 success, 1 internal failure, 2 bad input (parse, shape,
// unknown tag), 3 probabilities off the simplex, 4 empty mask, 5 output not
// writable, 6 training diverged.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calseg/calseg.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitNotSimplex = 3,
  kExitEmpty = 4,
  kExitUnwritable = 5,
  kExitDiverged = 6,
};

// Thrown to stop with a diagnostic and an exit status.
struct Exit {
  int code;
  std::string message;
};

[[noreturn]] void stop(int code, const std::string& message) {
  throw Exit{code, message};
}

int exit_code(calseg_status status, bool writing) {
  switch (status) {
    case CALSEG_OK: return kExitOk;
    case CALSEG_ERR_ARGUMENT:
    case CALSEG_ERR_SHAPE:
    case CALSEG_ERR_FORMAT: return kExitInput;
    case CALSEG_ERR_NOT_SIMPLEX: return kExitNotSimplex;
    case CALSEG_ERR_EMPTY: return kExitEmpty;
    case CALSEG_ERR_IO: return writing ? kExitUnwritable : kExitInput;
    case CALSEG_ERR_DIVERGED: return kExitDiverged;
    case CALSEG_ERR_INTERNAL: break;
  }
  return kExitFailure;
}

void check(calseg_status status, bool writing = false) {
  if (status != CALSEG_OK) stop(exit_code(status, writing), calseg_last_error());
}

struct TensorFree {
  void operator()(calseg_tensor* t) const { calseg_tensor_free(t); }
};
struct MaskFree {
  void operator()(calseg_mask* m) const { calseg_mask_free(m); }
};
struct ArtifactsFree {
  void operator()(calseg_artifacts* a) const { calseg_artifacts_free(a); }
};
struct StringFree {
  void operator()(char* s) const { calseg_string_free(s); }
};
using TensorPtr = std::unique_ptr<calseg_tensor, TensorFree>;
using MaskPtr = std::unique_ptr<calseg_mask, MaskFree>;
using ArtifactsPtr = std::unique_ptr<calseg_artifacts, ArtifactsFree>;
using StringPtr = std::unique_ptr<char, StringFree>;

std::string absolute(const std::string& path) {
  return fs::absolute(path).lexically_normal().string();
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) stop(kExitUnwritable, "cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      stop(kExitUnwritable, "failed writing " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    stop(kExitUnwritable, "cannot move " + tmp + " to " + path);
  }
}

// Creates `dir` and proves it accepts files before any work starts.
void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    stop(kExitUnwritable, "output directory " + dir + " cannot be created");
  }
  const std::string probe = (fs::path(dir) / ".calseg-probe").string();
  {
    std::ofstream out(probe, std::ios::binary);
    if (!out) stop(kExitUnwritable, "output directory " + dir + " is not writable");
  }
  fs::remove(probe, ec);
}

void prepare_parent(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) prepare_dir(parent.string());
}

std::string manifest_text(const std::string& command, const json& flags,
                          const json& seed) {
  json m = {{"tool", "calseg"},
            {"version", calseg_version()},
            {"libraries",
             {{"calseg", calseg_version()},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) +
                                    "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                    "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"cli11", CLI11_VERSION}}},
            {"command", command},
            {"flags", flags},
            {"seed", seed}};
  return m.dump(2) + "\n";
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) stop(kExitInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Subcommands. Each takes its complete flag set as JSON so a manifest can
// replay it.

int run_metrics(const json& f) {
  calseg_tensor* raw_probs = nullptr;
  check(calseg_tensor_read(f.at("pred").get<std::string>().c_str(), &raw_probs));
  TensorPtr probs(raw_probs);
  calseg_mask* raw_labels = nullptr;
  check(calseg_mask_read(f.at("labels").get<std::string>().c_str(), &raw_labels));
  MaskPtr labels(raw_labels);

  const json& out = f.at("out");
  const json& bins_csv = f.at("bins_csv");
  if (out.is_string()) prepare_dir(out.get<std::string>());
  if (bins_csv.is_string()) prepare_parent(bins_csv.get<std::string>());

  calseg_metric_options opts;
  opts.bins = f.at("bins").get<int>();
  opts.fp_weight = f.at("fp_weight").get<double>();
  opts.threshold = f.at("threshold").get<double>();
  char* raw_json = nullptr;
  char* raw_csv = nullptr;
  check(calseg_metrics(probs.get(), labels.get(), &opts, &raw_json, &raw_csv));
  StringPtr report(raw_json);
  StringPtr csv(raw_csv);

  if (bins_csv.is_string()) write_atomic(bins_csv.get<std::string>(), csv.get());
  if (out.is_string()) {
    const fs::path dir = out.get<std::string>();
    write_atomic((dir / "report.json").string(), report.get());
    write_atomic((dir / "bins.csv").string(), csv.get());
    write_atomic((dir / "manifest.json").string(),
                 manifest_text("metrics", f, nullptr));
  }
  std::fputs(report.get(), stdout);
  return kExitOk;
}

int run_sdf(const json& f) {
  calseg_mask* raw = nullptr;
  check(calseg_mask_read(f.at("mask").get<std::string>().c_str(), &raw));
  MaskPtr mask(raw);
  const std::string out = f.at("out").get<std::string>();
  prepare_parent(out);
  calseg_tensor* raw_sdf = nullptr;
  check(calseg_sdf(mask.get(), f.at("normalize").get<std::string>().c_str(),
                   &raw_sdf));
  TensorPtr sdf(raw_sdf);
  check(calseg_tensor_write(sdf.get(), out.c_str()), true);
  write_atomic(out + ".manifest.json", manifest_text("sdf", f, nullptr));
  return kExitOk;
}

int run_morph(const json& f) {
  calseg_mask* raw = nullptr;
  check(calseg_mask_read(f.at("mask").get<std::string>().c_str(), &raw));
  MaskPtr mask(raw);
  const std::string out = f.at("out").get<std::string>();
  calseg_mask* raw_out = nullptr;
  check(calseg_morph(mask.get(), f.at("op").get<std::string>().c_str(),
                     f.at("se_size").get<int>(), f.at("num_classes").get<int>(),
                     &raw_out));
  MaskPtr morphed(raw_out);
  prepare_parent(out);
  check(calseg_mask_write(morphed.get(), out.c_str()), true);
  write_atomic(out + ".manifest.json", manifest_text("morph", f, nullptr));
  return kExitOk;
}

// Experiment flags: "out" plus the library options.
int run_experiment(const std::string& command, const json& f) {
  json options = f;
  const std::string out = options.at("out").get<std::string>();
  options.erase("out");
  char* raw_resolved = nullptr;
  check(calseg_resolve_options(command.c_str(), options.dump().c_str(),
                               &raw_resolved));
  StringPtr resolved_text(raw_resolved);
  json resolved = json::parse(resolved_text.get());
  prepare_dir(out);

  calseg_artifacts* raw = nullptr;
  check(calseg_run(command.c_str(), resolved.dump().c_str(), &raw));
  ArtifactsPtr artifacts(raw);
  const std::size_t n = calseg_artifacts_count(artifacts.get());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t length = 0;
    const char* content = calseg_artifacts_content(artifacts.get(), i, &length);
    write_atomic((fs::path(out) / calseg_artifacts_name(artifacts.get(), i)).string(),
                 std::string(content, length));
  }
  json flags = resolved;
  flags["out"] = out;
  write_atomic((fs::path(out) / "manifest.json").string(),
               manifest_text(command, flags, resolved.at("seed")));
  // The primary table goes to standard output as well.
  if (n > 0) {
    std::size_t length = 0;
    const char* content = calseg_artifacts_content(artifacts.get(), 0, &length);
    std::fwrite(content, 1, length, stdout);
  }
  return kExitOk;
}

int dispatch(const std::string& command, const json& flags) {
  if (command == "metrics") return run_metrics(flags);
  if (command == "sdf") return run_sdf(flags);
  if (command == "morph") return run_morph(flags);
  if (command == "train-demo" || command == "ablation" || command == "sweep" ||
      command == "theory") {
    return run_experiment(command, flags);
  }
  stop(kExitInput, "manifest names unknown command '" + command + "'");
}

int replay(const std::string& manifest_path, const std::string& out_override) {
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    stop(kExitInput, "manifest " + manifest_path + " is not valid JSON: " + e.what());
  }
  if (!m.is_object() || !m.contains("command") || !m.contains("flags")) {
    stop(kExitInput, "manifest " + manifest_path + " lacks command or flags");
  }
  if (m.value("version", "") != calseg_version()) {
    std::fprintf(stderr, "calseg: warning: manifest written by version %s\n",
                 m.value("version", "?").c_str());
  }
  json flags = m.at("flags");
  if (!out_override.empty()) flags["out"] = absolute(out_override);
  return dispatch(m.at("command").get<std::string>(), flags);
}

// ---------------------------------------------------------------------------
// Flag tables for the experiment subcommands.

enum class Kind { kInt, kReal, kText, kSwitch, kRealList, kTextList };

struct FlagSpec {
  const char* name;
  const char* key;
  Kind kind;
  const char* help;
};

const std::vector<FlagSpec> kTrainingFlags = {
    {"--seed", "seed", Kind::kInt, "base seed for data and training (default 0)"},
    {"--seeds", "seeds", Kind::kInt, "number of seeds per configuration (default 1)"},
    {"--images", "images", Kind::kInt, "synthetic images (default 200)"},
    {"--size", "size", Kind::kInt, "image side length (default 64)"},
    {"--shape", "shape", Kind::kText, "disk, ellipse or annulus (default disk)"},
    {"--noise", "noise", Kind::kReal, "gaussian noise sigma (default 0.5)"},
    {"--epochs", "epochs", Kind::kInt, "training epochs (default 200)"},
    {"--lr", "lr", Kind::kReal, "learning rate (default 1.0)"},
    {"--batch-size", "batch_size", Kind::kInt, "images per batch, 0 = all (default 0)"},
    {"--halve-midway", "halve_midway", Kind::kSwitch, "halve the learning rate after half the epochs"},
    {"--bins", "bins", Kind::kInt, "calibration bins (default 10)"},
    {"--fp-weight", "fp_weight", Kind::kReal, "pECE false-positive weight (default 2.0)"},
    {"--threshold", "threshold", Kind::kReal, "CECE inclusion threshold (default 1e-3)"},
    {"--alpha", "alpha", Kind::kReal, "local calibration weight (default 0.1)"},
    {"--lambda-sdf", "lambda_sdf", Kind::kReal, "distance penalty weight (default 0.1)"},
    {"--conf-norm", "conf_norm", Kind::kText, "l1 or l2 (default l1)"},
    {"--kernel", "kernel", Kind::kText, "mean or gaussian (default mean)"},
    {"--kernel-size", "kernel_size", Kind::kInt, "odd smoothing window (default 3)"},
    {"--sigma", "sigma", Kind::kReal, "gaussian kernel sigma (default 1.0)"},
    {"--normalize", "normalize", Kind::kText, "distance normalization: none or max_abs (default max_abs)"},
    {"--sdf-scale", "sdf_scale", Kind::kReal, "distance-to-probability slope (default 1.0)"},
    {"--sdf-clamp", "sdf_clamp", Kind::kReal, "distance clamp (default 3.0)"},
    {"--op", "op", Kind::kText, "morphological operation of the margin loss (default closing)"},
    {"--se-size", "se_size", Kind::kInt, "square structuring element size (default 3)"},
    {"--epsilon", "epsilon", Kind::kReal, "label smoothing epsilon (default 0.1)"},
    {"--gamma", "gamma", Kind::kReal, "focal gamma (default 3.0)"},
};

const std::vector<FlagSpec> kTheoryFlags = {
    {"--seed", "seed", Kind::kInt, "sampling seed (default 0)"},
    {"--lemma", "lemma", Kind::kText, "all, lipschitz, discrepancy or transfer (default all)"},
    {"--samples", "samples", Kind::kInt, "pairs for the Lipschitz check (default 100000)"},
    {"--scales", "scales", Kind::kRealList, "Lipschitz scales (default 0.5,1,2,4)"},
    {"--scale", "scale", Kind::kReal, "scale of the discrepancy and transfer checks (default 1)"},
    {"--deltas", "deltas", Kind::kRealList, "discrepancy deltas (default 0.1,0.5,1)"},
    {"--masks", "masks", Kind::kInt, "masks for the discrepancy check (default 50)"},
    {"--mask-size", "mask_size", Kind::kInt, "mask side length (default 32)"},
    {"--transfer-deltas", "transfer_deltas", Kind::kRealList, "transfer demo deltas (default 0,0.25,0.5,1)"},
    {"--transfer-masks", "transfer_masks", Kind::kInt, "masks for the transfer demo (default 20)"},
    {"--transfer-seeds", "transfer_seeds", Kind::kInt, "antithetic noise pairs per transfer mask (default 20)"},
    {"--bins", "bins", Kind::kInt, "calibration bins (default 10)"},
};

class FlagSet {
 public:
  void add(CLI::App* app, const FlagSpec& spec) {
    Entry& e = entries_[spec.key];
    e.spec = spec;
    if (spec.kind == Kind::kSwitch) {
      e.option = app->add_flag(spec.name, e.flag, spec.help);
    } else {
      e.option = app->add_option(spec.name, e.text, spec.help);
    }
  }

  // Only flags given on the command line; the library fills the rest.
  json given() const {
    json out = json::object();
    for (const auto& [key, e] : entries_) {
      if (e.option->count() == 0) continue;
      out[key] = convert(e);
    }
    return out;
  }

 private:
  struct Entry {
    FlagSpec spec{};
    CLI::Option* option = nullptr;
    std::string text;
    bool flag = false;
  };

  static double real(const std::string& name, const std::string& s) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE) {
      stop(kExitInput, name + ": '" + s + "' is not a number");
    }
    return v;
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) parts.push_back(item);
    return parts;
  }

  static json convert(const Entry& e) {
    const std::string name = e.spec.name;
    switch (e.spec.kind) {
      case Kind::kSwitch: return e.flag;
      case Kind::kText: return e.text;
      case Kind::kReal: return real(name, e.text);
      case Kind::kInt: {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(e.text.c_str(), &end, 10);
        if (e.text.empty() || e.text[0] == '-' || *end != '\0' || errno == ERANGE) {
          stop(kExitInput, name + ": '" + e.text + "' is not a nonnegative integer");
        }
        return static_cast<std::uint64_t>(v);
      }
      case Kind::kRealList: {
        json list = json::array();
        for (const std::string& part : split(e.text)) list.push_back(real(name, part));
        return list;
      }
      case Kind::kTextList: {
        json list = json::array();
        for (const std::string& part : split(e.text)) list.push_back(part);
        return list;
      }
    }
    return nullptr;
  }

  std::map<std::string, Entry> entries_;
};

int run_cli(int argc, char** argv) {
  CLI::App app{"Calibration-aware segmentation losses and metrics."};
  app.set_version_flag("--version", calseg_version());
  app.require_subcommand(1);

  calseg_metric_options metric_defaults;
  calseg_metric_options_init(&metric_defaults);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "evaluate a probability tensor against a label mask");
  std::string pred_path, labels_path, metrics_out, bins_csv_path;
  calseg_metric_options metric_opts = metric_defaults;
  metrics->add_option("pred", pred_path, "probability tensor (CALT)")->required();
  metrics->add_option("labels", labels_path, "label mask (PGM)")->required();
  metrics->add_option("--bins", metric_opts.bins, "calibration bins")->capture_default_str();
  metrics->add_option("--fp-weight", metric_opts.fp_weight, "pECE false-positive weight")->capture_default_str();
  metrics->add_option("--threshold", metric_opts.threshold, "CECE inclusion threshold")->capture_default_str();
  metrics->add_option("--out", metrics_out, "directory for report.json, bins.csv and manifest.json");
  metrics->add_option("--bins-csv", bins_csv_path, "also write the bin table here");

  // sdf
  auto* sdf = app.add_subcommand("sdf", "signed distance field of a mask");
  std::string sdf_mask, sdf_out, sdf_norm = "none";
  sdf->add_option("mask", sdf_mask, "mask (PGM); nonzero pixels are foreground")->required();
  sdf->add_option("--normalize", sdf_norm, "none or max_abs")->capture_default_str();
  sdf->add_option("--out", sdf_out, "output tensor (CALT)")->required();

  // morph
  auto* morph = app.add_subcommand("morph", "per-class morphology of a label mask");
  std::string morph_mask, morph_out, morph_op;
  int se_size = 3;
  int num_classes = 2;
  morph->add_option("mask", morph_mask, "label mask (PGM)")->required();
  morph->add_option("--op", morph_op, "identity, erosion, dilation, opening, closing, gradient, internal_boundary or external_boundary")->required();
  morph->add_option("--se-size", se_size, "square structuring element size")->capture_default_str();
  morph->add_option("--num-classes", num_classes, "number of classes")->capture_default_str();
  morph->add_option("--out", morph_out, "output mask (PGM)")->required();

  // experiments
  struct Experiment {
    CLI::App* app;
    FlagSet flags;
    std::string out;
  };
  std::map<std::string, Experiment> experiments;
  auto add_experiment = [&](const std::string& name, const std::string& help,
                            const std::vector<FlagSpec>& specs,
                            const std::vector<FlagSpec>& extra,
                            const std::vector<std::string>& skip) {
    Experiment& e = experiments[name];
    e.app = app.add_subcommand(name, help);
    for (const FlagSpec& s : specs) {
      if (std::find(skip.begin(), skip.end(), s.key) == skip.end()) {
        e.flags.add(e.app, s);
      }
    }
    for (const FlagSpec& s : extra) e.flags.add(e.app, s);
    e.app->add_option("--out", e.out, "output directory")->required();
  };
  add_experiment("train-demo", "train and compare losses on synthetic shapes",
                 kTrainingFlags,
                 {{"--losses", "losses", Kind::kTextList,
                   "comma list of ce, sdc, margin[:op], ls, fl (default ce,sdc)"}},
                 {});
  add_experiment("ablation", "margin loss under every morphological operation",
                 kTrainingFlags, {}, {"op"});
  add_experiment("sweep", "SDC over a grid of distance weights", kTrainingFlags,
                 {{"--lambda", "lambdas", Kind::kRealList,
                   "comma list of weights (default 0,0.1,0.5,1,1.5,3)"}},
                 {"lambda_sdf"});
  add_experiment("theory", "numerical checks of the sigmoid and distance bounds",
                 kTheoryFlags, {}, {});

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  std::string manifest_path, replay_out;
  replay_cmd->add_option("manifest", manifest_path, "manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "write outputs here instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  auto opt_path = [](const std::string& s) -> json {
    return s.empty() ? json(nullptr) : json(absolute(s));
  };

  if (metrics->parsed()) {
    return run_metrics({{"pred", absolute(pred_path)},
                        {"labels", absolute(labels_path)},
                        {"bins", metric_opts.bins},
                        {"fp_weight", metric_opts.fp_weight},
                        {"threshold", metric_opts.threshold},
                        {"out", opt_path(metrics_out)},
                        {"bins_csv", opt_path(bins_csv_path)}});
  }
  if (sdf->parsed()) {
    return run_sdf({{"mask", absolute(sdf_mask)},
                    {"normalize", sdf_norm},
                    {"out", absolute(sdf_out)}});
  }
  if (morph->parsed()) {
    return run_morph({{"mask", absolute(morph_mask)},
                      {"op", morph_op},
                      {"se_size", se_size},
                      {"num_classes", num_classes},
                      {"out", absolute(morph_out)}});
  }
  if (replay_cmd->parsed()) return replay(manifest_path, replay_out);
  for (auto& [name, e] : experiments) {
    if (!e.app->parsed()) continue;
    json flags = e.flags.given();
    flags["out"] = absolute(e.out);
    return run_experiment(name, flags);
  }
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Exit& e) {
    std::fprintf(stderr, "calseg: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "calseg: %s\n", e.what());
    return kExitFailure;
  }
}
