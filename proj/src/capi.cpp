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

#include "calseg/calseg.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "calseg/distance_field.hpp"
#include "calseg/grid.hpp"
#include "calseg/harness.hpp"
#include "calseg/io.hpp"
#include "calseg/metrics.hpp"
#include "calseg/morphology.hpp"
#include "calseg/theory.hpp"
#include "json.hpp"

struct calseg_tensor {
  calseg::TensorFile file;
};

struct calseg_mask {
  calseg::PgmImage image;
};

struct calseg_artifacts {
  std::vector<std::pair<std::string, std::string>> entries;
};

namespace {

using nlohmann::json;

constexpr double kSimplexTolerance = 1e-4;

thread_local std::string g_last_error;

// Raised for failures that map to a specific status.
struct StatusError : std::runtime_error {
  StatusError(calseg_status s, const std::string& what)
      : std::runtime_error(what), status(s) {}
  calseg_status status;
};

calseg_status fail(calseg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
calseg_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CALSEG_OK;
  } catch (const StatusError& e) {
    return fail(e.status, e.what());
  } catch (const calseg::ShapeError& e) {
    return fail(CALSEG_ERR_SHAPE, e.what());
  } catch (const calseg::EmptySetError& e) {
    return fail(CALSEG_ERR_EMPTY, e.what());
  } catch (const calseg::FormatError& e) {
    return fail(CALSEG_ERR_FORMAT, e.what());
  } catch (const calseg::IoError& e) {
    return fail(CALSEG_ERR_IO, e.what());
  } catch (const calseg::DivergenceError& e) {
    return fail(CALSEG_ERR_DIVERGED, e.what());
  } catch (const calseg::DomainError& e) {
    return fail(CALSEG_ERR_ARGUMENT, e.what());
  } catch (const json::exception& e) {
    return fail(CALSEG_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CALSEG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CALSEG_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw StatusError(CALSEG_ERR_ARGUMENT, message);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

calseg::Grid<std::int32_t> label_grid(const calseg::PgmImage& img) {
  return calseg::Grid<std::int32_t>(
      img.height, img.width,
      std::vector<std::int32_t>(img.pixels.begin(), img.pixels.end()));
}

// ---------------------------------------------------------------------------
// Experiment options.

json common_defaults() {
  return {{"seed", 0},          {"seeds", 1},
          {"images", 200},      {"size", 64},
          {"shape", "disk"},    {"noise", 0.5},
          {"epochs", 200},      {"lr", 1.0},
          {"batch_size", 0},    {"halve_midway", false},
          {"bins", 10},         {"fp_weight", 2.0},
          {"threshold", 1e-3},  {"alpha", 0.1},
          {"lambda_sdf", 0.1},  {"conf_norm", "l1"},
          {"kernel", "mean"},   {"kernel_size", 3},
          {"sigma", 1.0},       {"normalize", "max_abs"},
          {"sdf_scale", 1.0},   {"sdf_clamp", 3.0},
          {"op", "closing"},    {"se_size", 3},
          {"epsilon", 0.1},     {"gamma", 3.0}};
}

json defaults_for(const std::string& command) {
  if (command == "train-demo") {
    json d = common_defaults();
    d["losses"] = {"ce", "sdc"};
    return d;
  }
  if (command == "ablation") return common_defaults();
  if (command == "sweep") {
    json d = common_defaults();
    d["lambdas"] = {0.0, 0.1, 0.5, 1.0, 1.5, 3.0};
    return d;
  }
  if (command == "theory") {
    return {{"seed", 0},
            {"lemma", "all"},
            {"samples", 100000},
            {"scales", {0.5, 1.0, 2.0, 4.0}},
            {"scale", 1.0},
            {"deltas", {0.1, 0.5, 1.0}},
            {"masks", 50},
            {"mask_size", 32},
            {"transfer_deltas", {0.0, 0.25, 0.5, 1.0}},
            {"transfer_masks", 20},
            {"transfer_seeds", 20},
            {"bins", 10}};
  }
  throw StatusError(CALSEG_ERR_ARGUMENT,
                    "unknown command '" + command +
                        "' (expected train-demo, ablation, sweep or theory)");
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // Integer options reject fractional values.
    if (a.is_number_integer()) {
      return b.is_number_integer() ||
             (b.is_number_float() && std::floor(b.get<double>()) == b.get<double>());
    }
    return true;
  }
  return a.type() == b.type();
}

json resolve(const std::string& command, const char* options_json) {
  json resolved = defaults_for(command);
  if (options_json == nullptr || *options_json == '\0') return resolved;
  const json given = json::parse(options_json);
  require(given.is_object(), "options must be a JSON object");
  for (const auto& [key, value] : given.items()) {
    require(resolved.contains(key),
            "unknown option '" + key + "' for " + command);
    require(same_kind(resolved[key], value),
            "option '" + key + "' has the wrong type");
    if (resolved[key].is_number_integer()) {
      require(value.get<double>() >= 0.0,
              "option '" + key + "' must be nonnegative");
      resolved[key] = value.get<std::uint64_t>();
    } else if (resolved[key].is_number_float()) {
      resolved[key] = value.get<double>();
    } else {
      resolved[key] = value;
    }
  }
  return resolved;
}

template <typename Enum, typename Parse>
Enum parse_tag(const json& o, const char* key, Parse parse) {
  const std::string tag = o.at(key).get<std::string>();
  const auto v = parse(tag);
  require(v.has_value(), std::string("unknown ") + key + " '" + tag + "'");
  return *v;
}

std::vector<double> number_list(const json& o, const char* key) {
  std::vector<double> out;
  for (const json& v : o.at(key)) {
    require(v.is_number(), std::string(key) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

calseg::LossSpec parse_loss(const std::string& tag,
                            const calseg::LossSpec& base) {
  calseg::LossSpec spec = base;
  std::string kind = tag;
  std::string op;
  if (const auto colon = tag.find(':'); colon != std::string::npos) {
    kind = tag.substr(0, colon);
    op = tag.substr(colon + 1);
  }
  const auto k = calseg::parse_loss_kind(kind);
  require(k.has_value(), "unknown loss '" + tag +
                             "' (expected ce, sdc, margin[:op], ls or fl)");
  spec.kind = *k;
  if (spec.kind == calseg::LossKind::kMargin && !op.empty()) {
    const auto m = calseg::parse_morph_op(op);
    require(m.has_value(), "unknown morphological operation '" + op +
                               "'; valid: " + calseg::morph_op_tags());
    spec.cfg.morph->op = *m;
  } else {
    require(op.empty(), "only margin takes an operation suffix: '" + tag + "'");
  }
  return spec;
}

calseg::ExperimentConfig experiment_config(const json& o) {
  calseg::ExperimentConfig cfg;
  cfg.spec.image_size = o.at("size").get<std::size_t>();
  cfg.spec.n_images = o.at("images").get<std::size_t>();
  cfg.spec.shape = parse_tag<calseg::ShapeFamily>(o, "shape",
                                                  calseg::parse_shape_family);
  cfg.spec.noise_sigma = o.at("noise").get<double>();
  cfg.spec.seed = o.at("seed").get<std::uint64_t>();
  cfg.spec.validate();

  cfg.seeds = o.at("seeds").get<std::size_t>();
  require(cfg.seeds >= 1, "seeds must be at least 1");

  calseg::TrainConfig& tc = cfg.train;
  tc.learning_rate = o.at("lr").get<double>();
  tc.epochs = o.at("epochs").get<std::size_t>();
  tc.batch_size = o.at("batch_size").get<std::size_t>();
  tc.halve_midway = o.at("halve_midway").get<bool>();
  tc.seed = cfg.spec.seed;

  calseg::SdcConfig& sc = tc.loss.cfg;
  sc.alpha = o.at("alpha").get<double>();
  sc.lambda_sdf = o.at("lambda_sdf").get<double>();
  sc.conf_norm =
      parse_tag<calseg::ConfNorm>(o, "conf_norm", calseg::parse_conf_norm);
  sc.sdf_scale = o.at("sdf_scale").get<double>();
  sc.sdf_clamp = o.at("sdf_clamp").get<double>();
  sc.sdf_normalization = parse_tag<calseg::Normalization>(
      o, "normalize", calseg::parse_normalization);
  const auto kernel =
      parse_tag<calseg::KernelKind>(o, "kernel", calseg::parse_kernel_kind);
  sc.kernel = calseg::make_kernel(kernel, o.at("kernel_size").get<std::size_t>(),
                                  o.at("sigma").get<double>());
  const auto op =
      parse_tag<calseg::MorphOp>(o, "op", calseg::parse_morph_op);
  sc.morph = calseg::MorphSpec{
      op, calseg::StructuringElement::square(o.at("se_size").get<std::size_t>())};
  tc.loss.epsilon = o.at("epsilon").get<double>();
  tc.loss.gamma = o.at("gamma").get<double>();
  tc.validate();

  cfg.metrics.bins = o.at("bins").get<int>();
  cfg.metrics.fp_weight = o.at("fp_weight").get<double>();
  cfg.metrics.threshold = o.at("threshold").get<double>();
  require(cfg.metrics.bins >= 1, "bins must be at least 1");
  return cfg;
}

std::vector<calseg::BinaryMask> theory_masks(std::size_t count,
                                             std::size_t size,
                                             std::uint64_t seed) {
  calseg::SynthSpec spec;
  spec.image_size = size;
  spec.n_images = count;
  spec.shape = calseg::ShapeFamily::kEllipse;
  spec.noise_sigma = 0.0;
  spec.seed = seed;
  std::vector<calseg::BinaryMask> masks;
  for (const calseg::Sample& s : calseg::generate_dataset(spec)) {
    masks.emplace_back(size, size,
                       std::vector<std::uint8_t>(s.labels.begin(), s.labels.end()));
  }
  return masks;
}

void run_theory(const json& o, calseg_artifacts& out) {
  const std::string lemma = o.at("lemma").get<std::string>();
  require(lemma == "all" || lemma == "lipschitz" || lemma == "discrepancy" ||
              lemma == "transfer",
          "unknown lemma '" + lemma +
              "' (expected all, lipschitz, discrepancy or transfer)");
  const std::uint64_t seed = o.at("seed").get<std::uint64_t>();
  const double scale = o.at("scale").get<double>();
  json reports = json::array();

  if (lemma == "all" || lemma == "lipschitz") {
    const std::size_t samples = o.at("samples").get<std::size_t>();
    for (double s : number_list(o, "scales")) {
      reports.push_back(json::parse(calseg::bound_report_json(
          calseg::check_lipschitz(s, samples, seed))));
    }
  }
  if (lemma == "all" || lemma == "discrepancy") {
    const auto masks = theory_masks(o.at("masks").get<std::size_t>(),
                                    o.at("mask_size").get<std::size_t>(), seed);
    for (double delta : number_list(o, "deltas")) {
      // Worst case over the masks; samples counts every pixel checked.
      calseg::BoundReport worst;
      std::size_t samples = 0;
      for (std::size_t k = 0; k < masks.size(); ++k) {
        const calseg::RealGrid ref =
            calseg::sdf_from_mask(masks[k], calseg::Normalization::kNone);
        calseg::BoundReport r =
            calseg::check_sdf_discrepancy(ref, delta, scale, seed + k);
        samples += r.samples;
        if (k == 0 || r.max_violation > worst.max_violation) worst = r;
      }
      worst.samples = samples;
      worst.seed = seed;
      reports.push_back(json::parse(calseg::bound_report_json(worst)));
    }
  }
  json doc = {{"reports", reports}};
  if (lemma == "all" || lemma == "transfer") {
    const auto masks = theory_masks(o.at("transfer_masks").get<std::size_t>(),
                                    o.at("mask_size").get<std::size_t>(), seed);
    const calseg::TransferTable table = calseg::calibration_transfer_demo(
        masks, number_list(o, "transfer_deltas"), scale, o.at("bins").get<int>(),
        seed, o.at("transfer_seeds").get<std::size_t>());
    doc["transfer_monotone"] = table.monotone;
    out.entries.emplace_back("transfer.csv", calseg::transfer_to_csv(table));
  }
  out.entries.emplace(out.entries.begin(), "theory.json", doc.dump(2) + "\n");
}

void run_command(const std::string& command, const json& o,
                 calseg_artifacts& out) {
  if (command == "theory") {
    run_theory(o, out);
    return;
  }
  const calseg::ExperimentConfig cfg = experiment_config(o);
  if (command == "train-demo") {
    std::vector<calseg::LossSpec> losses;
    for (const json& tag : o.at("losses")) {
      require(tag.is_string(), "losses must hold strings");
      losses.push_back(parse_loss(tag.get<std::string>(), cfg.train.loss));
    }
    require(losses.size() >= 2, "train-demo needs at least 2 losses");
    const calseg::ComparisonTable t = calseg::compare_losses(cfg, losses);
    out.entries.emplace_back("summary.csv", calseg::summary_to_csv(t));
    out.entries.emplace_back("runs.csv", calseg::comparison_to_csv(t));
    out.entries.emplace_back("trace.csv", calseg::traces_to_csv(t));
  } else if (command == "ablation") {
    const calseg::ComparisonTable t = calseg::morph_ablation(cfg);
    out.entries.emplace_back("ablation.csv", calseg::summary_to_csv(t));
    out.entries.emplace_back("runs.csv", calseg::comparison_to_csv(t));
  } else if (command == "sweep") {
    const auto rows = calseg::lambda_sweep(cfg, number_list(o, "lambdas"));
    out.entries.emplace_back("sweep.csv", calseg::sweep_to_csv(rows));
  }
}

}  // namespace

extern "C" {

const char* calseg_version(void) { return CALSEG_VERSION_STRING; }

const char* calseg_status_string(calseg_status status) {
  switch (status) {
    case CALSEG_OK: return "ok";
    case CALSEG_ERR_ARGUMENT: return "invalid argument";
    case CALSEG_ERR_SHAPE: return "shape mismatch";
    case CALSEG_ERR_FORMAT: return "malformed file";
    case CALSEG_ERR_NOT_SIMPLEX: return "probabilities do not sum to 1";
    case CALSEG_ERR_EMPTY: return "empty mask";
    case CALSEG_ERR_IO: return "i/o failure";
    case CALSEG_ERR_DIVERGED: return "training diverged";
    case CALSEG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* calseg_last_error(void) { return g_last_error.c_str(); }

void calseg_string_free(char* s) { std::free(s); }

calseg_status calseg_tensor_create(size_t ndim, const uint32_t* dims,
                                   const double* values, calseg_tensor** out) {
  if (out == nullptr || (ndim > 0 && dims == nullptr)) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto t = std::make_unique<calseg_tensor>();
    t->file.dims.assign(dims, dims + ndim);
    const std::size_t n = t->file.element_count();
    require(values != nullptr || n == 0, "null values");
    t->file.values.assign(values, values + n);
    *out = t.release();
  });
}

calseg_status calseg_tensor_read(const char* path, calseg_tensor** out) {
  if (path == nullptr || out == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto t = std::make_unique<calseg_tensor>();
    t->file = calseg::read_tensor(path);
    *out = t.release();
  });
}

calseg_status calseg_tensor_write(const calseg_tensor* tensor,
                                  const char* path) {
  if (tensor == nullptr || path == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] { calseg::write_tensor(path, tensor->file); });
}

size_t calseg_tensor_ndim(const calseg_tensor* tensor) {
  return tensor ? tensor->file.dims.size() : 0;
}

uint32_t calseg_tensor_dim(const calseg_tensor* tensor, size_t i) {
  return tensor && i < tensor->file.dims.size() ? tensor->file.dims[i] : 0;
}

size_t calseg_tensor_size(const calseg_tensor* tensor) {
  return tensor ? tensor->file.values.size() : 0;
}

const double* calseg_tensor_data(const calseg_tensor* tensor) {
  return tensor ? tensor->file.values.data() : nullptr;
}

void calseg_tensor_free(calseg_tensor* tensor) { delete tensor; }

calseg_status calseg_mask_create(size_t height, size_t width,
                                 const uint8_t* pixels, calseg_mask** out) {
  if (out == nullptr || (height * width > 0 && pixels == nullptr)) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto m = std::make_unique<calseg_mask>();
    m->image.height = height;
    m->image.width = width;
    m->image.pixels.assign(pixels, pixels + height * width);
    std::uint8_t top = 1;
    for (std::uint8_t v : m->image.pixels) top = std::max(top, v);
    m->image.maxval = top;
    *out = m.release();
  });
}

calseg_status calseg_mask_read(const char* path, calseg_mask** out) {
  if (path == nullptr || out == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto m = std::make_unique<calseg_mask>();
    m->image = calseg::read_pgm(path);
    *out = m.release();
  });
}

calseg_status calseg_mask_write(const calseg_mask* mask, const char* path) {
  if (mask == nullptr || path == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] { calseg::write_pgm(path, mask->image); });
}

size_t calseg_mask_height(const calseg_mask* mask) {
  return mask ? mask->image.height : 0;
}

size_t calseg_mask_width(const calseg_mask* mask) {
  return mask ? mask->image.width : 0;
}

const uint8_t* calseg_mask_pixels(const calseg_mask* mask) {
  return mask ? mask->image.pixels.data() : nullptr;
}

void calseg_mask_free(calseg_mask* mask) { delete mask; }

void calseg_metric_options_init(calseg_metric_options* options) {
  if (options == nullptr) return;
  options->bins = 10;
  options->fp_weight = 2.0;
  options->threshold = 1e-3;
}

calseg_status calseg_metrics(const calseg_tensor* probs,
                             const calseg_mask* labels,
                             const calseg_metric_options* options,
                             char** report_json, char** bins_csv) {
  if (probs == nullptr || labels == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    calseg_metric_options opts;
    calseg_metric_options_init(&opts);
    if (options != nullptr) opts = *options;
    require(opts.bins >= 1, "bins must be at least 1");
    require(opts.fp_weight >= 0.0, "fp-weight must be nonnegative");
    require(opts.threshold >= 0.0 && opts.threshold < 1.0,
            "threshold must lie in [0, 1)");

    const auto& dims = probs->file.dims;
    if (!(dims.size() == 3 || (dims.size() == 4 && dims[0] == 1))) {
      throw calseg::ShapeError(
          "probability tensor must have dims (C, H, W) or (1, C, H, W)");
    }
    const std::size_t off = dims.size() - 3;
    const calseg::Shape4 shape{1, dims[off], dims[off + 1], dims[off + 2]};
    const calseg::PgmImage& img = labels->image;
    if (shape.height != img.height || shape.width != img.width) {
      throw calseg::ShapeError("prediction is " + std::to_string(shape.height) +
                               "x" + std::to_string(shape.width) +
                               " but labels are " + std::to_string(img.height) +
                               "x" + std::to_string(img.width));
    }
    if (shape.classes < 2) {
      throw calseg::ShapeError("prediction needs at least 2 classes");
    }
    for (std::uint8_t v : img.pixels) {
      if (v >= shape.classes) {
        throw calseg::ShapeError("label " + std::to_string(v) +
                                 " is not below the class count " +
                                 std::to_string(shape.classes));
      }
    }
    calseg::Tensor4 values(shape, probs->file.values);
    try {
      calseg::check_simplex(values, kSimplexTolerance);
    } catch (const calseg::DomainError& e) {
      throw StatusError(CALSEG_ERR_NOT_SIMPLEX, e.what());
    }
    const calseg::ProbabilityField p(std::move(values));
    const calseg::LabelField y(label_grid(img),
                               static_cast<int>(shape.classes));
    const calseg::MetricReport report = calseg::evaluate(
        p, y, calseg::MetricConfig{opts.bins, opts.fp_weight, opts.threshold});
    std::string json_text = calseg::report_to_json(report);
    std::string csv_text = calseg::bins_to_csv(report);
    char* j = report_json ? copy_string(json_text) : nullptr;
    char* c = nullptr;
    try {
      c = bins_csv ? copy_string(csv_text) : nullptr;
    } catch (...) {
      std::free(j);
      throw;
    }
    if (report_json) *report_json = j;
    if (bins_csv) *bins_csv = c;
  });
}

calseg_status calseg_sdf(const calseg_mask* mask, const char* normalization,
                         calseg_tensor** out) {
  if (mask == nullptr || out == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const std::string tag = normalization ? normalization : "none";
    const auto norm = calseg::parse_normalization(tag);
    require(norm.has_value(), "unknown normalization '" + tag +
                                  "' (expected none or max_abs)");
    const calseg::PgmImage& img = mask->image;
    std::vector<std::uint8_t> bits(img.pixels.size());
    bool any = false;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      bits[i] = img.pixels[i] != 0 ? 1 : 0;
      any = any || bits[i];
    }
    if (!any) throw calseg::EmptySetError("mask has no foreground pixels");
    const calseg::RealGrid s = calseg::sdf_from_mask(
        calseg::BinaryMask(img.height, img.width, std::move(bits)), *norm);
    auto t = std::make_unique<calseg_tensor>();
    t->file.dims = {1, static_cast<std::uint32_t>(img.height),
                    static_cast<std::uint32_t>(img.width)};
    t->file.values = s.values();
    *out = t.release();
  });
}

calseg_status calseg_morph(const calseg_mask* mask, const char* op,
                           int se_size, int num_classes, calseg_mask** out) {
  if (mask == nullptr || op == nullptr || out == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto parsed = calseg::parse_morph_op(op);
    require(parsed.has_value(), std::string("unknown morphological operation '") +
                                    op + "'; valid: " + calseg::morph_op_tags());
    require(se_size >= 1 && se_size % 2 == 1,
            "structuring element size must be odd and positive");
    require(num_classes >= 2, "num-classes must be at least 2");
    const calseg::PgmImage& img = mask->image;
    for (std::uint8_t v : img.pixels) {
      if (v >= num_classes) {
        throw calseg::ShapeError("label " + std::to_string(v) +
                                 " is not below num-classes " +
                                 std::to_string(num_classes));
      }
    }
    const calseg::LabelField y(label_grid(img), num_classes);
    const calseg::LabelField morphed = calseg::morph_labels(
        y, *parsed,
        calseg::StructuringElement::square(static_cast<std::size_t>(se_size)));
    auto m = std::make_unique<calseg_mask>();
    m->image.height = img.height;
    m->image.width = img.width;
    m->image.maxval = img.maxval;
    m->image.pixels.assign(morphed.data().begin(), morphed.data().end());
    *out = m.release();
  });
}

calseg_status calseg_resolve_options(const char* command,
                                     const char* options_json,
                                     char** resolved_json) {
  if (command == nullptr || resolved_json == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const json o = resolve(command, options_json);
    if (std::string(command) != "theory") experiment_config(o);
    *resolved_json = copy_string(o.dump(2));
  });
}

calseg_status calseg_run(const char* command, const char* options_json,
                         calseg_artifacts** out) {
  if (command == nullptr || out == nullptr) {
    return fail(CALSEG_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const json o = resolve(command, options_json);
    auto a = std::make_unique<calseg_artifacts>();
    run_command(command, o, *a);
    *out = a.release();
  });
}

size_t calseg_artifacts_count(const calseg_artifacts* artifacts) {
  return artifacts ? artifacts->entries.size() : 0;
}

const char* calseg_artifacts_name(const calseg_artifacts* artifacts,
                                  size_t i) {
  if (artifacts == nullptr || i >= artifacts->entries.size()) return nullptr;
  return artifacts->entries[i].first.c_str();
}

const char* calseg_artifacts_content(const calseg_artifacts* artifacts,
                                     size_t i, size_t* length) {
  if (artifacts == nullptr || i >= artifacts->entries.size()) return nullptr;
  if (length != nullptr) *length = artifacts->entries[i].second.size();
  return artifacts->entries[i].second.c_str();
}

void calseg_artifacts_free(calseg_artifacts* artifacts) { delete artifacts; }

}  // extern "C"
