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

#include "calseg/io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace calseg {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'C', 'A', 'L', 'T'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i]))
         << (8 * i);
  }
  return v;
}

// Rounded to six significant digits so the dump matches format_number.
json num(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

json opt_num(const std::optional<double>& v) {
  return v ? num(*v) : json(nullptr);
}

json bins_json(const CalibrationBins& bins) {
  json rows = json::array();
  for (const BinRow& r : bins.rows) {
    rows.push_back({{"bin_lo", num(r.lo)},
                    {"bin_hi", num(r.hi)},
                    {"count", r.count},
                    {"mean_conf", num(r.mean_conf)},
                    {"mean_acc", num(r.mean_acc)},
                    {"fp_count", r.fp_count},
                    {"fp_conf", num(r.fp_conf)}});
  }
  return rows;
}

class PgmReader {
 public:
  explicit PgmReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t next_int() {
    skip_space_and_comments();
    std::size_t v = 0;
    bool any = false;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > (1u << 24)) throw FormatError("PGM header value too large");
      ++pos_;
      any = true;
    }
    if (!any) throw FormatError("malformed PGM header");
    return v;
  }
  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

std::size_t TensorFile::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

std::string encode_tensor(const TensorFile& tensor) {
  if (tensor.dims.size() > 255) throw FormatError("too many dimensions");
  if (tensor.values.size() != tensor.element_count()) {
    throw ShapeError("tensor payload does not match its dimensions");
  }
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) put_u32(out, d);
  out.reserve(out.size() + 4 * tensor.values.size());
  for (double v : tensor.values) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
  return out;
}

TensorFile decode_tensor(std::string_view bytes) {
  if (bytes.size() < 6 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw FormatError("not a CALT tensor file");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) {
    throw FormatError("unsupported CALT version " +
                      std::to_string(static_cast<unsigned char>(bytes[4])));
  }
  const std::size_t ndim = static_cast<unsigned char>(bytes[5]);
  if (bytes.size() < 6 + 4 * ndim) throw FormatError("truncated CALT header");
  TensorFile t;
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    t.dims.push_back(get_u32(bytes, 6 + 4 * i));
    count *= t.dims.back();
  }
  const std::size_t start = 6 + 4 * ndim;
  if (bytes.size() != start + 4 * count) {
    throw FormatError("CALT payload holds " + std::to_string(bytes.size() - start) +
                      " bytes, expected " + std::to_string(4 * count));
  }
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = get_u32(bytes, start + 4 * i);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    t.values[i] = f;
  }
  return t;
}

TensorFile read_tensor(const std::string& path) {
  return decode_tensor(read_file(path));
}

void write_tensor(const std::string& path, const TensorFile& tensor) {
  write_file_atomic(path, encode_tensor(tensor));
}

std::string encode_pgm(const PgmImage& image) {
  if (image.pixels.size() != image.height * image.width) {
    throw ShapeError("PGM pixel count does not match its extents");
  }
  std::string out = "P5\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n" +
                    std::to_string(image.maxval) + "\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()),
             image.pixels.size());
  return out;
}

PgmImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM (P5) file");
  }
  PgmReader reader(bytes);
  PgmImage img;
  img.width = reader.next_int();
  img.height = reader.next_int();
  const std::size_t maxval = reader.next_int();
  if (maxval == 0 || maxval > 255) {
    throw FormatError("only 8-bit PGM files are supported");
  }
  img.maxval = static_cast<int>(maxval);
  if (reader.pos() >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[reader.pos()]))) {
    throw FormatError("malformed PGM header");
  }
  reader.advance();
  const std::size_t n = img.width * img.height;
  if (bytes.size() - reader.pos() != n) {
    throw FormatError("PGM payload holds " +
                      std::to_string(bytes.size() - reader.pos()) +
                      " bytes, expected " + std::to_string(n));
  }
  const auto* data =
      reinterpret_cast<const std::uint8_t*>(bytes.data() + reader.pos());
  img.pixels.assign(data, data + n);
  return img;
}

PgmImage read_pgm(const std::string& path) { return decode_pgm(read_file(path)); }

void write_pgm(const std::string& path, const PgmImage& image) {
  write_file_atomic(path, encode_pgm(image));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp + " to " + path);
  }
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string report_to_json(const MetricReport& report) {
  json config = {{"bins", report.config.bins},
                 {"fp_weight", num(report.config.fp_weight)},
                 {"threshold", num(report.config.threshold)},
                 {"num_classes", report.num_classes}};
  json per_class = json::array();
  json bins = json::array();
  for (const ClassMetrics& cm : report.per_class) {
    per_class.push_back({{"class", cm.cls},
                         {"dsc", num(cm.dsc)},
                         {"hd95", opt_num(cm.hd95)},
                         {"hd95_undefined", cm.hd95_undefined},
                         {"pece", num(cm.pece)}});
    bins.push_back({{"class", cm.cls}, {"rows", bins_json(cm.bins)}});
  }
  json mean = {{"dsc", num(report.mean_dsc)},
               {"hd95", opt_num(report.mean_hd95)},
               {"ece", opt_num(report.ece)},
               {"cece", num(report.cece)},
               {"pece", num(report.pece)}};
  json out = {{"config", config},
              {"per_class", per_class},
              {"mean", mean},
              {"bins", bins}};
  return out.dump(2) + "\n";
}

std::string bins_to_csv(const MetricReport& report) {
  std::string out = "class,bin_lo,bin_hi,count,mean_conf,mean_acc,fp_count,fp_conf\n";
  for (const ClassMetrics& cm : report.per_class) {
    for (const BinRow& r : cm.bins.rows) {
      out += std::to_string(cm.cls) + "," + format_number(r.lo) + "," +
             format_number(r.hi) + "," + std::to_string(r.count) + "," +
             format_number(r.mean_conf) + "," + format_number(r.mean_acc) +
             "," + std::to_string(r.fp_count) + "," + format_number(r.fp_conf) +
             "\n";
    }
  }
  return out;
}

std::string comparison_to_csv(const ComparisonTable& table) {
  std::string out = "loss,seed,dsc,hd95,ece,cece,pece,final_loss\n";
  for (const RunRow& r : table.runs) {
    out += r.loss + "," + std::to_string(r.seed_index) + "," +
           format_number(r.dsc) + "," + format_number(r.hd95) + "," +
           format_number(r.ece) + "," + format_number(r.cece) + "," +
           format_number(r.pece) + "," + format_number(r.final_loss) + "\n";
  }
  return out;
}

std::string summary_to_csv(const ComparisonTable& table) {
  std::string out = "loss,dsc,hd95,ece,cece,pece,friedman_rank,place\n";
  for (const SummaryRow& r : table.summary) {
    out += r.loss + "," + format_number(r.dsc) + "," + format_number(r.hd95) +
           "," + format_number(r.ece) + "," + format_number(r.cece) + "," +
           format_number(r.pece) + "," + format_number(r.friedman_rank) + "," +
           std::to_string(r.place) + "\n";
  }
  return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "lambda_sdf,dsc,hd95,ece,cece\n";
  for (const SweepRow& r : rows) {
    out += format_number(r.lambda_sdf) + "," + format_number(r.dsc) + "," +
           format_number(r.hd95) + "," + format_number(r.ece) + "," +
           format_number(r.cece) + "\n";
  }
  return out;
}

std::string traces_to_csv(const ComparisonTable& table) {
  std::string out = "loss,seed,epoch,value\n";
  for (const RunRow& r : table.runs) {
    for (std::size_t i = 0; i < r.loss_trace.size(); ++i) {
      out += r.loss + "," + std::to_string(r.seed_index) + "," +
             std::to_string(i + 1) + "," + format_number(r.loss_trace[i]) +
             "\n";
    }
  }
  return out;
}

std::string bound_report_json(const BoundReport& r) {
  json out = {{"check", r.name},
              {"samples", r.samples},
              {"max_violation", num(r.max_violation)},
              {"holds", r.max_violation <= 0.0},
              {"worst_lhs", num(r.worst_lhs)},
              {"worst_rhs", num(r.worst_rhs)},
              {"witness", {num(r.witness_a), num(r.witness_b)}},
              {"scale", num(r.scale)},
              {"delta", num(r.delta)},
              {"seed", r.seed}};
  return out.dump(2);
}

std::string transfer_to_csv(const TransferTable& table) {
  std::string out = "delta,median_ece,median_pece\n";
  for (const TransferRow& r : table.rows) {
    out += format_number(r.delta) + "," + format_number(r.median_ece) + "," +
           format_number(r.median_pece) + "\n";
  }
  return out;
}

}  // namespace calseg
