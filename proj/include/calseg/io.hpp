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

// File formats and report serialization.
//
// Tensor file ("CALT"), little-endian throughout:
//   bytes 0-3   magic "CALT"
//   byte  4     version, must be 1
//   byte  5     ndim
//   then        ndim x uint32 dimensions
//   then        prod(dims) x float32 payload, row-major (b, c, h, w)
//
// Mask file: binary PGM (P5), 8-bit, one label value per pixel.

#ifndef CALSEG_IO_HPP_
#define CALSEG_IO_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "calseg/grid.hpp"
#include "calseg/harness.hpp"
#include "calseg/metrics.hpp"
#include "calseg/theory.hpp"

namespace calseg {

// Malformed or truncated file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The file system refused a read or write.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TensorFile {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;  // widened from float32

  std::size_t element_count() const;
};

std::string encode_tensor(const TensorFile& tensor);
TensorFile decode_tensor(std::string_view bytes);
TensorFile read_tensor(const std::string& path);
void write_tensor(const std::string& path, const TensorFile& tensor);

struct PgmImage {
  std::size_t height = 0;
  std::size_t width = 0;
  int maxval = 255;
  std::vector<std::uint8_t> pixels;
};

std::string encode_pgm(const PgmImage& image);
PgmImage decode_pgm(std::string_view bytes);
PgmImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const PgmImage& image);

std::string read_file(const std::string& path);
// Writes to a sibling temporary and renames it over `path`, so a failed
// write leaves no partial file behind.
void write_file_atomic(const std::string& path, std::string_view contents);

// "%.6g", with -0 printed as 0.
std::string format_number(double v);

// JSON with top-level keys config, per_class, mean, bins.
std::string report_to_json(const MetricReport& report);
// bin_lo,bin_hi,count,mean_conf,mean_acc,fp_count,fp_conf (plus class).
std::string bins_to_csv(const MetricReport& report);

std::string comparison_to_csv(const ComparisonTable& table);
std::string summary_to_csv(const ComparisonTable& table);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
// loss,seed,epoch,value for every run of the table.
std::string traces_to_csv(const ComparisonTable& table);
std::string bound_report_json(const BoundReport& report);
std::string transfer_to_csv(const TransferTable& table);

}  // namespace calseg

#endif  // CALSEG_IO_HPP_
