#pragma once

// File formats shared by the command-line runners.
//
//   features: CSV, header f0,...,f{d-1}, one sample per row (transposed on
//             load into the d x m in-memory layout)
//   labels:   CSV, header `label`, one integer per row
//   traces:   CSV, header iter,R,Rc,DeltaR,grad_norm
//
// Floats are written with 17 significant digits so they round-trip exactly.

#include "mcr2/learn.hpp"
#include "mcr2/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace mcr2::io {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

std::string format_double(double v);

void write_features(const std::filesystem::path& path, MatrixCRef Z);
Matrix read_features(const std::filesystem::path& path);

void write_labels(const std::filesystem::path& path, const LabelVector& labels);
LabelVector read_labels(const std::filesystem::path& path);

void write_trace(const std::filesystem::path& path, const learn::OptTrace& trace);

// One CSV per layer: layer{l}_weights.csv (rows = outputs) and layer{l}_bias.csv,
// plus widths.csv listing the layer widths.
void write_feature_map(const std::filesystem::path& dir, const learn::FeatureMapParams& params);
learn::FeatureMapParams read_feature_map(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mcr2::io
