#include "mcr2/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace mcr2::io {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

double parse_double(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + t + "' as a number");
  }
  return v;
}

Matrix read_rows(const std::filesystem::path& path, bool expect_header_prefix_f) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  const auto header = split(trim(line));
  if (expect_header_prefix_f) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) != "f" + std::to_string(c)) {
        throw IoError(path.string() + ": header must be f0,...,f{d-1}");
      }
    }
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(header.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, path, lineno));
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

void write_rows(std::ostream& out, MatrixCRef M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (c) out << ',';
      out << format_double(M(r, c));
    }
    out << '\n';
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_features(const std::filesystem::path& path, MatrixCRef Z) {
  auto out = open_out(path);
  for (Eigen::Index r = 0; r < Z.rows(); ++r) {
    if (r) out << ',';
    out << 'f' << r;
  }
  out << '\n';
  write_rows(out, Z.transpose());
}

Matrix read_features(const std::filesystem::path& path) {
  return read_rows(path, true).transpose();
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
  auto out = open_out(path);
  out << "label\n";
  for (int y : labels) out << y << '\n';
}

LabelVector read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "label") {
    throw IoError(path.string() + ": expected header 'label'");
  }
  LabelVector out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": '" + line + "' is not an integer label");
    }
    out.push_back(v);
  }
  return out;
}

void write_trace(const std::filesystem::path& path, const learn::OptTrace& trace) {
  auto out = open_out(path);
  out << "iter,R,Rc,DeltaR,grad_norm\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_double(r.rate_whole) << ',' << format_double(r.rate_segmented) << ','
        << format_double(r.reduction) << ',' << format_double(r.grad_norm) << '\n';
  }
}

void write_feature_map(const std::filesystem::path& dir, const learn::FeatureMapParams& params) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "widths.csv");
    out << "width\n";
    for (int w : params.layer_widths) out << w << '\n';
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto w = open_out(dir / ("layer" + std::to_string(l) + "_weights.csv"));
    for (Eigen::Index c = 0; c < params.weights[l].cols(); ++c) {
      if (c) w << ',';
      w << "f" << c;
    }
    w << '\n';
    write_rows(w, params.weights[l]);
    auto b = open_out(dir / ("layer" + std::to_string(l) + "_bias.csv"));
    b << "f0\n";
    write_rows(b, params.biases[l]);
  }
}

learn::FeatureMapParams read_feature_map(const std::filesystem::path& dir) {
  learn::FeatureMapParams p;
  {
    auto in = open_in(dir / "widths.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty()) p.layer_widths.push_back(std::stoi(line));
    }
  }
  for (std::size_t l = 0; l + 1 < p.layer_widths.size(); ++l) {
    p.weights.push_back(read_rows(dir / ("layer" + std::to_string(l) + "_weights.csv"), true));
    p.biases.push_back(read_rows(dir / ("layer" + std::to_string(l) + "_bias.csv"), true).col(0));
  }
  p.validate();
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace mcr2::io
