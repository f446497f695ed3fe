#include "acg/io.hpp"

#include <cstdio>
#include <fstream>

#include "acg/errors.hpp"

namespace acg {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot open for writing: " + path);
  }
  out << content;
  if (!out) {
    throw ConfigError("write failed: " + path);
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows) {
  if (header.size() != static_cast<std::size_t>(rows.cols())) {
    throw InvalidInputError("header does not match column count");
  }
  std::string body;
  body.reserve(static_cast<std::size_t>(rows.size()) * 12 + header.size() * 8);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) body += ',';
    body += header[j];
  }
  body += '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j > 0) body += ',';
      body += format_double(rows(i, j));
    }
    body += '\n';
  }
  write_text_file(path, body);
}

void write_sample_store_csv(const std::string& path,
                            const SampleStore& store) {
  write_csv(path, store.param_names, store.draws);
}

void write_grid_csv(const std::string& path, const Vector& values,
                    Eigen::Index n1, Eigen::Index n2) {
  if (values.size() != n1 * n2) {
    throw InvalidInputError("grid size does not match value count");
  }
  std::string body;
  body.reserve(static_cast<std::size_t>(values.size()) * 12);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      if (j > 0) body += ',';
      body += format_double(values[i * n2 + j]);
    }
    body += '\n';
  }
  write_text_file(path, body);
}

void write_long_csv(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& columns) {
  if (header.size() != columns.size() || columns.empty()) {
    throw InvalidInputError("header does not match column count");
  }
  const std::size_t n = columns.front().size();
  for (const auto& col : columns) {
    if (col.size() != n) {
      throw InvalidInputError("columns have unequal lengths");
    }
  }
  std::string body;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) body += ',';
    body += header[j];
  }
  body += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j > 0) body += ',';
      body += columns[j][i];
    }
    body += '\n';
  }
  write_text_file(path, body);
}

}  // namespace acg
