#pragma once

#include <string>
#include <vector>

#include "acg/gibbs.hpp"

namespace acg {

// Shortest round-trippable decimal form ("%.17g"); CSV bodies built from it
// are byte-identical across runs with equal seeds.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

// Header row, then one data row per matrix row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows);

void write_sample_store_csv(const std::string& path, const SampleStore& store);

// Headerless n1-by-n2 grid of a row-major flattened field.
void write_grid_csv(const std::string& path, const Vector& values,
                    Eigen::Index n1, Eigen::Index n2);

// Tidy long-format series: header columns, then one row per entry built from
// equal-length columns.
void write_long_csv(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& columns);

}  // namespace acg
