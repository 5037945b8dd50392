#pragma once

#include <string>
#include <vector>

#include "pmix/grid.hpp"

namespace pmix::io {

std::string format_double(double v);  // round-trip decimal form, stable across runs

std::string read_file(const std::string& path);
// temp file + rename so partial output never lands under the final name
void write_file_atomic(const std::string& path, const std::string& content);

std::string grid_function_csv(const GridFunction& u);
GridFunction grid_function_from_csv(const std::string& text, const Grid& grid);

std::string join_csv_row(const std::vector<std::string>& cells);

}  // namespace pmix::io
