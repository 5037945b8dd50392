#include "pmix/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <filesystem>

namespace pmix::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string join_csv_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

std::string grid_function_csv(const GridFunction& u) {
    const Grid& g = *u.grid;
    std::string out = g.dim() == 2 ? "index,x,y,value\n" : "index,x,value\n";
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_double(g.coord(k, 0));
        if (g.dim() == 2) {
            out += ',';
            out += format_double(g.coord(k, 1));
        }
        out += ',';
        out += format_double(u.values[k]);
        out += '\n';
    }
    return out;
}

GridFunction grid_function_from_csv(const std::string& text, const Grid& grid) {
    GridFunction u = GridFunction::zeros(grid);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("grid function csv: empty document");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) throw std::runtime_error("grid function csv: malformed row: " + line);
        const std::size_t k = static_cast<std::size_t>(std::stoull(cells.front()));
        if (k >= grid.node_count()) throw std::runtime_error("grid function csv: node index out of range");
        u.values[k] = std::stod(cells.back());
    }
    u.validate();
    return u;
}

}  // namespace pmix::io
