#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pmix/grid.hpp"
#include "pmix/solver.hpp"

namespace pmix {

enum class Task { Solve, Extremal, Verify, Sweep };

std::string task_name(Task t);

struct SourceSpec {
    enum class Kind { Constant, RadialPower, Csv };
    Kind kind = Kind::Constant;
    double value = 1.0;                  // constant
    double c = 1.0;                      // radial power: c * dist(x, center)^gamma
    double gamma = 0.0;
    std::array<double, 2> center{0.0, 0.0};
    std::string path;                    // csv
};

struct SweepAxes {
    std::vector<double> delta;
    std::vector<double> p;
    std::vector<double> s;
    std::vector<int> nodes;
};

struct ExtremalParams {
    int sobolev_samples = 1000;
    double sobolev_slack = 0.99;
    int simplicity_starts = 8;
};

struct ExperimentConfig {
    int schema_version = 1;
    Task task = Task::Solve;
    DomainSpec grid;
    double p = 2.0;
    double s = 0.5;
    double alpha = 1.0;
    double beta = 1.0;
    double delta = 0.5;
    SourceSpec f;
    SolverConfig solver;
    SweepAxes sweep;
    ExtremalParams extremal;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    bool deterministic = false;
    int threads = 1;
};

// parses and validates; error messages carry the offending field path
ExperimentConfig parse_config(const std::string& json_text);
std::string emit_config(const ExperimentConfig& cfg);  // normalized document

GridFunction make_source(const SourceSpec& spec, const Grid& grid);

}  // namespace pmix
