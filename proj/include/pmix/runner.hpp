#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmix/config.hpp"
#include "pmix/extremal.hpp"
#include "pmix/solver.hpp"
#include "pmix/verify.hpp"

namespace pmix {

struct RunRow {
    std::string run_id;
    double delta = 0.0, p = 0.0, s = 0.0, alpha = 0.0, beta = 0.0;
    int nodes = 0;
    double n_final = 0.0;
    long iterations = 0;
    double mixed_norm_p = 0.0, sup_norm = 0.0, residual = 0.0;
    double mu_formula = 0.0, mu_infimum = 0.0, min_margin = 0.0;
    bool checks_passed = false;
};

std::string summary_csv(const std::vector<RunRow>& rows);

struct VerifyRow {
    std::string name;
    std::string params;
    double metric = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

std::string verify_csv(const std::vector<VerifyRow>& rows);

struct RunArtifacts {
    RunRow row;
    SolveReport report;
    std::optional<ExtremalResult> extremal;
};

// one fully-configured run (solve, optionally with the extremal analysis),
// writing its artifact files under dir
RunArtifacts run_single(const ExperimentConfig& cfg, const std::string& dir, const std::string& run_id,
                        bool with_extremal);

std::vector<VerifyRow> run_verification(const ExperimentConfig& cfg, const std::string& dir);

// dispatch on cfg.task; returns the process exit code (0 = all green)
int run_experiment(const ExperimentConfig& cfg);

}  // namespace pmix
