#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "skewimpute/estimands.hpp"
#include "skewimpute/experiment.hpp"

namespace skewimpute {

struct EstimandSummary {
    std::string name;
    double truth = 0.0;
    double mean_estimate = 0.0;
    double sd_estimate = 0.0;  // over replications, 1/reps divisor
    double bias = 0.0;         // mean_estimate - truth
    double rmse = 0.0;         // sqrt(bias^2 + sd_estimate^2)
    double rel_bias = 0.0;     // percent of truth
    double rel_rmse = 0.0;     // percent of truth
};

struct CellResult {
    CellConfig config;
    int reps_used = 0;  // replications that produced estimates
    std::vector<EstimandSummary> estimands;
    long rejection_fallbacks = 0;
    long truncreg_refits = 0;
    long unreachable_tails = 0;
    long wild_imputations = 0;  // imputed values > 10x the observed maximum
    long method_failures = 0;
    long mask_resamples = 0;
};

// Replication r of a cell draws everything from a stream keyed by
// (seed, design, nu, rho2, pattern, r) — deliberately NOT by method, so
// every method variant of a cell sees the same data, masks, and shared
// draws. Within a replication: fork(1) generates, fork(2) deletes, fork(3)
// feeds multiply_impute. Method none skips deletion and analyzes the
// complete data (the sweep's zero-bias control).
CellResult run_cell(const CellConfig& config, std::uint64_t seed);

struct SweepOptions {
    Design design = Design::bivariate;
    std::vector<double> nus{1, 2, 4, 8};
    std::vector<double> rho2s{0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<Pattern> patterns{Pattern::mcar, Pattern::tail, Pattern::peak};
    std::vector<Method> methods = sweep_methods();
    bool oracle = true;  // add method-none control cells per (nu, rho2)
    int n = 100;
    int replications = 100;
    int m = 5;
    std::uint64_t seed = 2025;
    int workers = 1;
};

// Full factorial over the options. Results are in canonical cell order and
// bit-identical for a fixed seed regardless of worker count: streams are
// derived from cell identity, never from scheduling.
std::vector<CellResult> run_experiment(const SweepOptions& options);

// Invariant sweep-level checks: the rmse identity on every estimand, and the
// zero-bias control alarm on the exactly-unbiased estimands (x_mean, slopes,
// intercept) of method-none cells. Returns human-readable violations; empty
// means clean.
std::vector<std::string> validate_results(const std::vector<CellResult>& results);

enum class Grouping { method, nu, rho2, pattern };

Grouping grouping_from_name(const std::string& s);

struct SummaryRow {
    Method method = Method::linear;
    std::string key;  // factor level, empty for method-only grouping
    int cells = 0;
    std::vector<double> rel_bias;  // per estimand, percent
    std::vector<double> rel_rmse;
};

struct SummaryTable {
    Design design = Design::bivariate;
    Grouping grouping = Grouping::method;
    std::vector<std::string> estimands;
    std::vector<SummaryRow> rows;
};

// Average rel_bias / rel_rmse over the cells sharing (method [, factor
// level]). Throws InvalidInput on empty results.
SummaryTable summarize(const std::vector<CellResult>& results, Grouping grouping);

std::string format_summary(const SummaryTable& table);

// Serialization. cells.csv has one row per (cell, estimand) with the cell's
// counters repeated; 17 significant digits, so a read round-trips exactly.
std::string cells_to_csv(const std::vector<CellResult>& results);
std::vector<CellResult> cells_from_csv_text(const std::string& text);
std::vector<CellResult> read_cells_csv(const std::string& path);

struct RunManifest {
    std::uint64_t seed = 0;
    SweepOptions options;
    int cell_count = 0;
    std::map<std::string, long> counters;
};

// Writes cells.csv, the four summary CSVs, and manifest.txt under dir.
void emit_tables(const std::vector<CellResult>& results, const std::string& dir,
                 const RunManifest& manifest);

}  // namespace skewimpute
