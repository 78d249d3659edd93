#include "skewimpute/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "skewimpute/errors.hpp"
#include "skewimpute/impute.hpp"

namespace skewimpute {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_level(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::uint64_t design_tag(Design d) { return static_cast<std::uint64_t>(d) + 1; }
std::uint64_t pattern_tag(Pattern p) { return static_cast<std::uint64_t>(p) + 1; }

// Stream for replication r of a cell: keyed by everything that identifies
// the data — and nothing that identifies the method.
RandomStream replication_stream(const CellConfig& config, std::uint64_t seed, int r) {
    return RandomStream(seed)
        .fork(design_tag(config.design))
        .fork(std::bit_cast<std::uint64_t>(config.nu))
        .fork(std::bit_cast<std::uint64_t>(config.rho2))
        .fork(pattern_tag(config.pattern))
        .fork(static_cast<std::uint64_t>(r));
}

int method_rank(Method m) { return static_cast<int>(m); }

bool config_less(const CellConfig& a, const CellConfig& b) {
    if (a.design != b.design) return a.design < b.design;
    if (method_rank(a.method) != method_rank(b.method))
        return method_rank(a.method) < method_rank(b.method);
    if (a.nu != b.nu) return a.nu < b.nu;
    if (a.rho2 != b.rho2) return a.rho2 < b.rho2;
    return pattern_tag(a.pattern) < pattern_tag(b.pattern);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw InvalidData("cells csv: malformed number '" + s + "'");
    return v;
}

long parse_long(const std::string& s) {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw InvalidData("cells csv: malformed count '" + s + "'");
    return v;
}

const char* kCellsHeader =
    "design,method,nu,rho2,pattern,n,replications,reps_used,estimand,truth,mean_estimate,"
    "sd_estimate,bias,rmse,rel_bias,rel_rmse,rejection_fallbacks,truncreg_refits,"
    "unreachable_tails,wild_imputations,method_failures,mask_resamples";

}  // namespace

CellResult run_cell(const CellConfig& config, std::uint64_t seed) {
    if (config.replications < 1) throw InvalidInput("run_cell: replications must be >= 1");
    CellResult result;
    result.config = config;

    const EstimateSet truth = true_values(config.design, config.nu, config.rho2);
    const int n_est = truth.count();

    ImputationSpec spec = config.spec;
    spec.method = config.method;

    std::vector<EstimateSet> per_rep;
    per_rep.reserve(static_cast<std::size_t>(config.replications));

    for (int r = 0; r < config.replications; ++r) {
        RandomStream rep = replication_stream(config, seed, r);
        RandomStream gen = rep.fork(1);
        const CompleteData data = (config.design == Design::bivariate)
                                      ? gen_bivariate(config.nu, config.rho2, config.n, gen)
                                      : gen_trivariate(config.nu, config.rho2, config.n, gen);

        if (config.method == Method::none) {
            per_rep.push_back(analyze(data.x, data.y, data.z, config.design));
            continue;
        }

        RandomStream del = rep.fork(2);
        const IncompleteDataset ds = apply_pattern(config.pattern, data, del,
                                                   &result.mask_resamples);

        double max_obs = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < ds.n(); ++i)
            if (ds.missing[i] == 0) max_obs = std::max(max_obs, ds.x[i]);

        RandomStream imp = rep.fork(3);
        ImputeDiag diag;
        std::vector<std::vector<double>> completions;
        try {
            completions = multiply_impute(ds, spec, imp, &diag);
        } catch (const MethodFailure&) {
            ++result.method_failures;
            result.rejection_fallbacks += diag.rejection_fallbacks;
            result.truncreg_refits += diag.truncreg_refits;
            result.unreachable_tails += diag.unreachable_tails;
            continue;
        }
        result.rejection_fallbacks += diag.rejection_fallbacks;
        result.truncreg_refits += diag.truncreg_refits;
        result.unreachable_tails += diag.unreachable_tails;

        std::vector<EstimateSet> estimates;
        estimates.reserve(completions.size());
        for (const std::vector<double>& xc : completions) {
            for (int i = 0; i < ds.n(); ++i)
                if (ds.missing[i] != 0 && xc[i] > 10.0 * max_obs) ++result.wild_imputations;
            estimates.push_back(analyze(xc, ds.y, ds.z, config.design));
        }
        per_rep.push_back(mi_combine(estimates));
    }

    result.reps_used = static_cast<int>(per_rep.size());
    if (result.reps_used == 0)
        throw MethodFailure("run_cell: every replication failed for this cell");

    const std::vector<std::string>& names = estimand_names(config.design);
    for (int j = 0; j < n_est; ++j) {
        EstimandSummary s;
        s.name = names[static_cast<std::size_t>(j)];
        s.truth = truth.v[static_cast<std::size_t>(j)];
        double mean = 0.0;
        for (const EstimateSet& e : per_rep) mean += e.v[static_cast<std::size_t>(j)];
        mean /= static_cast<double>(result.reps_used);
        double ss = 0.0;
        for (const EstimateSet& e : per_rep) {
            const double d = e.v[static_cast<std::size_t>(j)] - mean;
            ss += d * d;
        }
        s.mean_estimate = mean;
        s.sd_estimate = std::sqrt(ss / static_cast<double>(result.reps_used));
        s.bias = mean - s.truth;
        s.rmse = std::sqrt(s.bias * s.bias + s.sd_estimate * s.sd_estimate);
        s.rel_bias = 100.0 * s.bias / s.truth;
        s.rel_rmse = 100.0 * s.rmse / s.truth;
        result.estimands.push_back(std::move(s));
    }
    return result;
}

std::vector<CellResult> run_experiment(const SweepOptions& options) {
    if (options.workers < 1) throw InvalidInput("run_experiment: workers must be >= 1");
    std::vector<CellConfig> configs;
    for (double nu : options.nus)
        for (double rho2 : options.rho2s) {
            for (Pattern pattern : options.patterns)
                for (Method method : options.methods) {
                    CellConfig c;
                    c.design = options.design;
                    c.nu = nu;
                    c.rho2 = rho2;
                    c.pattern = pattern;
                    c.method = method;
                    c.n = options.n;
                    c.replications = options.replications;
                    c.spec.m = options.m;
                    configs.push_back(c);
                }
            if (options.oracle) {
                CellConfig c;
                c.design = options.design;
                c.nu = nu;
                c.rho2 = rho2;
                c.pattern = Pattern::mcar;  // unused: no deletion happens
                c.method = Method::none;
                c.n = options.n;
                c.replications = options.replications;
                c.spec.m = options.m;
                configs.push_back(c);
            }
        }
    std::sort(configs.begin(), configs.end(), config_less);

    std::vector<CellResult> results(configs.size());
    if (options.workers == 1) {
        for (std::size_t i = 0; i < configs.size(); ++i)
            results[i] = run_cell(configs[i], options.seed);
        return results;
    }

    // Cells are embarrassingly parallel: streams derive from cell identity,
    // so the claim order cannot leak into the numbers.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(options.workers, static_cast<int>(configs.size()));
    std::vector<std::string> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= configs.size()) return;
                    results[i] = run_cell(configs[i], options.seed);
                }
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(w)] = e.what();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::string& e : errors)
        if (!e.empty()) throw Error("run_experiment worker failed: " + e);
    return results;
}

std::vector<std::string> validate_results(const std::vector<CellResult>& results) {
    std::vector<std::string> violations;
    for (const CellResult& cell : results) {
        std::ostringstream id;
        id << design_name(cell.config.design) << "/" << method_name(cell.config.method) << "/nu="
           << fmt_level(cell.config.nu) << "/rho2=" << fmt_level(cell.config.rho2) << "/"
           << pattern_name(cell.config.pattern);
        if (cell.reps_used < 1) {
            violations.push_back(id.str() + ": no usable replications");
            continue;
        }
        for (const EstimandSummary& s : cell.estimands) {
            if (!std::isfinite(s.mean_estimate) || !std::isfinite(s.sd_estimate)) {
                violations.push_back(id.str() + "/" + s.name + ": non-finite summary");
                continue;
            }
            const double rmse_check = std::sqrt(s.bias * s.bias + s.sd_estimate * s.sd_estimate);
            if (std::fabs(s.rmse - rmse_check) > 1e-12 * std::max(1.0, std::fabs(s.rmse)))
                violations.push_back(id.str() + "/" + s.name + ": rmse identity broken");
            // Zero-bias control: method none estimates exactly-unbiased
            // estimands, so a drift beyond 5 MC standard errors means the
            // generator or the analysis is wrong, not bad luck.
            if (cell.config.method == Method::none &&
                (s.name == "x_mean" || s.name == "slope" || s.name == "slope_x" ||
                 s.name == "slope_y" || s.name == "intercept")) {
                const double mcse =
                    s.sd_estimate / std::sqrt(static_cast<double>(cell.reps_used));
                if (std::fabs(s.bias) > 5.0 * mcse)
                    violations.push_back(id.str() + "/" + s.name +
                                         ": zero-bias control off by more than 5 MCSE");
            }
        }
    }
    return violations;
}

Grouping grouping_from_name(const std::string& s) {
    if (s == "method") return Grouping::method;
    if (s == "nu") return Grouping::nu;
    if (s == "rho2") return Grouping::rho2;
    if (s == "pattern") return Grouping::pattern;
    throw InvalidInput("grouping_from_name: unknown grouping '" + s + "'");
}

SummaryTable summarize(const std::vector<CellResult>& results, Grouping grouping) {
    if (results.empty()) throw InvalidInput("summarize: no results");
    SummaryTable table;
    table.design = results.front().config.design;
    table.grouping = grouping;
    table.estimands = estimand_names(table.design);
    const std::size_t n_est = table.estimands.size();

    struct Acc {
        int cells = 0;
        std::vector<double> bias, rmse;
    };
    // Keyed by (method rank, numeric level, level label) for a stable order.
    std::map<std::tuple<int, double, std::string>, Acc> acc;

    for (const CellResult& cell : results) {
        if (cell.config.design != table.design)
            throw InvalidInput("summarize: mixed designs in results");
        double level = 0.0;
        std::string key;
        switch (grouping) {
            case Grouping::method: break;
            case Grouping::nu:
                level = cell.config.nu;
                key = fmt_level(cell.config.nu);
                break;
            case Grouping::rho2:
                level = cell.config.rho2;
                key = fmt_level(cell.config.rho2);
                break;
            case Grouping::pattern:
                level = static_cast<double>(pattern_tag(cell.config.pattern));
                key = pattern_name(cell.config.pattern);
                break;
        }
        Acc& a = acc[{method_rank(cell.config.method), level, key}];
        if (a.bias.empty()) {
            a.bias.assign(n_est, 0.0);
            a.rmse.assign(n_est, 0.0);
        }
        ++a.cells;
        if (cell.estimands.size() != n_est)
            throw InvalidInput("summarize: estimand count mismatch");
        for (std::size_t j = 0; j < n_est; ++j) {
            a.bias[j] += cell.estimands[j].rel_bias;
            a.rmse[j] += cell.estimands[j].rel_rmse;
        }
    }

    for (const auto& [key, a] : acc) {
        SummaryRow row;
        row.method = static_cast<Method>(std::get<0>(key));
        row.key = std::get<2>(key);
        row.cells = a.cells;
        row.rel_bias.resize(n_est);
        row.rel_rmse.resize(n_est);
        for (std::size_t j = 0; j < n_est; ++j) {
            row.rel_bias[j] = a.bias[j] / a.cells;
            row.rel_rmse[j] = a.rmse[j] / a.cells;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_summary(const SummaryTable& table) {
    std::ostringstream out;
    auto block = [&](const char* title, bool bias) {
        out << title << " (" << design_name(table.design) << ", % of true value)\n";
        out << "  " << std::left;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-14s %-8s %5s", "method",
                      table.grouping == Grouping::method ? "" : "level", "cells");
        out << buf;
        for (const std::string& e : table.estimands) {
            std::snprintf(buf, sizeof buf, " %9s", e.c_str());
            out << buf;
        }
        out << "\n";
        for (const SummaryRow& row : table.rows) {
            std::snprintf(buf, sizeof buf, "  %-14s %-8s %5d", method_name(row.method),
                          row.key.c_str(), row.cells);
            out << buf;
            const std::vector<double>& v = bias ? row.rel_bias : row.rel_rmse;
            for (double x : v) {
                std::snprintf(buf, sizeof buf, bias ? " %+9.0f" : " %9.0f", x);
                out << buf;
            }
            out << "\n";
        }
    };
    block("Relative bias", true);
    out << "\n";
    block("Relative RMSE", false);
    return out.str();
}

std::string cells_to_csv(const std::vector<CellResult>& results) {
    std::vector<const CellResult*> ordered;
    ordered.reserve(results.size());
    for (const CellResult& r : results) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const CellResult* a, const CellResult* b) {
                  return config_less(a->config, b->config);
              });

    std::ostringstream out;
    out << kCellsHeader << "\n";
    for (const CellResult* cell : ordered) {
        for (const EstimandSummary& s : cell->estimands) {
            out << design_name(cell->config.design) << ',' << method_name(cell->config.method)
                << ',' << fmt17(cell->config.nu) << ',' << fmt17(cell->config.rho2) << ','
                << pattern_name(cell->config.pattern) << ',' << cell->config.n << ','
                << cell->config.replications << ',' << cell->reps_used << ',' << s.name << ','
                << fmt17(s.truth) << ',' << fmt17(s.mean_estimate) << ',' << fmt17(s.sd_estimate)
                << ',' << fmt17(s.bias) << ',' << fmt17(s.rmse) << ',' << fmt17(s.rel_bias) << ','
                << fmt17(s.rel_rmse) << ',' << cell->rejection_fallbacks << ','
                << cell->truncreg_refits << ',' << cell->unreachable_tails << ','
                << cell->wild_imputations << ',' << cell->method_failures << ','
                << cell->mask_resamples << "\n";
        }
    }
    return out.str();
}

std::vector<CellResult> cells_from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidData("cells csv: empty input");
    if (split_csv_line(line) != split_csv_line(kCellsHeader))
        throw InvalidData("cells csv: unexpected header");

    std::vector<CellResult> out;
    auto same_cell = [](const CellResult& cell, const std::vector<std::string>& f) {
        return design_name(cell.config.design) == f[0] &&
               method_name(cell.config.method) == f[1] && cell.config.nu == parse_double(f[2]) &&
               cell.config.rho2 == parse_double(f[3]) &&
               pattern_name(cell.config.pattern) == f[4];
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 22) throw InvalidData("cells csv: wrong column count");
        if (out.empty() || !same_cell(out.back(), f)) {
            CellResult cell;
            cell.config.design = design_from_name(f[0]);
            cell.config.method = method_from_name(f[1]);
            cell.config.nu = parse_double(f[2]);
            cell.config.rho2 = parse_double(f[3]);
            cell.config.pattern = pattern_from_name(f[4]);
            cell.config.n = static_cast<int>(parse_long(f[5]));
            cell.config.replications = static_cast<int>(parse_long(f[6]));
            cell.reps_used = static_cast<int>(parse_long(f[7]));
            cell.rejection_fallbacks = parse_long(f[16]);
            cell.truncreg_refits = parse_long(f[17]);
            cell.unreachable_tails = parse_long(f[18]);
            cell.wild_imputations = parse_long(f[19]);
            cell.method_failures = parse_long(f[20]);
            cell.mask_resamples = parse_long(f[21]);
            out.push_back(std::move(cell));
        }
        EstimandSummary s;
        s.name = f[8];
        s.truth = parse_double(f[9]);
        s.mean_estimate = parse_double(f[10]);
        s.sd_estimate = parse_double(f[11]);
        s.bias = parse_double(f[12]);
        s.rmse = parse_double(f[13]);
        s.rel_bias = parse_double(f[14]);
        s.rel_rmse = parse_double(f[15]);
        out.back().estimands.push_back(std::move(s));
    }
    if (out.empty()) throw InvalidData("cells csv: no data rows");
    return out;
}

std::vector<CellResult> read_cells_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("read_cells_csv: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return cells_from_csv_text(buf.str());
}

void emit_tables(const std::vector<CellResult>& results, const std::string& dir,
                 const RunManifest& manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    auto write_file = [&](const std::string& name, const std::string& content) {
        const fs::path p = fs::path(dir) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw InvalidInput("emit_tables: cannot write '" + p.string() + "'");
        out << content;
    };

    write_file("cells.csv", cells_to_csv(results));

    const std::pair<Grouping, const char*> groupings[] = {
        {Grouping::method, "summary_method.csv"},
        {Grouping::nu, "summary_nu.csv"},
        {Grouping::rho2, "summary_rho2.csv"},
        {Grouping::pattern, "summary_pattern.csv"},
    };
    for (const auto& [grouping, name] : groupings) {
        const SummaryTable table = summarize(results, grouping);
        std::ostringstream out;
        out << "method,level,cells";
        for (const std::string& e : table.estimands) out << ",rel_bias_" << e;
        for (const std::string& e : table.estimands) out << ",rel_rmse_" << e;
        out << "\n";
        for (const SummaryRow& row : table.rows) {
            out << method_name(row.method) << ',' << row.key << ',' << row.cells;
            for (double v : row.rel_bias) out << ',' << fmt17(v);
            for (double v : row.rel_rmse) out << ',' << fmt17(v);
            out << "\n";
        }
        write_file(name, out.str());
    }

    std::ostringstream mf;
    mf << "seed=" << manifest.seed << "\n";
    mf << "design=" << design_name(manifest.options.design) << "\n";
    mf << "n=" << manifest.options.n << "\n";
    mf << "replications=" << manifest.options.replications << "\n";
    mf << "m=" << manifest.options.m << "\n";
    mf << "workers=" << manifest.options.workers << "\n";
    mf << "nu_levels=";
    for (std::size_t i = 0; i < manifest.options.nus.size(); ++i)
        mf << (i ? " " : "") << fmt_level(manifest.options.nus[i]);
    mf << "\nrho2_levels=";
    for (std::size_t i = 0; i < manifest.options.rho2s.size(); ++i)
        mf << (i ? " " : "") << fmt_level(manifest.options.rho2s[i]);
    mf << "\npatterns=";
    for (std::size_t i = 0; i < manifest.options.patterns.size(); ++i)
        mf << (i ? " " : "") << pattern_name(manifest.options.patterns[i]);
    mf << "\nmethods=";
    for (std::size_t i = 0; i < manifest.options.methods.size(); ++i)
        mf << (i ? " " : "") << method_name(manifest.options.methods[i]);
    mf << "\noracle=" << (manifest.options.oracle ? "yes" : "no") << "\n";
    mf << "cells=" << manifest.cell_count << "\n";

    long rejection = 0, refits = 0, unreachable = 0, wild = 0, failures = 0, resamples = 0;
    for (const CellResult& cell : results) {
        rejection += cell.rejection_fallbacks;
        refits += cell.truncreg_refits;
        unreachable += cell.unreachable_tails;
        wild += cell.wild_imputations;
        failures += cell.method_failures;
        resamples += cell.mask_resamples;
    }
    mf << "rejection_fallbacks=" << rejection << "\n";
    mf << "truncreg_refits=" << refits << "\n";
    mf << "unreachable_tails=" << unreachable << "\n";
    mf << "wild_imputations=" << wild << "\n";
    mf << "method_failures=" << failures << "\n";
    mf << "mask_resamples=" << resamples << "\n";
    for (const auto& [k, v] : manifest.counters) mf << k << "=" << v << "\n";
    write_file("manifest.txt", mf.str());
}

}  // namespace skewimpute
