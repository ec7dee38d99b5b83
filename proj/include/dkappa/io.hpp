#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dkappa/bootstrap.hpp"
#include "dkappa/design.hpp"
#include "dkappa/frames.hpp"
#include "dkappa/missingness.hpp"
#include "dkappa/simulation.hpp"

namespace dkappa {

enum class Comparison { BVsP, P1VsP2 };
enum class DomainSel { All, Dbr, Ir };
enum class WeightScheme { Linear, Vqr, Identity, Custom };
enum class FrameSource { Builtin, File, DataCounts };
enum class UnknownAreaPolicy { Error, Skip };
enum class ExerciseKind { Exp1, Exp2, Custom };

// One parsed data row. Labels are kept verbatim; category mapping happens
// during sample construction.
struct RatingRecord {
    std::string id;
    std::string area;
    std::string b;
    std::string p1;
    std::string p2;
    std::string p;
};

struct RunConfig {
    ExerciseKind exercise = ExerciseKind::Exp1;
    std::vector<std::string> custom_labels;  // definite categories, best first

    WeightScheme weights = WeightScheme::Vqr;
    std::string weights_path;  // Custom: whitespace/comma separated square matrix

    Comparison comparison = Comparison::BVsP;
    std::vector<DomainSel> domains = {DomainSel::All};
    std::vector<Variant> variants = {Variant::V1, Variant::V2, Variant::V3};

    FrameSource frame_source = FrameSource::Builtin;
    std::string frame_path;

    BootstrapConfig bootstrap;

    std::string data_path;
    std::string out_dir = "dkappa_out";
    UnknownAreaPolicy unknown_area = UnknownAreaPolicy::Error;
};

// Resolved ingestion context: alphabet, frame and rating columns.
struct IngestSpec {
    std::vector<std::string> labels;  // definite categories, best first
    DesignFrame frame;
    Comparison comparison = Comparison::BVsP;
    UnknownAreaPolicy unknown_area = UnknownAreaPolicy::Error;
    bool frame_from_data = false;  // rebuild n_h (and N_h if absent) from row counts
};

std::vector<RatingRecord> read_rating_records(const std::string& path);

StratifiedSample ingest_csv(const std::string& path, const IngestSpec& spec);

// Writes a sample back out in the ingestion schema, preserving categories
// and domain tags under the same comparison.
void export_csv(const StratifiedSample& sample, const std::vector<std::string>& labels,
                Comparison comparison, const std::string& path);

// Per-stratum counts of items whose second rating is the sentinel (the
// missing peer ratings under the B-vs-P mapping).
MissingCounts missing_counts(const StratifiedSample& sample);

// Percent with two decimals, half-even; the one formatting used everywhere.
std::string format_percent(double fraction);
double round_half_even(double x);

struct EstimateCell {
    std::string area;     // stratum label or "All"
    std::string series;   // e.g. "kappa1", "kappa1(DBR)"
    Variant variant = Variant::V1;
    DomainSel domain = DomainSel::All;
    bool defined = false;
    KappaEstimate estimate;
};

struct EstimateReport {
    std::vector<std::string> areas;    // row order
    std::vector<std::string> series;   // column order
    std::vector<EstimateCell> cells;   // row-major
    std::vector<std::string> stamp;    // resolved config, one "key=value" per line
};

// Full estimation run: per-area and overall estimates with bootstrap CIs for
// every requested variant/domain. Writes estimates.tsv, estimates.txt and
// errorbars.tsv under config.out_dir.
EstimateReport run_estimate(const RunConfig& config);

struct MissingTestReport {
    MissingCounts counts;
    std::vector<std::string> area_labels;
    double statistic = 0.0;
    TestResult test;
    double log_bf = 0.0;    // natural log
    double log10_bf = 0.0;
    std::vector<std::string> stamp;
};

// Homogeneity tests of per-area missing proportions. With no data file the
// built-in published counts are used. Writes missing_test.tsv / .txt.
MissingTestReport run_missing_test(const RunConfig& config);

struct OracleReport {
    std::vector<std::string> areas;
    std::vector<std::string> series;
    // percent strings, "-" when undefined
    std::vector<std::vector<std::string>> values;
    std::vector<std::string> stamp;
};

// Population-level coefficients of a census file (every item listed).
OracleReport run_oracle(const RunConfig& config);

struct SimulateOptions {
    PopulationModel model;
    std::vector<std::int64_t> sample_sizes;
    McStudyConfig study;
};

// Monte Carlo study of estimator behaviour on a synthetic population.
// Writes study.tsv / study.txt.
McStudyReport run_simulate(const RunConfig& config, const SimulateOptions& options);

// Atomic file write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace dkappa
