#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dkappa/common.hpp"
#include "dkappa/io.hpp"

namespace {

using namespace dkappa;

ExerciseKind parse_exercise(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (t == "EXP1") return ExerciseKind::Exp1;
    if (t == "EXP2") return ExerciseKind::Exp2;
    if (t == "CUSTOM") return ExerciseKind::Custom;
    throw CLI::ValidationError("--exercise", "expected EXP1, EXP2 or CUSTOM");
}

Comparison parse_comparison(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (t == "B_VS_P" || t == "B-VS-P" || t == "BVP") return Comparison::BVsP;
    if (t == "P1_VS_P2" || t == "P1-VS-P2" || t == "P1P2") return Comparison::P1VsP2;
    throw CLI::ValidationError("--comparison", "expected B_vs_P or P1_vs_P2");
}

std::vector<Variant> parse_variants(const std::string& csv) {
    std::vector<Variant> out;
    std::string token;
    std::istringstream stream(csv);
    while (std::getline(stream, token, ',')) {
        std::string t;
        for (char c : token) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (t.empty()) continue;
        if (t == "PLAIN") out.push_back(Variant::Plain);
        else if (t == "V1") out.push_back(Variant::V1);
        else if (t == "V2") out.push_back(Variant::V2);
        else if (t == "V3") out.push_back(Variant::V3);
        else throw CLI::ValidationError("--variants", "unknown variant '" + token + "'");
    }
    return out;
}

std::vector<DomainSel> parse_domains(const std::string& csv) {
    std::vector<DomainSel> out;
    std::string token;
    std::istringstream stream(csv);
    while (std::getline(stream, token, ',')) {
        std::string t;
        for (char c : token) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (t.empty()) continue;
        if (t == "ALL") out.push_back(DomainSel::All);
        else if (t == "DBR") out.push_back(DomainSel::Dbr);
        else if (t == "IR") out.push_back(DomainSel::Ir);
        else throw CLI::ValidationError("--domain", "unknown domain '" + token + "'");
    }
    if (out.empty()) out.push_back(DomainSel::All);
    return out;
}

void apply_weights(RunConfig& config, const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "linear") config.weights = WeightScheme::Linear;
    else if (t == "vqr") config.weights = WeightScheme::Vqr;
    else if (t == "identity") config.weights = WeightScheme::Identity;
    else {
        config.weights = WeightScheme::Custom;
        config.weights_path = s;
    }
}

void apply_frame(RunConfig& config, const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "builtin") config.frame_source = FrameSource::Builtin;
    else if (t == "data-counts") config.frame_source = FrameSource::DataCounts;
    else {
        config.frame_source = FrameSource::File;
        config.frame_path = s;
    }
}

struct CommonFlags {
    std::string exercise = "EXP1";
    std::string comparison = "B_vs_P";
    std::string weights = "vqr";
    std::string domain = "ALL";
    std::string variants = "V1,V2,V3";
    std::string frame = "builtin";
    std::string data;
    std::string out = "dkappa_out";
    std::vector<std::string> labels;
    std::int64_t replicates = 2000;
    std::uint64_t seed = 0;
    double confidence = 0.95;
    unsigned threads = 0;
    bool skip_unknown_area = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_bootstrap) {
    cmd->add_option("--exercise", flags.exercise, "EXP1, EXP2 or CUSTOM");
    cmd->add_option("--comparison", flags.comparison, "B_vs_P or P1_vs_P2");
    cmd->add_option("--weights", flags.weights, "linear, vqr, identity or a matrix file");
    cmd->add_option("--domain", flags.domain, "comma list of ALL, DBR, IR");
    cmd->add_option("--variants", flags.variants, "comma list of PLAIN, V1, V2, V3");
    cmd->add_option("--frame", flags.frame, "builtin, data-counts or a frame file");
    cmd->add_option("--data", flags.data, "ratings CSV (id,area,B,P1,P2,P)");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--labels", flags.labels, "custom category labels, best first");
    cmd->add_option("--seed", flags.seed, "RNG seed");
    cmd->add_option("--threads", flags.threads, "worker threads (0 = auto)");
    cmd->add_flag("--skip-unknown-area", flags.skip_unknown_area,
                  "drop rows whose area is not in the frame");
    if (with_bootstrap) {
        cmd->add_option("--replicates", flags.replicates, "bootstrap / Monte Carlo replicates");
        cmd->add_option("--confidence", flags.confidence, "confidence level");
    }
}

RunConfig make_config(const CommonFlags& flags) {
    RunConfig config;
    config.exercise = parse_exercise(flags.exercise);
    config.custom_labels = flags.labels;
    apply_weights(config, flags.weights);
    config.comparison = parse_comparison(flags.comparison);
    config.domains = parse_domains(flags.domain);
    config.variants = parse_variants(flags.variants);
    apply_frame(config, flags.frame);
    config.data_path = flags.data;
    config.out_dir = flags.out;
    config.bootstrap.replicates = flags.replicates;
    config.bootstrap.seed = flags.seed;
    config.bootstrap.confidence_level = flags.confidence;
    config.bootstrap.threads = flags.threads;
    config.unknown_area =
        flags.skip_unknown_area ? UnknownAreaPolicy::Skip : UnknownAreaPolicy::Error;
    return config;
}

void print_estimate(const EstimateReport& report) {
    if (report.cells.empty()) return;
    const std::size_t cols = report.series.size();
    std::cout << "Area    ";
    for (const std::string& s : report.series) {
        std::cout << s;
        for (std::size_t i = s.size(); i < 22; ++i) std::cout << ' ';
    }
    std::cout << '\n';
    for (std::size_t row = 0; row < report.areas.size(); ++row) {
        std::cout << report.areas[row];
        for (std::size_t i = report.areas[row].size(); i < 8; ++i) std::cout << ' ';
        for (std::size_t col = 0; col < cols; ++col) {
            const EstimateCell& cell = report.cells[row * cols + col];
            std::string text = "-";
            if (cell.defined) {
                text = format_percent(cell.estimate.point) + "(" +
                       format_percent(cell.estimate.ci_low) + "," +
                       format_percent(cell.estimate.ci_high) + ")";
            }
            std::cout << text;
            for (std::size_t i = text.size(); i < 22; ++i) std::cout << ' ';
        }
        std::cout << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design-based inter-rater agreement toolkit"};
    app.require_subcommand(1);

    CommonFlags est_flags, miss_flags, sim_flags, oracle_flags;
    miss_flags.replicates = 100000;

    CLI::App* est = app.add_subcommand("estimate", "Kappa estimates with bootstrap intervals");
    add_common_flags(est, est_flags, true);

    CLI::App* miss = app.add_subcommand("missing-test",
                                        "Homogeneity tests for per-stratum missing proportions");
    miss_flags.exercise = "EXP2";
    add_common_flags(miss, miss_flags, true);

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study on a synthetic population");
    add_common_flags(sim, sim_flags, true);
    int sim_runs = 100;
    std::vector<std::int64_t> sim_stratum_sizes = {2000, 3000};
    std::vector<std::int64_t> sim_sample_sizes = {200, 300};
    std::vector<double> sim_marginal;
    double sim_lambda = 0.5;
    std::vector<double> sim_sentinel_u, sim_sentinel_v;
    std::string sim_variant = "V1";
    sim->add_option("--runs", sim_runs, "independent samples to draw");
    sim->add_option("--stratum-sizes", sim_stratum_sizes, "population size per stratum");
    sim->add_option("--sample-sizes", sim_sample_sizes, "sample size per stratum");
    sim->add_option("--marginal", sim_marginal, "category probabilities (definite categories)");
    sim->add_option("--lambda", sim_lambda, "probability the two ratings agree exactly");
    sim->add_option("--sentinel-u", sim_sentinel_u, "per-stratum sentinel rate, first rater");
    sim->add_option("--sentinel-v", sim_sentinel_v, "per-stratum sentinel rate, second rater");
    sim->add_option("--study-variant", sim_variant, "variant under study (PLAIN, V1, V2, V3)");

    CLI::App* oracle = app.add_subcommand("oracle", "Population coefficients on a census file");
    add_common_flags(oracle, oracle_flags, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (est->parsed()) {
            const RunConfig config = make_config(est_flags);
            const EstimateReport report = run_estimate(config);
            print_estimate(report);
        } else if (miss->parsed()) {
            const RunConfig config = make_config(miss_flags);
            const MissingTestReport report = run_missing_test(config);
            std::cout << "R = " << report.statistic << ", p = " << report.test.p_value
                      << ", log10 BF = " << report.log10_bf << '\n';
        } else if (sim->parsed()) {
            const RunConfig config = make_config(sim_flags);
            SimulateOptions options;
            options.model.stratum_sizes = sim_stratum_sizes;
            const std::size_t strata = sim_stratum_sizes.size();
            const std::size_t definite =
                config.exercise == ExerciseKind::Custom && !config.custom_labels.empty()
                    ? config.custom_labels.size()
                    : (config.exercise == ExerciseKind::Exp2 ? 5 : 4);
            options.model.categories = static_cast<int>(definite) + 1;
            options.model.marginal = sim_marginal;
            if (options.model.marginal.empty())
                options.model.marginal.assign(definite, 1.0 / static_cast<double>(definite));
            options.model.agreement_lambda = sim_lambda;
            options.model.sentinel_rate_first =
                sim_sentinel_u.empty() ? std::vector<double>(strata, 0.1) : sim_sentinel_u;
            options.model.sentinel_rate_second =
                sim_sentinel_v.empty() ? std::vector<double>(strata, 0.1) : sim_sentinel_v;
            options.sample_sizes = sim_sample_sizes;
            options.study.runs = sim_runs;
            const std::vector<Variant> variants = parse_variants(sim_variant);
            if (variants.size() != 1)
                throw InvalidInput("--study-variant takes exactly one variant");
            options.study.variant = variants[0];
            const McStudyReport report = run_simulate(config, options);
            std::cout << "true kappa " << format_percent(report.true_kappa) << ", coverage "
                      << report.coverage << ", mean width " << report.mean_ci_width * 100.0
                      << " pp\n";
        } else if (oracle->parsed()) {
            const RunConfig config = make_config(oracle_flags);
            const OracleReport report = run_oracle(config);
            for (std::size_t row = 0; row < report.areas.size(); ++row) {
                std::cout << report.areas[row];
                for (std::size_t i = report.areas[row].size(); i < 8; ++i) std::cout << ' ';
                for (const std::string& v : report.values[row]) {
                    std::cout << v;
                    for (std::size_t i = v.size(); i < 12; ++i) std::cout << ' ';
                }
                std::cout << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
