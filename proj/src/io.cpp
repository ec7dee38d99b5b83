#include "dkappa/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "dkappa/common.hpp"
#include "dkappa/rng.hpp"

namespace dkappa {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::string upper(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    fields.push_back(trim(field));
    return fields;
}

// "Area 8a" / "area 8a" / "8a" all name stratum "8a".
std::string normalize_area(const std::string& raw) {
    std::string s = trim(raw);
    if (lower(s).rfind("area", 0) == 0) s = trim(s.substr(4));
    return lower(s);
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Plain: return "kappa";
        case Variant::V1: return "kappa1";
        case Variant::V2: return "kappa2";
        case Variant::V3: return "kappa3";
    }
    return "?";
}

std::string variant_config_name(Variant v) {
    switch (v) {
        case Variant::Plain: return "PLAIN";
        case Variant::V1: return "V1";
        case Variant::V2: return "V2";
        case Variant::V3: return "V3";
    }
    return "?";
}

std::string domain_name(DomainSel d) {
    switch (d) {
        case DomainSel::All: return "ALL";
        case DomainSel::Dbr: return "DBR";
        case DomainSel::Ir: return "IR";
    }
    return "?";
}

std::string comparison_name(Comparison c) {
    return c == Comparison::BVsP ? "B_vs_P" : "P1_vs_P2";
}

std::string exercise_name(ExerciseKind e) {
    switch (e) {
        case ExerciseKind::Exp1: return "EXP1";
        case ExerciseKind::Exp2: return "EXP2";
        case ExerciseKind::Custom: return "CUSTOM";
    }
    return "?";
}

std::string weights_name(const RunConfig& config) {
    switch (config.weights) {
        case WeightScheme::Linear: return "linear";
        case WeightScheme::Vqr: return "vqr";
        case WeightScheme::Identity: return "identity";
        case WeightScheme::Custom: return "custom:" + config.weights_path;
    }
    return "?";
}

// Resolved per-run context shared by the subcommands.
struct RunContext {
    std::vector<std::string> labels;  // definite categories
    int categories = 0;               // including the sentinel
    WeightMatrix weights{2, {1.0, 0.0, 0.0, 1.0}};
    DesignFrame frame{{{"1", 1, 1}}};
};

WeightMatrix load_weight_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open weight matrix file: " + path);
    std::vector<double> values;
    std::string token;
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (char& ch : contents)
        if (ch == ',' || ch == ';') ch = ' ';
    std::istringstream stream(contents);
    double v = 0.0;
    while (stream >> v) values.push_back(v);
    const int dim = static_cast<int>(std::llround(std::sqrt(static_cast<double>(values.size()))));
    if (dim < 2 || static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim) != values.size())
        throw SchemaError("weight matrix file must hold a square matrix, got " +
                          std::to_string(values.size()) + " numbers");
    return WeightMatrix(dim, std::move(values));
}

DesignFrame load_frame_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open frame file: " + path);
    std::vector<Stratum> strata;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        for (char& ch : t)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream row(t);
        Stratum s;
        if (!(row >> s.label >> s.population >> s.sample))
            throw SchemaError("frame file line " + std::to_string(line_no) +
                              ": expected 'label N_h n_h'");
        strata.push_back(std::move(s));
    }
    return DesignFrame(std::move(strata));
}

WeightMatrix resolve_weights(const RunConfig& config, int definite_categories) {
    switch (config.weights) {
        case WeightScheme::Linear: return linear_weights(definite_categories);
        case WeightScheme::Identity: return identity_weights(definite_categories);
        case WeightScheme::Vqr: {
            if (config.exercise == ExerciseKind::Exp1) return vqr_weights(Exercise::Exp1);
            if (config.exercise == ExerciseKind::Exp2) return vqr_weights(Exercise::Exp2);
            throw InvalidInput("VQR weights are defined only for EXP1 and EXP2");
        }
        case WeightScheme::Custom: return load_weight_matrix(config.weights_path);
    }
    throw InvalidInput("unknown weight scheme");
}

// Grows a weight matrix over the definite categories by a sentinel row and
// column (unit diagonal, zero credit elsewhere), for plain kappa on
// sentinel-bearing tables.
WeightMatrix extend_with_sentinel(const WeightMatrix& w) {
    const int c = w.categories() + 1;
    std::vector<double> entries(static_cast<std::size_t>(c) * c, 0.0);
    for (int l = 1; l < c; ++l)
        for (int m = 1; m < c; ++m)
            entries[static_cast<std::size_t>(l - 1) * c + (m - 1)] = w.at(l, m);
    entries[static_cast<std::size_t>(c - 1) * c + (c - 1)] = 1.0;
    return WeightMatrix(c, std::move(entries));
}

RunContext resolve_context(const RunConfig& config, bool need_frame) {
    RunContext ctx;
    if (config.exercise == ExerciseKind::Custom) {
        if (config.custom_labels.size() < 1)
            throw InvalidInput("custom exercise needs category labels");
        ctx.labels = config.custom_labels;
    } else {
        ctx.labels = exercise_spec(config.exercise == ExerciseKind::Exp1 ? Exercise::Exp1
                                                                         : Exercise::Exp2)
                         .labels;
    }
    ctx.categories = static_cast<int>(ctx.labels.size()) + 1;
    ctx.weights = resolve_weights(config, static_cast<int>(ctx.labels.size()));
    if (ctx.weights.categories() != static_cast<int>(ctx.labels.size()) &&
        ctx.weights.categories() != ctx.categories)
        throw InvalidInput("weight matrix dimension " + std::to_string(ctx.weights.categories()) +
                           " does not match the " + std::to_string(ctx.labels.size()) +
                           " definite categories");

    if (need_frame) {
        switch (config.frame_source) {
            case FrameSource::Builtin:
                if (config.exercise == ExerciseKind::Exp1)
                    ctx.frame = exp1_frame();
                else if (config.exercise == ExerciseKind::Exp2)
                    ctx.frame = exp2_frame();
                else
                    throw DesignError("custom exercise has no built-in frame; use --frame");
                break;
            case FrameSource::File:
                ctx.frame = load_frame_file(config.frame_path);
                break;
            case FrameSource::DataCounts: {
                // N_h still comes from the built-in (or file) frame; n_h is
                // replaced by the observed row counts at ingestion.
                if (config.exercise == ExerciseKind::Exp1)
                    ctx.frame = exp1_frame();
                else if (config.exercise == ExerciseKind::Exp2)
                    ctx.frame = exp2_frame();
                else if (!config.frame_path.empty())
                    ctx.frame = load_frame_file(config.frame_path);
                else
                    throw DesignError("data-counts frame needs a base frame for N_h");
                break;
            }
        }
    }
    return ctx;
}

int parse_rating(const std::string& raw, const std::vector<std::string>& labels,
                 bool sentinel_is_ir, int row_no, const char* column) {
    const std::string token = upper(trim(raw));
    if (sentinel_is_ir) {
        if (token == "IR") return static_cast<int>(labels.size()) + 1;
    } else {
        if (token == "NA") return static_cast<int>(labels.size()) + 1;
    }
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (token == upper(labels[k])) return static_cast<int>(k + 1);
    throw ParseError("row " + std::to_string(row_no) + ": unknown " + column + " label '" +
                     trim(raw) + "'");
}

}  // namespace

std::vector<RatingRecord> read_rating_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open data file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("data file is empty: " + path);
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
        line = line.substr(3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    auto find_column = [&](const char* name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (lower(header[i]) == name) return static_cast<int>(i);
        throw SchemaError(std::string("schema-error: missing column '") + name + "'");
    };
    const int col_id = find_column("id");
    const int col_area = find_column("area");
    const int col_b = find_column("b");
    const int col_p1 = find_column("p1");
    const int col_p2 = find_column("p2");
    const int col_p = find_column("p");

    std::vector<RatingRecord> records;
    int row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const int needed = std::max({col_id, col_area, col_b, col_p1, col_p2, col_p});
        if (static_cast<int>(fields.size()) <= needed)
            throw ParseError("row " + std::to_string(row_no) + ": expected at least " +
                             std::to_string(needed + 1) + " fields, got " +
                             std::to_string(fields.size()));
        RatingRecord rec;
        rec.id = fields[static_cast<std::size_t>(col_id)];
        rec.area = fields[static_cast<std::size_t>(col_area)];
        rec.b = fields[static_cast<std::size_t>(col_b)];
        rec.p1 = fields[static_cast<std::size_t>(col_p1)];
        rec.p2 = fields[static_cast<std::size_t>(col_p2)];
        rec.p = fields[static_cast<std::size_t>(col_p)];
        records.push_back(std::move(rec));
    }
    return records;
}

StratifiedSample ingest_csv(const std::string& path, const IngestSpec& spec) {
    const std::vector<RatingRecord> records = read_rating_records(path);

    std::map<std::string, int> area_index;
    for (int h = 1; h <= spec.frame.strata(); ++h)
        area_index[normalize_area(spec.frame.at(h).label)] = h;

    std::vector<RatedItem> items;
    items.reserve(records.size());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(spec.frame.strata()), 0);
    int row_no = 1;
    for (const RatingRecord& rec : records) {
        ++row_no;
        const auto it = area_index.find(normalize_area(rec.area));
        if (it == area_index.end()) {
            if (spec.unknown_area == UnknownAreaPolicy::Skip) continue;
            throw ParseError("row " + std::to_string(row_no) + ": unknown area '" +
                             trim(rec.area) + "'");
        }
        RatedItem item;
        item.stratum = it->second;
        const int b_category = parse_rating(rec.b, spec.labels, true, row_no, "B");
        item.tag = (b_category == static_cast<int>(spec.labels.size()) + 1) ? DomainTag::Ir
                                                                            : DomainTag::Dbr;
        if (spec.comparison == Comparison::BVsP) {
            item.first = b_category;
            item.second = parse_rating(rec.p, spec.labels, false, row_no, "P");
        } else {
            item.first = parse_rating(rec.p1, spec.labels, false, row_no, "P1");
            item.second = parse_rating(rec.p2, spec.labels, false, row_no, "P2");
        }
        ++counts[static_cast<std::size_t>(item.stratum - 1)];
        items.push_back(item);
    }

    DesignFrame frame = spec.frame;
    if (spec.frame_from_data) {
        std::vector<Stratum> strata;
        for (int h = 1; h <= spec.frame.strata(); ++h) {
            Stratum s = spec.frame.at(h);
            const std::int64_t observed = counts[static_cast<std::size_t>(h - 1)];
            if (observed == 0)
                throw DesignError("design-error: stratum " + s.label + " has no data rows");
            if (observed > s.population)
                throw DesignError("design-error: stratum " + s.label + " has " +
                                  std::to_string(observed) + " rows but N_h = " +
                                  std::to_string(s.population));
            s.sample = observed;
            strata.push_back(std::move(s));
        }
        frame = DesignFrame(std::move(strata));
    }

    const int categories = static_cast<int>(spec.labels.size()) + 1;
    return StratifiedSample(std::move(frame), categories, std::move(items));
}

void export_csv(const StratifiedSample& sample, const std::vector<std::string>& labels,
                Comparison comparison, const std::string& path) {
    const int sentinel = static_cast<int>(labels.size()) + 1;
    std::ostringstream out;
    out << "id,area,B,P1,P2,P\n";
    std::int64_t row = 0;
    for (const RatedItem& it : sample.items()) {
        ++row;
        std::string b, p1, p2, p;
        if (comparison == Comparison::BVsP) {
            b = it.first == sentinel ? "IR" : labels[static_cast<std::size_t>(it.first - 1)];
            p = it.second == sentinel ? "NA" : labels[static_cast<std::size_t>(it.second - 1)];
            p1 = p2 = p;
        } else {
            b = it.tag == DomainTag::Ir ? "IR" : labels[0];
            p1 = it.first == sentinel ? "NA" : labels[static_cast<std::size_t>(it.first - 1)];
            p2 = it.second == sentinel ? "NA" : labels[static_cast<std::size_t>(it.second - 1)];
            p = "NA";
        }
        out << 'r' << row << ',' << sample.frame().at(it.stratum).label << ',' << b << ',' << p1
            << ',' << p2 << ',' << p << '\n';
    }
    write_file_atomic(path, out.str());
}

MissingCounts missing_counts(const StratifiedSample& sample) {
    const int sentinel = sample.categories();
    std::vector<std::int64_t> sizes, missing(static_cast<std::size_t>(sample.frame().strata()), 0);
    for (int h = 1; h <= sample.frame().strata(); ++h)
        sizes.push_back(sample.frame().at(h).sample);
    for (const RatedItem& it : sample.items())
        if (it.second == sentinel) ++missing[static_cast<std::size_t>(it.stratum - 1)];
    return MissingCounts(std::move(sizes), std::move(missing));
}

double round_half_even(double x) { return std::nearbyint(x); }

std::string format_percent(double fraction) {
    double scaled = round_half_even(fraction * 10000.0) / 100.0;
    scaled += 0.0;  // normalize -0
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", scaled);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string(), 1);
        out << contents;
    }
    fs::rename(tmp, target);
}

namespace {

std::vector<std::string> config_stamp(const RunConfig& config, const std::string& subcommand) {
    std::vector<std::string> stamp;
    stamp.push_back("tool=dkappa");
    stamp.push_back("subcommand=" + subcommand);
    stamp.push_back("exercise=" + exercise_name(config.exercise));
    stamp.push_back("comparison=" + comparison_name(config.comparison));
    stamp.push_back("weights=" + weights_name(config));
    std::string domains;
    for (DomainSel d : config.domains) domains += (domains.empty() ? "" : ",") + domain_name(d);
    stamp.push_back("domains=" + domains);
    std::string variants;
    for (Variant v : config.variants)
        variants += (variants.empty() ? "" : ",") + variant_config_name(v);
    stamp.push_back("variants=" + variants);
    switch (config.frame_source) {
        case FrameSource::Builtin: stamp.push_back("frame=builtin"); break;
        case FrameSource::File: stamp.push_back("frame=file:" + config.frame_path); break;
        case FrameSource::DataCounts: stamp.push_back("frame=data-counts"); break;
    }
    stamp.push_back("data=" + (config.data_path.empty() ? std::string("builtin") : config.data_path));
    stamp.push_back("seed=" + std::to_string(config.bootstrap.seed));
    stamp.push_back("replicates=" + std::to_string(config.bootstrap.replicates));
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", config.bootstrap.confidence_level);
        stamp.push_back(std::string("confidence=") + buf);
    }
    return stamp;
}

std::string stamp_block(const std::vector<std::string>& stamp) {
    std::string out;
    for (const std::string& line : stamp) out += "# " + line + "\n";
    return out;
}

std::string cell_text(const EstimateCell& cell) {
    if (!cell.defined) return "-";
    const KappaEstimate& e = cell.estimate;
    std::string s = format_percent(e.point);
    if (e.has_ci) s += "(" + format_percent(e.ci_low) + "," + format_percent(e.ci_high) + ")";
    return s;
}

StratifiedSample single_stratum_sample(const StratifiedSample& sample, int stratum) {
    std::vector<RatedItem> items;
    for (const RatedItem& it : sample.items())
        if (it.stratum == stratum) {
            RatedItem copy = it;
            copy.stratum = 1;
            items.push_back(copy);
        }
    DesignFrame frame({sample.frame().at(stratum)});
    return StratifiedSample(std::move(frame), sample.categories(), std::move(items));
}

}  // namespace

EstimateReport run_estimate(const RunConfig& config) {
    EstimateReport report;
    report.stamp = config_stamp(config, "estimate");

    if (config.variants.empty()) {
        std::cerr << "warning: empty variant set, nothing to estimate\n";
        return report;
    }
    if (config.data_path.empty()) throw SchemaError("estimate needs --data");

    RunContext ctx = resolve_context(config, true);
    IngestSpec spec{ctx.labels, ctx.frame, config.comparison, config.unknown_area,
                    config.frame_source == FrameSource::DataCounts};
    const StratifiedSample sample = ingest_csv(config.data_path, spec);

    // Series: requested variants on the whole population, then the V1-based
    // domain restrictions.
    struct Series {
        std::string name;
        Variant variant;
        DomainSel domain;
    };
    std::vector<Series> series;
    for (DomainSel d : config.domains) {
        if (d == DomainSel::All) {
            for (Variant v : config.variants) series.push_back({variant_name(v), v, d});
        } else {
            series.push_back({variant_name(Variant::V1) + "(" + domain_name(d) + ")", Variant::V1,
                              d});
        }
    }
    for (const Series& s : series) report.series.push_back(s.name);

    for (int h = 1; h <= sample.frame().strata(); ++h)
        report.areas.push_back(sample.frame().at(h).label);
    report.areas.push_back("All");

    const WeightMatrix plain_weights =
        ctx.weights.categories() == ctx.categories ? ctx.weights : extend_with_sentinel(ctx.weights);

    for (std::size_t row = 0; row < report.areas.size(); ++row) {
        const bool overall = row + 1 == report.areas.size();
        const StratifiedSample row_sample =
            overall ? sample : single_stratum_sample(sample, static_cast<int>(row) + 1);
        for (std::size_t col = 0; col < series.size(); ++col) {
            const Series& s = series[col];
            EstimateCell cell;
            cell.area = report.areas[row];
            cell.series = s.name;
            cell.variant = s.variant;
            cell.domain = s.domain;
            BootstrapConfig bs = config.bootstrap;
            bs.seed = rng::derive_seed(config.bootstrap.seed,
                                       (row + 1) * 1000 + col);
            std::optional<DomainTag> domain;
            if (s.domain == DomainSel::Dbr) domain = DomainTag::Dbr;
            if (s.domain == DomainSel::Ir) domain = DomainTag::Ir;
            const WeightMatrix& weights =
                s.variant == Variant::Plain ? plain_weights : ctx.weights;
            try {
                cell.estimate = bootstrap_ci(row_sample, weights, s.variant, domain, bs);
                cell.defined = true;
            } catch (const UndefinedCoefficient&) {
                cell.defined = false;
            } catch (const Error& e) {
                throw Error("area " + cell.area + ", " + s.name + ": " + e.what(),
                            e.exit_code());
            }
            report.cells.push_back(std::move(cell));
        }
    }

    if (config.out_dir.empty()) return report;

    const std::size_t cols = series.size();
    std::ostringstream tsv;
    tsv << stamp_block(report.stamp);
    tsv << "area\tseries\tvariant\tdomain\tn_effective\treplicates\tpoint\tci_low\tci_high\n";
    for (const EstimateCell& cell : report.cells) {
        tsv << cell.area << '\t' << cell.series << '\t' << variant_name(cell.variant) << '\t'
            << domain_name(cell.domain) << '\t' << cell.estimate.n_effective << '\t'
            << (cell.defined ? std::to_string(cell.estimate.replicates) : std::string("-")) << '\t';
        if (cell.defined)
            tsv << format_percent(cell.estimate.point) << '\t'
                << format_percent(cell.estimate.ci_low) << '\t'
                << format_percent(cell.estimate.ci_high) << '\n';
        else
            tsv << "-\t-\t-\n";
    }

    std::ostringstream txt;
    txt << stamp_block(report.stamp);
    const int width = 22;
    txt << "Area";
    for (std::size_t i = 4; i < 8; ++i) txt << ' ';
    for (const std::string& name : report.series) {
        txt << name;
        for (std::size_t i = name.size(); i < static_cast<std::size_t>(width); ++i) txt << ' ';
    }
    txt << '\n';
    for (std::size_t row = 0; row < report.areas.size(); ++row) {
        const std::string& area = report.areas[row];
        txt << area;
        for (std::size_t i = area.size(); i < 8; ++i) txt << ' ';
        for (std::size_t col = 0; col < cols; ++col) {
            const std::string text = cell_text(report.cells[row * cols + col]);
            txt << text;
            for (std::size_t i = text.size(); i < static_cast<std::size_t>(width); ++i) txt << ' ';
        }
        txt << '\n';
    }

    // the null-weight coefficient usually runs below the deletion one;
    // annotate rows that buck the tendency (it is not a theorem)
    std::ptrdiff_t col_v1 = -1, col_v3 = -1;
    for (std::size_t col = 0; col < cols; ++col) {
        if (report.series[col] == "kappa1") col_v1 = static_cast<std::ptrdiff_t>(col);
        if (report.series[col] == "kappa3") col_v3 = static_cast<std::ptrdiff_t>(col);
    }
    if (col_v1 >= 0 && col_v3 >= 0) {
        std::string exceptions;
        for (std::size_t row = 0; row < report.areas.size(); ++row) {
            const EstimateCell& v1 = report.cells[row * cols + static_cast<std::size_t>(col_v1)];
            const EstimateCell& v3 = report.cells[row * cols + static_cast<std::size_t>(col_v3)];
            if (v1.defined && v3.defined && v3.estimate.point > v1.estimate.point)
                exceptions += (exceptions.empty() ? "" : ", ") + report.areas[row];
        }
        if (!exceptions.empty())
            txt << "\nnote: kappa3 exceeds kappa1 for " << exceptions << '\n';
    }

    std::ostringstream bars;
    bars << stamp_block(report.stamp);
    bars << "area\tseries\tpoint\tlow\thigh\n";
    for (const EstimateCell& cell : report.cells) {
        if (!cell.defined) continue;
        bars << cell.area << '\t' << cell.series << '\t' << format_percent(cell.estimate.point)
             << '\t' << format_percent(cell.estimate.ci_low) << '\t'
             << format_percent(cell.estimate.ci_high) << '\n';
    }

    namespace fs = std::filesystem;
    write_file_atomic((fs::path(config.out_dir) / "estimates.tsv").string(), tsv.str());
    write_file_atomic((fs::path(config.out_dir) / "estimates.txt").string(), txt.str());
    write_file_atomic((fs::path(config.out_dir) / "errorbars.tsv").string(), bars.str());
    return report;
}

MissingTestReport run_missing_test(const RunConfig& config) {
    std::vector<std::int64_t> sizes, missing;
    std::vector<std::string> labels;

    if (!config.data_path.empty()) {
        RunConfig ingest_config = config;
        ingest_config.comparison = Comparison::BVsP;  // missing peer ratings live on the P side
        RunContext ctx = resolve_context(ingest_config, true);
        IngestSpec spec{ctx.labels, ctx.frame, Comparison::BVsP, config.unknown_area,
                        config.frame_source == FrameSource::DataCounts};
        const StratifiedSample sample = ingest_csv(config.data_path, spec);
        const MissingCounts counts = missing_counts(sample);
        sizes = counts.sample_sizes();
        missing = counts.missing();
        for (int h = 1; h <= sample.frame().strata(); ++h)
            labels.push_back(sample.frame().at(h).label);
    } else {
        if (config.exercise != ExerciseKind::Exp2)
            throw SchemaError("missing-test without --data is available only for EXP2");
        const MissingCounts counts = exp2_missing_counts();
        sizes = counts.sample_sizes();
        missing = counts.missing();
        const DesignFrame frame = exp2_frame();
        for (int h = 1; h <= frame.strata(); ++h) labels.push_back(frame.at(h).label);
    }

    MissingTestReport report{MissingCounts(sizes, missing), labels, 0.0, TestResult{},
                             0.0, 0.0, {}};
    report.stamp = config_stamp(config, "missing-test");
    report.statistic = chi2_statistic(report.counts);

    const std::int64_t y = report.counts.total_missing();
    const std::int64_t n = report.counts.total_sample();
    bool enumerated = false;
    if (y == 0 || y == n) {
        report.test = exact_pvalue_enum(report.counts);
        enumerated = true;
    } else {
        try {
            report.test = exact_pvalue_enum(report.counts);
            enumerated = true;
        } catch (const BudgetExceeded&) {
            report.test = exact_pvalue_mc(report.counts, config.bootstrap.replicates,
                                          config.bootstrap.seed, config.bootstrap.threads);
        }
    }
    report.log_bf = log_bayes_factor(report.counts);
    report.log10_bf = report.log_bf / std::log(10.0);

    if (!config.out_dir.empty()) {
        std::ostringstream tsv;
        tsv << stamp_block(report.stamp);
        tsv << "stratum\tn_h\tx_h\ttheta_hat\n";
        for (std::size_t h = 0; h < sizes.size(); ++h) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f",
                          static_cast<double>(missing[h]) / static_cast<double>(sizes[h]));
            tsv << labels[h] << '\t' << sizes[h] << '\t' << missing[h] << '\t' << buf << '\n';
        }
        char num[64];
        tsv << "statistic\t";
        std::snprintf(num, sizeof(num), "%.10g", report.statistic);
        tsv << num << '\n';
        tsv << "method\t" << (enumerated ? "enumeration" : "monte-carlo") << '\n';
        std::snprintf(num, sizeof(num), "%.10g", report.test.p_value);
        tsv << "p_value\t" << num << '\n';
        if (report.test.mc_std_error) {
            std::snprintf(num, sizeof(num), "%.10g", *report.test.mc_std_error);
            tsv << "mc_std_error\t" << num << '\n';
            tsv << "replicates\t" << *report.test.replicates << '\n';
            tsv << "exceedances\t" << report.test.exceedances << '\n';
        } else {
            tsv << "support_points\t" << report.test.support_points << '\n';
        }
        std::snprintf(num, sizeof(num), "%.10g", report.log_bf);
        tsv << "log_bf\t" << num << '\n';
        std::snprintf(num, sizeof(num), "%.10g", report.log10_bf);
        tsv << "log10_bf\t" << num << '\n';
        if (!report.test.note.empty()) tsv << "note\t" << report.test.note << '\n';

        std::ostringstream txt;
        txt << stamp_block(report.stamp);
        txt << "Homogeneity of missing proportions across strata\n\n";
        txt << "Stratum   n_h     x_h   theta_hat\n";
        for (std::size_t h = 0; h < sizes.size(); ++h) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%-8s %6lld %6lld   %.4f\n", labels[h].c_str(),
                          static_cast<long long>(sizes[h]), static_cast<long long>(missing[h]),
                          static_cast<double>(missing[h]) / static_cast<double>(sizes[h]));
            txt << buf;
        }
        txt << '\n';
        char buf[256];
        std::snprintf(buf, sizeof(buf), "statistic R      = %.6f\n", report.statistic);
        txt << buf;
        if (report.test.mc_std_error) {
            std::snprintf(buf, sizeof(buf),
                          "p-value          = %.6g (monte-carlo, %lld replicates, se %.3g, %lld "
                          "exceedances)\n",
                          report.test.p_value,
                          static_cast<long long>(report.test.replicates.value_or(0)),
                          *report.test.mc_std_error,
                          static_cast<long long>(report.test.exceedances));
        } else {
            std::snprintf(buf, sizeof(buf), "p-value          = %.6g (enumeration, %lld points)\n",
                          report.test.p_value,
                          static_cast<long long>(report.test.support_points));
        }
        txt << buf;
        std::snprintf(buf, sizeof(buf), "log BF(het/hom)  = %.4f   (log10 = %.4f)\n",
                      report.log_bf, report.log10_bf);
        txt << buf;
        if (!report.test.note.empty()) txt << "note: " << report.test.note << '\n';

        namespace fs = std::filesystem;
        write_file_atomic((fs::path(config.out_dir) / "missing_test.tsv").string(), tsv.str());
        write_file_atomic((fs::path(config.out_dir) / "missing_test.txt").string(), txt.str());
    }
    return report;
}

OracleReport run_oracle(const RunConfig& config) {
    if (config.data_path.empty()) throw SchemaError("oracle needs --data (a census file)");
    RunContext ctx = resolve_context(config, false);

    // A census file carries its own frame: every stratum is fully observed.
    const std::vector<RatingRecord> records = read_rating_records(config.data_path);
    std::vector<std::string> order;
    std::map<std::string, std::int64_t> counts;
    for (const RatingRecord& rec : records) {
        const std::string key = normalize_area(rec.area);
        if (counts.find(key) == counts.end()) order.push_back(trim(rec.area));
        ++counts[key];
    }
    if (order.empty()) throw SchemaError("census file has no data rows");
    std::vector<Stratum> strata;
    for (const std::string& label : order) {
        const std::int64_t n = counts[normalize_area(label)];
        std::string clean = normalize_area(label);
        strata.push_back({clean, n, n});
    }
    DesignFrame frame(std::move(strata));
    IngestSpec spec{ctx.labels, frame, config.comparison, config.unknown_area, false};
    const StratifiedSample census = ingest_csv(config.data_path, spec);
    const RatedPopulation population(frame.strata(), census.categories(),
                                     std::vector<RatedItem>(census.items()));

    OracleReport report;
    report.stamp = config_stamp(config, "oracle");
    for (int h = 1; h <= frame.strata(); ++h) report.areas.push_back(frame.at(h).label);
    report.areas.push_back("All");
    for (Variant v : config.variants) report.series.push_back(variant_name(v));

    const WeightMatrix plain_weights =
        ctx.weights.categories() == ctx.categories ? ctx.weights : extend_with_sentinel(ctx.weights);

    for (std::size_t row = 0; row < report.areas.size(); ++row) {
        std::vector<RatedItem> items;
        if (row + 1 == report.areas.size()) {
            items = population.items();
        } else {
            for (const RatedItem& it : population.items())
                if (it.stratum == static_cast<int>(row) + 1) {
                    RatedItem copy = it;
                    copy.stratum = 1;
                    items.push_back(copy);
                }
        }
        std::vector<std::string> row_values;
        const RatedPopulation subpop(row + 1 == report.areas.size() ? population.strata() : 1,
                                     population.categories(), std::move(items));
        for (Variant v : config.variants) {
            try {
                const double value =
                    v == Variant::Plain
                        ? population_kappa(subpop, plain_weights)
                        : population_kappa_variant(subpop, ctx.weights, v);
                row_values.push_back(format_percent(value));
            } catch (const Error&) {
                row_values.push_back("-");
            }
        }
        report.values.push_back(std::move(row_values));
    }

    if (!config.out_dir.empty()) {
        std::ostringstream tsv;
        tsv << stamp_block(report.stamp);
        tsv << "area";
        for (const std::string& s : report.series) tsv << '\t' << s;
        tsv << '\n';
        for (std::size_t row = 0; row < report.areas.size(); ++row) {
            tsv << report.areas[row];
            for (const std::string& v : report.values[row]) tsv << '\t' << v;
            tsv << '\n';
        }
        std::ostringstream txt;
        txt << stamp_block(report.stamp);
        txt << "Population coefficients (census)\n\n";
        txt << "Area    ";
        for (const std::string& s : report.series) {
            txt << s;
            for (std::size_t i = s.size(); i < 12; ++i) txt << ' ';
        }
        txt << '\n';
        for (std::size_t row = 0; row < report.areas.size(); ++row) {
            txt << report.areas[row];
            for (std::size_t i = report.areas[row].size(); i < 8; ++i) txt << ' ';
            for (const std::string& v : report.values[row]) {
                txt << v;
                for (std::size_t i = v.size(); i < 12; ++i) txt << ' ';
            }
            txt << '\n';
        }
        namespace fs = std::filesystem;
        write_file_atomic((fs::path(config.out_dir) / "oracle.tsv").string(), tsv.str());
        write_file_atomic((fs::path(config.out_dir) / "oracle.txt").string(), txt.str());
    }
    return report;
}

McStudyReport run_simulate(const RunConfig& config, const SimulateOptions& options) {
    const int strata = static_cast<int>(options.model.stratum_sizes.size());
    if (static_cast<int>(options.sample_sizes.size()) != strata)
        throw DesignError("invalid-design: one sample size per stratum required");
    std::vector<Stratum> frame_strata;
    for (int h = 0; h < strata; ++h)
        frame_strata.push_back({std::to_string(h + 1), options.model.stratum_sizes[static_cast<std::size_t>(h)],
                                options.sample_sizes[static_cast<std::size_t>(h)]});
    DesignFrame frame(std::move(frame_strata));

    RunContext ctx = resolve_context(config, false);
    const int definite = static_cast<int>(ctx.labels.size());
    if (options.model.categories != definite + 1)
        throw InvalidInput("model categories must match the exercise alphabet plus sentinel");

    McStudyConfig study = options.study;
    study.bootstrap = config.bootstrap;
    study.seed = config.bootstrap.seed;
    study.threads = config.bootstrap.threads;

    const WeightMatrix plain_weights =
        ctx.weights.categories() == options.model.categories ? ctx.weights
                                                             : extend_with_sentinel(ctx.weights);
    const WeightMatrix& weights =
        study.variant == Variant::Plain ? plain_weights : ctx.weights;

    const McStudyReport report = mc_study(options.model, frame, weights, study);

    if (!config.out_dir.empty()) {
        std::vector<std::string> stamp = config_stamp(config, "simulate");
        stamp.push_back("runs=" + std::to_string(study.runs));
        stamp.push_back("study_variant=" + variant_name(study.variant));

        char num[64];
        std::ostringstream tsv;
        tsv << stamp_block(stamp);
        std::snprintf(num, sizeof(num), "%.10f", report.true_kappa);
        tsv << "# true_kappa=" << num << '\n';
        tsv << "run\tdefined\testimate\tci_low\tci_high\tcovered\n";
        for (std::size_t r = 0; r < report.runs.size(); ++r) {
            const McStudyRun& run = report.runs[r];
            tsv << (r + 1) << '\t' << (run.defined ? 1 : 0) << '\t';
            if (run.defined) {
                tsv << format_percent(run.estimate) << '\t' << format_percent(run.ci_low) << '\t'
                    << format_percent(run.ci_high) << '\t' << (run.covered ? 1 : 0) << '\n';
            } else {
                tsv << "-\t-\t-\t-\n";
            }
        }

        std::ostringstream txt;
        txt << stamp_block(stamp);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "true kappa      = %s\n",
                      format_percent(report.true_kappa).c_str());
        txt << buf;
        std::snprintf(buf, sizeof(buf), "defined runs    = %d / %zu\n", report.defined_runs,
                      report.runs.size());
        txt << buf;
        std::snprintf(buf, sizeof(buf), "mean estimate   = %s\n",
                      format_percent(report.mean_estimate).c_str());
        txt << buf;
        std::snprintf(buf, sizeof(buf), "bias            = %.4f pp\n", report.bias * 100.0);
        txt << buf;
        std::snprintf(buf, sizeof(buf), "coverage        = %.4f\n", report.coverage);
        txt << buf;
        std::snprintf(buf, sizeof(buf), "mean CI width   = %.4f pp\n",
                      report.mean_ci_width * 100.0);
        txt << buf;

        namespace fs = std::filesystem;
        write_file_atomic((fs::path(config.out_dir) / "study.tsv").string(), tsv.str());
        write_file_atomic((fs::path(config.out_dir) / "study.txt").string(), txt.str());
    }
    return report;
}

}  // namespace dkappa
