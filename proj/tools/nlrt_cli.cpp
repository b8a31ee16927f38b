// Command-line front end: synth / approx / bench / features / classify /
// convert. Exit 0 on success, 1 on usage errors, 2 on data errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlrt/analysis.hpp"
#include "nlrt/baselines.hpp"
#include "nlrt/datagen.hpp"
#include "nlrt/io.hpp"
#include "nlrt/metrics.hpp"
#include "nlrt/solver.hpp"

namespace {

using namespace nlrt;

Shape to_shape(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw CLI::ValidationError("--shape", "at least one dimension required");
    return Shape(dims);
}

RankVector to_ranks(const std::vector<std::size_t>& r) {
    if (r.empty()) throw CLI::ValidationError("--rank", "at least one rank required");
    return RankVector{r};
}

std::size_t resolve_threads(std::size_t flag_value, bool flag_set) {
    if (flag_set) return flag_value;
    if (const char* env = std::getenv("NLRT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return 1;
}

bool placeholder_method(const std::string& m) {
    return m == "ntd-bcd" || m == "ntd-apg" || m == "ncpd-bcd" || m == "ncpd-apg" ||
           m == "ncpd-cdtf" || m == "ncpd-sacd";
}

DenseTensor reconstruct_for(const std::string& method, const DenseTensor& input,
                            const RankVector& ranks, std::size_t cp_rank,
                            const BaselineConfig& bcfg, BaselineTrace* trace_out) {
    if (method == "ntd-mu" || method == "ntd-hals") {
        NtdResult res =
            method == "ntd-mu" ? ntd_mu(input, ranks, bcfg) : ntd_hals(input, ranks, bcfg);
        if (trace_out) *trace_out = res.trace;
        return reconstruct_tucker(res.factors);
    }
    CpResult res =
        method == "ncpd-mu" ? ncpd_mu(input, cp_rank, bcfg) : ncpd_hals(input, cp_rank, bcfg);
    if (trace_out) *trace_out = res.trace;
    return reconstruct_cp(res.factors);
}

// ---- subcommand bodies ----

struct SynthArgs {
    std::string kind;
    std::vector<std::size_t> shape;
    std::vector<std::size_t> rank;
    Seed seed = 1;
    std::optional<double> snr_db;
    std::string noise_model = "gaussian";
    std::string out;
};

NoiseModel parse_noise_model(const std::string& name) {
    if (name == "gaussian") return NoiseModel::gaussian_clip;
    if (name == "uniform") return NoiseModel::uniform;
    throw CLI::ValidationError("--noise-model", "expected gaussian or uniform");
}

void run_synth(const SynthArgs& a) {
    const Shape shape = to_shape(a.shape);
    DenseTensor t;
    if (a.kind == "case1") {
        t = case1_ground_truth(shape, to_ranks(a.rank), a.seed);
    } else if (a.kind == "case2") {
        t = case2_random(shape, a.seed);
    } else {
        t = feasible_point(shape, to_ranks(a.rank), a.seed);
    }
    if (a.snr_db) {
        t = add_noise_snr(t, *a.snr_db, a.seed + 0x9e37, parse_noise_model(a.noise_model));
    }
    write_tensor(a.out, t);
    std::cout << "wrote " << a.out << " shape " << shape.to_string() << "\n";
}

struct ApproxArgs {
    std::string method;
    std::string in;
    std::vector<std::size_t> rank;
    std::size_t cp_rank = 0;
    double tol = 1e-5;
    std::size_t max_iters = 5000;
    std::size_t threads = 1;
    bool threads_set = false;
    Seed seed = 1;
    std::string out;
    std::string trace_path;
};

void run_approx(const ApproxArgs& a) {
    const DenseTensor input = read_tensor(a.in);
    DenseTensor approx;
    std::ostringstream trace;
    std::size_t iterations = 0;
    bool converged = false;

    if (a.method == "nlrt") {
        SolverConfig cfg;
        cfg.ranks = to_ranks(a.rank);
        cfg.tol = a.tol;
        cfg.max_iters = a.max_iters;
        cfg.threads = resolve_threads(a.threads, a.threads_set);
        SolverResult res = nlrt_approximate(input, cfg);
        approx = std::move(res.approximation);
        iterations = res.iterations;
        converged = res.converged;
        trace << "iteration,rel_change,inter_set_distance,objective\n";
        for (const TraceEntry& e : res.trace.entries) {
            trace << e.iteration << ',' << format_double(e.rel_change) << ','
                  << format_double(e.inter_set_distance) << ','
                  << format_double(e.objective) << '\n';
        }
    } else {
        BaselineConfig bcfg;
        bcfg.tol = a.tol;
        bcfg.max_iters = a.max_iters;
        bcfg.seed = a.seed;
        RankVector ranks;
        if (a.method == "ntd-mu" || a.method == "ntd-hals") ranks = to_ranks(a.rank);
        if ((a.method == "ncpd-mu" || a.method == "ncpd-hals") && a.cp_rank == 0) {
            throw CLI::ValidationError("--cp-rank", "required for CP methods");
        }
        BaselineTrace bt;
        approx = reconstruct_for(a.method, input, ranks, a.cp_rank, bcfg, &bt);
        iterations = bt.iterations;
        converged = bt.converged;
        trace << "iteration,objective\n";
        for (std::size_t i = 0; i < bt.objective.size(); ++i) {
            trace << (i + 1) << ',' << format_double(bt.objective[i]) << '\n';
        }
    }

    std::cout << "method " << a.method << " iterations " << iterations << " converged "
              << (converged ? "yes" : "no") << "\nrel error "
              << format_double(rel_error(approx, input)) << "\n";
    if (!a.out.empty()) write_tensor(a.out, approx);
    if (!a.trace_path.empty()) write_text_atomic(a.trace_path, trace.str());
}

struct BenchArgs {
    std::string data_case = "case1";
    std::string in;
    std::vector<std::size_t> shape;
    std::vector<std::size_t> rank;
    std::vector<std::size_t> cp_ranks;
    std::vector<double> snr_db;
    std::string noise_model = "uniform";
    std::size_t trials = 10;
    Seed seed = 1;
    std::vector<std::string> methods;
    std::size_t max_iters = 500;
    double tol = 1e-5;
    std::size_t threads = 1;
    bool threads_set = false;
    std::string out;
};

void run_bench_cmd(const BenchArgs& a) {
    ExperimentSpec spec;
    if (a.data_case == "case1") {
        spec.data_case = CaseTag::case1;
    } else if (a.data_case == "case2") {
        spec.data_case = CaseTag::case2;
    } else if (a.data_case == "file") {
        spec.data_case = CaseTag::file;
        if (a.in.empty()) throw CLI::ValidationError("--in", "required with --case file");
        spec.input_path = a.in;
    } else {
        throw CLI::ValidationError("--case", "expected case1, case2, or file");
    }
    if (spec.data_case == CaseTag::file) {
        spec.shape = read_tensor(a.in).shape();
    } else {
        spec.shape = to_shape(a.shape);
    }
    spec.ranks = to_ranks(a.rank);
    spec.ranks.validate(spec.shape);
    spec.cp_rank_candidates = a.cp_ranks;
    spec.snr_db = a.snr_db;
    spec.noise_model = parse_noise_model(a.noise_model);
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.max_iters = a.max_iters;
    spec.tol = a.tol;
    spec.threads = resolve_threads(a.threads, a.threads_set);
    for (const std::string& m : a.methods) {
        if (placeholder_method(m)) {
            std::cout << m << ": not implemented\n";
        } else {
            spec.methods.push_back(m);
        }
    }
    if (!a.methods.empty() && spec.methods.empty()) {
        std::cout << "no implemented methods requested\n";
        return;
    }
    const std::vector<BenchRow> rows = run_bench(spec);
    if (!a.out.empty()) write_bench_csv(a.out, rows);
    for (const BenchRow& r : rows) {
        std::cout << r.method << " snr " << format_double(r.snr_db) << " rel_err "
                  << format_double(r.rel_err_mean) << " +- "
                  << format_double(r.rel_err_std) << "\n";
    }
}

struct FeaturesArgs {
    std::string in;
    std::vector<std::string> methods{"nlrt", "ntd-hals", "ncpd-hals"};
    std::vector<std::size_t> rank;
    std::size_t cp_rank = 0;
    std::size_t mode = 2;
    std::size_t count = 0;
    double tol = 1e-5;
    std::size_t max_iters = 500;
    std::size_t threads = 1;
    bool threads_set = false;
    Seed seed = 1;
    std::string out;
};

void run_features(const FeaturesArgs& a) {
    const DenseTensor input = read_tensor(a.in);
    const RankVector ranks = to_ranks(a.rank);
    ranks.validate(input.shape());
    if (a.mode >= input.order()) throw CLI::ValidationError("--mode", "mode out of range");

    std::vector<ResidualCurve> curves;
    for (const std::string& method : a.methods) {
        if (method == "nlrt") {
            SolverConfig cfg;
            cfg.ranks = ranks;
            cfg.tol = a.tol;
            cfg.max_iters = a.max_iters;
            cfg.threads = resolve_threads(a.threads, a.threads_set);
            SolverResult res = nlrt_approximate(input, cfg);
            const std::size_t count = a.count ? a.count : res.mode_factors[a.mode].rank;
            curves.push_back(residual_curve_nlrt(input, res, a.mode, count));
        } else if (method == "ntd-mu" || method == "ntd-hals") {
            BaselineConfig bcfg;
            bcfg.tol = a.tol;
            bcfg.max_iters = a.max_iters;
            bcfg.seed = a.seed;
            NtdResult res = method == "ntd-mu" ? ntd_mu(input, ranks, bcfg)
                                               : ntd_hals(input, ranks, bcfg);
            const std::size_t count = a.count ? a.count : ranks.ranks[a.mode];
            curves.push_back(residual_curve_ntd(input, res.factors, a.mode, count));
            curves.back().method = method;
        } else if (method == "ncpd-mu" || method == "ncpd-hals") {
            if (a.cp_rank == 0) {
                throw CLI::ValidationError("--cp-rank", "required for CP methods");
            }
            BaselineConfig bcfg;
            bcfg.tol = a.tol;
            bcfg.max_iters = a.max_iters;
            bcfg.seed = a.seed;
            CpResult res = method == "ncpd-mu" ? ncpd_mu(input, a.cp_rank, bcfg)
                                               : ncpd_hals(input, a.cp_rank, bcfg);
            const std::size_t count = a.count ? a.count : a.cp_rank;
            curves.push_back(residual_curve_ncpd(input, res.factors, count));
            curves.back().method = method;
        } else if (placeholder_method(method)) {
            std::cout << method << ": not implemented\n";
        } else {
            throw CLI::ValidationError("--methods", "unknown method '" + method + "'");
        }
    }

    std::ostringstream csv;
    csv << "method,component_count,residual\n";
    for (const ResidualCurve& c : curves) {
        for (std::size_t i = 0; i < c.residuals.size(); ++i) {
            csv << c.method << ',' << c.component_counts[i] << ','
                << format_double(c.residuals[i]) << '\n';
        }
    }
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        write_text_atomic(a.out, csv.str());
        std::cout << "wrote " << a.out << "\n";
    }
}

Matrix read_features_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open features file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("features csv: ragged row in " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("features csv: empty file " + path);
    Matrix out(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
    }
    return out;
}

std::vector<int> read_labels_csv(const std::string& path, std::size_t pixel_count) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open labels file: " + path);
    std::vector<int> labels(pixel_count, -1);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("labels csv: expected pixel,class");
        const std::size_t pixel = static_cast<std::size_t>(std::stoull(line.substr(0, comma)));
        if (pixel >= pixel_count) {
            throw DataError("labels csv: pixel index " + std::to_string(pixel) +
                            " out of range");
        }
        labels[pixel] = std::stoi(line.substr(comma + 1));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            throw DataError("labels csv: missing label for pixel " + std::to_string(i));
        }
    }
    return labels;
}

struct ClassifyArgs {
    std::string features_path;
    std::string labels_path;
    std::size_t per_class = 10;
    std::vector<std::size_t> ks{1, 3, 5};
    Seed seed = 1;
    std::string out;
};

void run_classify(const ClassifyArgs& a) {
    const Matrix features = read_features_csv(a.features_path);
    const std::vector<int> labels = read_labels_csv(a.labels_path, features.rows());
    const LabeledPixels data = split_per_class(features, labels, a.per_class, a.seed);
    std::ostringstream csv;
    csv << "k,accuracy\n";
    for (std::size_t k : a.ks) {
        const double acc = knn_classify(data, k);
        csv << k << ',' << format_double(acc) << '\n';
        std::cout << k << "-nn accuracy " << format_double(acc) << "\n";
    }
    if (!a.out.empty()) write_text_atomic(a.out, csv.str());
}

struct ConvertArgs {
    std::string in;
    std::string out;
    std::vector<std::size_t> shape;
    std::string dtype = "f64";
    bool normalize = false;
    bool clamp = false;
    bool to_raw = false;
};

void run_convert(const ConvertArgs& a) {
    if (a.dtype != "f64" && a.dtype != "f32") {
        throw CLI::ValidationError("--dtype", "expected f64 or f32");
    }
    if (a.to_raw) {
        const DenseTensor t = read_tensor(a.in);
        std::ofstream os(a.out, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("cannot open for write: " + a.out);
        if (a.dtype == "f64") {
            os.write(reinterpret_cast<const char*>(t.data()),
                     static_cast<std::streamsize>(t.num_elements() * sizeof(double)));
        } else {
            std::vector<float> raw(t.values().begin(), t.values().end());
            os.write(reinterpret_cast<const char*>(raw.data()),
                     static_cast<std::streamsize>(raw.size() * sizeof(float)));
        }
        if (!os) throw DataError("write failed: " + a.out);
        std::cout << "wrote raw " << a.out << "\n";
    } else {
        const DenseTensor t =
            import_raw(a.in, to_shape(a.shape),
                       a.dtype == "f64" ? RawDtype::f64 : RawDtype::f32, a.normalize,
                       a.clamp);
        write_tensor(a.out, t);
        std::cout << "wrote " << a.out << " shape " << t.shape().to_string() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonnegative low multilinear-rank tensor approximation toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic tensor file");
    synth_cmd->add_option("kind", synth.kind, "case1 | case2 | feasible")
        ->check(CLI::IsMember({"case1", "case2", "feasible"}))
        ->required();
    synth_cmd->add_option("--shape", synth.shape)->delimiter(',')->required();
    synth_cmd->add_option("--rank", synth.rank)->delimiter(',');
    synth_cmd->add_option("--seed", synth.seed);
    double synth_snr = 0.0;
    CLI::Option* snr_opt = synth_cmd->add_option("--snr-db", synth_snr);
    synth_cmd->add_option("--noise-model", synth.noise_model)
        ->check(CLI::IsMember({"gaussian", "uniform"}));
    synth_cmd->add_option("--out", synth.out)->required();

    ApproxArgs approx;
    CLI::App* approx_cmd = app.add_subcommand("approx", "Approximate a tensor file");
    approx_cmd->add_option("method", approx.method)
        ->check(CLI::IsMember({"nlrt", "ntd-mu", "ntd-hals", "ncpd-mu", "ncpd-hals"}))
        ->required();
    approx_cmd->add_option("--in", approx.in)->required();
    approx_cmd->add_option("--rank", approx.rank)->delimiter(',');
    approx_cmd->add_option("--cp-rank", approx.cp_rank);
    approx_cmd->add_option("--tol", approx.tol);
    approx_cmd->add_option("--max-iters", approx.max_iters);
    CLI::Option* approx_threads = approx_cmd->add_option("--threads", approx.threads);
    approx_cmd->add_option("--seed", approx.seed);
    approx_cmd->add_option("--out", approx.out);
    approx_cmd->add_option("--trace", approx.trace_path);

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark to CSV");
    bench_cmd->add_option("--case", bench.data_case);
    bench_cmd->add_option("--in", bench.in);
    bench_cmd->add_option("--shape", bench.shape)->delimiter(',');
    bench_cmd->add_option("--rank", bench.rank)->delimiter(',')->required();
    bench_cmd->add_option("--cp-rank", bench.cp_ranks)->delimiter(',');
    bench_cmd->add_option("--snr-db", bench.snr_db)->delimiter(',');
    bench_cmd->add_option("--noise-model", bench.noise_model)
        ->check(CLI::IsMember({"gaussian", "uniform"}));
    bench_cmd->add_option("--trials", bench.trials);
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--methods", bench.methods)->delimiter(',');
    bench_cmd->add_option("--max-iters", bench.max_iters);
    bench_cmd->add_option("--tol", bench.tol);
    CLI::Option* bench_threads = bench_cmd->add_option("--threads", bench.threads);
    bench_cmd->add_option("--out", bench.out);

    FeaturesArgs features;
    CLI::App* features_cmd = app.add_subcommand("features", "Residual-curve CSVs");
    features_cmd->add_option("--in", features.in)->required();
    features_cmd->add_option("--methods", features.methods)->delimiter(',');
    features_cmd->add_option("--rank", features.rank)->delimiter(',')->required();
    features_cmd->add_option("--cp-rank", features.cp_rank);
    features_cmd->add_option("--mode", features.mode);
    features_cmd->add_option("--count", features.count);
    features_cmd->add_option("--tol", features.tol);
    features_cmd->add_option("--max-iters", features.max_iters);
    CLI::Option* features_threads = features_cmd->add_option("--threads", features.threads);
    features_cmd->add_option("--seed", features.seed);
    features_cmd->add_option("--out", features.out);

    ClassifyArgs classify;
    CLI::App* classify_cmd = app.add_subcommand("classify", "k-NN accuracy from CSVs");
    classify_cmd->add_option("--features", classify.features_path)->required();
    classify_cmd->add_option("--labels", classify.labels_path)->required();
    classify_cmd->add_option("--per-class", classify.per_class);
    classify_cmd->add_option("--k", classify.ks)->delimiter(',');
    classify_cmd->add_option("--seed", classify.seed);
    classify_cmd->add_option("--out", classify.out);

    ConvertArgs convert;
    CLI::App* convert_cmd = app.add_subcommand("convert", "Raw <-> tensor file");
    convert_cmd->add_option("--in", convert.in)->required();
    convert_cmd->add_option("--out", convert.out)->required();
    convert_cmd->add_option("--shape", convert.shape)->delimiter(',');
    convert_cmd->add_option("--dtype", convert.dtype);
    convert_cmd->add_flag("--normalize", convert.normalize);
    convert_cmd->add_flag("--clamp", convert.clamp);
    convert_cmd->add_flag("--to-raw", convert.to_raw);

    try {
        app.parse(argc, argv);
        if (snr_opt->count() > 0) synth.snr_db = synth_snr;
        approx.threads_set = approx_threads->count() > 0;
        bench.threads_set = bench_threads->count() > 0;
        features.threads_set = features_threads->count() > 0;

        if (synth_cmd->parsed()) run_synth(synth);
        if (approx_cmd->parsed()) run_approx(approx);
        if (bench_cmd->parsed()) run_bench_cmd(bench);
        if (features_cmd->parsed()) run_features(features);
        if (classify_cmd->parsed()) run_classify(classify);
        if (convert_cmd->parsed()) run_convert(convert);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
