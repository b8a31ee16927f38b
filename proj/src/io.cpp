#include "nlrt/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nlrt/baselines.hpp"
#include "nlrt/datagen.hpp"
#include "nlrt/metrics.hpp"
#include "nlrt/solver.hpp"

namespace nlrt {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'R', 'T'};
constexpr std::uint16_t kVersion = 1;

// The format is little-endian by definition; this code assumes a
// little-endian host, which covers every supported target.
template <typename T>
void write_pod(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T value{};
    if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw DataError(std::string("tensor file: truncated ") + what);
    }
    return value;
}

}  // namespace

DenseTensor read_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open tensor file: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("tensor file: bad magic in " + path);
    }
    const auto version = read_pod<std::uint16_t>(is, "version");
    if (version != kVersion) {
        throw DataError("tensor file: unsupported version " + std::to_string(version));
    }
    const auto dtype = read_pod<std::uint8_t>(is, "dtype");
    if (dtype > 1) throw DataError("tensor file: unsupported dtype " + std::to_string(dtype));
    const auto ndim = read_pod<std::uint8_t>(is, "ndim");
    if (ndim == 0) throw DataError("tensor file: ndim must be >= 1");
    std::vector<std::size_t> dims(ndim);
    for (auto& d : dims) {
        d = static_cast<std::size_t>(read_pod<std::uint64_t>(is, "dims"));
        if (d == 0) throw DataError("tensor file: zero dimension");
    }
    const Shape shape(dims);
    std::vector<double> data(shape.num_elements());
    if (dtype == 0) {
        if (!is.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(data.size() * sizeof(double)))) {
            throw DataError("tensor file: truncated payload in " + path);
        }
    } else {
        std::vector<float> raw(shape.num_elements());
        if (!is.read(reinterpret_cast<char*>(raw.data()),
                     static_cast<std::streamsize>(raw.size() * sizeof(float)))) {
            throw DataError("tensor file: truncated payload in " + path);
        }
        std::copy(raw.begin(), raw.end(), data.begin());  // exact widening
    }
    return DenseTensor(shape, std::move(data));
}

void write_tensor(const std::string& path, const DenseTensor& t) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("cannot open for write: " + tmp.string());
        os.write(kMagic, 4);
        write_pod(os, kVersion);
        write_pod(os, static_cast<std::uint8_t>(0));  // f64
        write_pod(os, static_cast<std::uint8_t>(t.order()));
        for (std::size_t d : t.shape().dims()) {
            write_pod(os, static_cast<std::uint64_t>(d));
        }
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.num_elements() * sizeof(double)));
        if (!os) throw DataError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

DenseTensor import_raw(const std::string& path, const Shape& shape, RawDtype dtype,
                       bool normalize, bool clamp_negatives) {
    namespace fs = std::filesystem;
    std::error_code ec;
    const auto actual = fs::file_size(path, ec);
    if (ec) throw DataError("cannot stat raw file: " + path);
    const std::size_t value_size = (dtype == RawDtype::f64) ? 8 : 4;
    const std::uintmax_t expected =
        static_cast<std::uintmax_t>(shape.num_elements()) * value_size;
    if (actual != expected) {
        throw DataError("raw import: size mismatch for " + path + ": expected " +
                        std::to_string(expected) + " bytes, found " + std::to_string(actual));
    }
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open raw file: " + path);
    std::vector<double> data(shape.num_elements());
    if (dtype == RawDtype::f64) {
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
    } else {
        std::vector<float> raw(shape.num_elements());
        is.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(raw.size() * sizeof(float)));
        std::copy(raw.begin(), raw.end(), data.begin());
    }
    if (!is) throw DataError("raw import: read failed for " + path);
    for (double& v : data) {
        if (v < 0.0) {
            if (!clamp_negatives) {
                throw DataError("raw import: negative value without --clamp in " + path);
            }
            v = 0.0;
        }
    }
    if (normalize) {
        const double max_value = *std::max_element(data.begin(), data.end());
        if (max_value <= 0.0) throw DataError("raw import: cannot normalize all-zero data");
        for (double& v : data) v /= max_value;
    }
    return DenseTensor(shape, std::move(data));
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw DataError("cannot open for write: " + tmp.string());
        os << content;
        if (!os) throw DataError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

struct TrialOutcome {
    double rel_err;
    double seconds;
    double iterations;
};

BenchRow summarize(const std::string& method, double snr_db,
                   const std::vector<TrialOutcome>& outcomes) {
    BenchRow row;
    row.method = method;
    row.snr_db = snr_db;
    row.trial_count = outcomes.size();
    double err_sum = 0.0, sec_sum = 0.0, iter_sum = 0.0;
    for (const TrialOutcome& o : outcomes) {
        err_sum += o.rel_err;
        sec_sum += o.seconds;
        iter_sum += o.iterations;
    }
    const double n = static_cast<double>(outcomes.size());
    row.rel_err_mean = err_sum / n;
    row.seconds_mean = sec_sum / n;
    row.iterations_mean = iter_sum / n;
    double var = 0.0;
    for (const TrialOutcome& o : outcomes) {
        const double d = o.rel_err - row.rel_err_mean;
        var += d * d;
    }
    row.rel_err_std = outcomes.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return row;
}

bool method_known(const std::string& m) {
    return m == "nlrt" || m == "ntd-mu" || m == "ntd-hals" || m == "ncpd-mu" ||
           m == "ncpd-hals";
}

}  // namespace

std::vector<BenchRow> run_bench(const ExperimentSpec& spec) {
    std::vector<std::string> methods = spec.methods;
    if (methods.empty()) {
        methods = {"nlrt", "ntd-mu", "ntd-hals", "ncpd-mu", "ncpd-hals"};
    }
    for (const std::string& m : methods) {
        if (!method_known(m)) throw DataError("run_bench: unknown method '" + m + "'");
    }

    // Ground truth / input tensor per the case tag.
    DenseTensor truth;
    switch (spec.data_case) {
        case CaseTag::case1:
            truth = case1_ground_truth(spec.shape, spec.ranks, spec.seed);
            break;
        case CaseTag::case2:
            truth = case2_random(spec.shape, spec.seed);
            break;
        case CaseTag::file:
            truth = read_tensor(spec.input_path);
            break;
    }

    std::vector<std::size_t> cp_candidates = spec.cp_rank_candidates;
    if (cp_candidates.empty()) {
        cp_candidates = {spec.ranks.product(), spec.ranks.sum(), spec.ranks.max()};
    }

    std::vector<double> snrs = spec.snr_db;
    const bool noise_free = snrs.empty();
    if (noise_free) snrs.push_back(std::numeric_limits<double>::quiet_NaN());

    std::vector<BenchRow> rows;
    using clock = std::chrono::steady_clock;
    for (double snr : snrs) {
        const DenseTensor input =
            noise_free ? truth
                       : add_noise_snr(truth, snr, spec.seed + 0x9e37, spec.noise_model);
        const double snr_field = noise_free ? 0.0 : snr;

        for (const std::string& method : methods) {
            std::vector<TrialOutcome> outcomes;
            if (method == "nlrt") {
                SolverConfig cfg;
                cfg.ranks = spec.ranks;
                cfg.tol = spec.tol;
                cfg.max_iters = spec.max_iters;
                cfg.threads = spec.threads;
                const auto t0 = clock::now();
                SolverResult res = nlrt_approximate(input, cfg);
                const double secs = std::chrono::duration<double>(clock::now() - t0).count();
                outcomes.push_back({rel_error(res.approximation, truth), secs,
                                    static_cast<double>(res.iterations)});
            } else if (method == "ntd-mu" || method == "ntd-hals") {
                for (std::size_t trial = 0; trial < spec.trials; ++trial) {
                    BaselineConfig cfg;
                    cfg.tol = spec.tol;
                    cfg.max_iters = spec.max_iters;
                    cfg.seed = spec.seed + 1000 + trial;
                    const auto t0 = clock::now();
                    NtdResult res = method == "ntd-mu" ? ntd_mu(input, spec.ranks, cfg)
                                                       : ntd_hals(input, spec.ranks, cfg);
                    const double secs =
                        std::chrono::duration<double>(clock::now() - t0).count();
                    outcomes.push_back({rel_error(reconstruct_tucker(res.factors), truth),
                                        secs, static_cast<double>(res.trace.iterations)});
                }
            } else {
                // NCPD: per trial, report the best error over the CP rank candidates.
                for (std::size_t trial = 0; trial < spec.trials; ++trial) {
                    BaselineConfig cfg;
                    cfg.tol = spec.tol;
                    cfg.max_iters = spec.max_iters;
                    cfg.seed = spec.seed + 2000 + trial;
                    double best_err = std::numeric_limits<double>::infinity();
                    double secs_total = 0.0;
                    double iters_best = 0.0;
                    for (std::size_t z : cp_candidates) {
                        const auto t0 = clock::now();
                        CpResult res = method == "ncpd-mu" ? ncpd_mu(input, z, cfg)
                                                           : ncpd_hals(input, z, cfg);
                        secs_total +=
                            std::chrono::duration<double>(clock::now() - t0).count();
                        const double err = rel_error(reconstruct_cp(res.factors), truth);
                        if (err < best_err) {
                            best_err = err;
                            iters_best = static_cast<double>(res.trace.iterations);
                        }
                    }
                    outcomes.push_back({best_err, secs_total, iters_best});
                }
            }
            rows.push_back(summarize(method, snr_field, outcomes));
        }
    }
    return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "method,snr_db,trial_count,rel_err_mean,rel_err_std,seconds_mean,"
          "iterations_mean\n";
    for (const BenchRow& r : rows) {
        os << r.method << ',' << format_double(r.snr_db) << ',' << r.trial_count << ','
           << format_double(r.rel_err_mean) << ',' << format_double(r.rel_err_std) << ','
           << format_double(r.seconds_mean) << ',' << format_double(r.iterations_mean)
           << '\n';
    }
    write_text_atomic(path, os.str());
}

}  // namespace nlrt
