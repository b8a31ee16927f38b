#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlrt/datagen.hpp"
#include "nlrt/projections.hpp"
#include "nlrt/tensor.hpp"

namespace nlrt {

/// Errors from file parsing/validation (maps to CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RawDtype : std::uint8_t { f64 = 0, f32 = 1 };

/// Binary tensor container: magic "NLRT", u16 version (= 1), u8 dtype
/// (0 = f64, 1 = f32), u8 ndim, ndim x u64 dims, column-major payload.
/// Everything little-endian. f64 round trips are bit-exact; f32 payloads are
/// widened on read.
DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& t);

/// Raw headerless import: column-major values of the given dtype and shape.
/// With `normalize`, divides by the max so it becomes exactly 1. Negative
/// values are rejected unless `clamp_negatives` clips them to 0.
DenseTensor import_raw(const std::string& path, const Shape& shape, RawDtype dtype,
                       bool normalize, bool clamp_negatives);

enum class CaseTag { case1, case2, file };

struct ExperimentSpec {
    CaseTag data_case = CaseTag::case1;
    std::string input_path;  // for CaseTag::file
    Shape shape;
    RankVector ranks;
    std::vector<std::size_t> cp_rank_candidates;  // empty = {prod, sum, max}
    std::vector<double> snr_db;                   // empty = single noise-free run
    // uniform reproduces the published Case 1 table; see NoiseModel.
    NoiseModel noise_model = NoiseModel::uniform;
    std::size_t trials = 10;
    Seed seed = 1;
    std::vector<std::string> methods;  // nlrt, ntd-mu, ntd-hals, ncpd-mu, ncpd-hals
    std::size_t max_iters = 5000;
    double tol = 1e-5;
    std::size_t threads = 1;
    std::string output_path;
};

struct BenchRow {
    std::string method;
    double snr_db;
    std::size_t trial_count;
    double rel_err_mean;
    double rel_err_std;
    double seconds_mean;
    double iterations_mean;
};

/// Runs the spec: one row per (method, SNR). Baselines average over
/// `trials` seeded random initializations on the seed-fixed noisy tensor;
/// the alternating-projections method is deterministic and runs once.
std::vector<BenchRow> run_bench(const ExperimentSpec& spec);

/// Writes "method,snr_db,trial_count,rel_err_mean,rel_err_std,seconds_mean,
/// iterations_mean" rows with shortest-round-trip numeric formatting,
/// atomically (temp file + rename).
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

/// Shortest decimal form that round-trips the double.
std::string format_double(double v);

/// Atomic text write helper (temp file + rename in the target directory).
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace nlrt
