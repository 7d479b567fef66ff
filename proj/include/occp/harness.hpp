#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mona/bundle.hpp"
#include "mona/parser.hpp"
#include "occp/ledger.hpp"
#include "occp/worker.hpp"

namespace occp::harness {

// ---- benchmark corpus -------------------------------------------------------

struct BenchmarkInfo {
    std::string name;
    std::string filename;
};

const std::vector<BenchmarkInfo>& benchmarks();

// Directory holding the .mona corpus; defaults to the build-time path and can
// be overridden (CLI flag / tests).
void set_benchmark_dir(const std::filesystem::path& dir);
std::filesystem::path benchmark_dir();

// Loads a benchmark; multiplier > 1 rewrites the trailing `main();` driver
// into a while loop re-running the core computation with fresh state.
mona::SourceProgram load_benchmark(const std::string& name, int multiplier = 1);
mona::SourceProgram scale_program(const mona::SourceProgram& base, int multiplier);

struct BenchmarkCheck {
    std::string name;
    bool ok = false;
    std::string detail;
    uint64_t total_expressions = 0;
};

// Validates each benchmark's output against an independent oracle
// (recursion-free fibonacci, std::sort, naive matrix product, reference
// Floyd-Warshall, mirrored Lanczos arithmetic).
std::vector<BenchmarkCheck> run_benchmark_suite();

// ---- scenarios --------------------------------------------------------------

enum class ScenarioKind : uint8_t { Happy, Lazy, MaliciousUser, Era };

const char* scenario_name(ScenarioKind k);

struct StepPolicy {
    bool informed = false;
    uint64_t fixed_step = 1000;

    static StepPolicy fixed(uint64_t step) { return {false, step}; }
    static StepPolicy make_informed() { return {true, 0}; }
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Happy;
    std::string benchmark = "fib";
    double lazy_fraction = 0.0;
    StepPolicy step = StepPolicy::fixed(1000);
    int multiplier = 1;
    int runs = 30;
    uint64_t seed = 1;
    int workers = 20;
    int verifiers = 3;
    int max_rounds = 0;  // 0: worker count
};

struct RunMetrics {
    bool certified = false;
    bool ground_truth_valid = false;
    bool false_positive = false;
    bool false_negative = false;
    RejectReason reject_reason = RejectReason::None;
    uint64_t executed_total = 0;
    uint64_t tx_count = 0;
    int rounds_used = 0;
    uint64_t total_expressions = 0;  // E of the submitted program
    uint64_t trace_count = 0;
    uint64_t step_used = 0;
    uint64_t baseline_executed = 0;  // filled by baseline runs
    Hash32 ledger_digest;
    Hash32 transcript_digest;
};

RunMetrics run_scenario_once(const ScenarioSpec& spec, uint64_t run_seed);

struct ScenarioAggregate {
    ScenarioSpec spec;
    std::vector<RunMetrics> runs;
    int certified_runs = 0;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
    double mean_executed = 0.0;
    double mean_tx = 0.0;
};

ScenarioAggregate run_scenario(const ScenarioSpec& spec);

// Naive baseline: every worker re-executes the whole program and the majority
// vote on the stdout hash decides; up to three attempts.
struct BaselineMetrics {
    bool certified = false;
    bool false_positive = false;
    bool false_negative = false;
    uint64_t executed_total = 0;
    int attempts = 0;
    uint64_t votes = 0;
};

BaselineMetrics run_baseline_once(const ScenarioSpec& spec, uint64_t run_seed);

// ---- RQ3 --------------------------------------------------------------------

struct ScaledOutcome {
    std::string benchmark;
    int multiplier = 1;
    std::string policy;  // "informed", "fixed100", "fixed1000"
    uint64_t total_expressions = 0;
    uint64_t step = 0;
    uint64_t trace_count = 0;
    uint64_t executed_total = 0;
    uint64_t tx_count = 0;
    bool certified = false;
    bool measured = true;  // false: tx/trace counts from the validated closed form
};

ScaledOutcome run_scaled(const std::string& benchmark, int multiplier, const StepPolicy& policy,
                         uint64_t seed, int workers = 20, bool materialize = true);

// n! / 2^(n(n-1)/2): probability that a uniformly random edge configuration
// is one of the non-conflicting straight-line sequences.
double p_non_conflicting(int n);

// ---- oracles shared with tests ----------------------------------------------

mona::BigInt fibonacci_oracle(int n);
std::vector<int64_t> matmul_input(char which);                 // 'a' or 'b', 11x11 row-major
std::vector<int64_t> matmul_oracle();                          // a*b
std::vector<int64_t> floyd_input();                            // 13x13 weights, 0 diagonal
std::vector<int64_t> floyd_oracle();                           // all-pairs shortest
std::vector<int64_t> floyd_reference(const std::vector<int64_t>& w, size_t n, int64_t inf);
std::vector<double> lanczos_input();                           // 5x5 image
std::vector<double> lanczos_oracle();                          // 3x3 downsample, mirrored ops

uint64_t informed_step(uint64_t total_expressions, int workers);

}  // namespace occp::harness
