#pragma once

#include <string>
#include <vector>

#include "occp/harness.hpp"

namespace occp::harness {

// Tab-separated experiment reports mirroring the RQ1/RQ2/RQ3 table columns.
// Deterministic: fixed row order, no wall-clock content (timings go to stderr).

struct Rq1Options {
    std::vector<uint64_t> steps = {1, 10, 100, 1000, 10000};
    bool fast = false;  // restrict step 1 to fib only
};

std::string rq1_report(const Rq1Options& opts);

struct Rq2Options {
    std::vector<uint64_t> steps = {100, 1000};
    std::vector<double> lazy_fractions = {0.1, 0.2, 0.3, 0.4};
    int runs = 30;
    uint64_t seed = 1;
    int workers = 20;
    std::vector<std::string> benchmark_filter;  // empty: all
};

std::string rq2_report(const Rq2Options& opts);

struct Rq3Options {
    std::vector<int> multipliers = {1, 10, 100, 1000};
    int runs = 3;
    uint64_t seed = 1;
    int workers = 20;
    // Fixed-step runs at large multipliers imply millions of snapshot blobs;
    // by default those cells use the validated closed-form accounting.
    bool materialize_fixed = false;
    uint64_t materialize_budget = 20000;  // max traces for a materialized fixed run
};

std::string rq3_report(const Rq3Options& opts);

}  // namespace occp::harness
