#include "occp/reports.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

#include "mona/codec.hpp"
#include "mona/interp.hpp"

namespace occp::harness {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << std::fixed << v;
    return out.str();
}

}  // namespace

std::string rq1_report(const Rq1Options& opts) {
    std::ostringstream out;
    out << "benchmark\tstep\ttotal_exprs\tsnapshots\texpected_snapshots\tavg_snapshot_bytes\t"
           "replay_chain_ok\n";
    for (const BenchmarkInfo& info : benchmarks()) {
        mona::SourceProgram src = load_benchmark(info.name);
        mona::Ast ast = mona::parse(src);
        for (uint64_t step : opts.steps) {
            if (opts.fast && step == 1 && info.name != "fib") continue;
            double t0 = now_seconds();
            mona::RecordResult rec = mona::record(ast, step);
            double t1 = now_seconds();

            uint64_t bytes = 0;
            for (const auto& s : rec.snapshots) bytes += s.bytes.size();

            // Chain every trace: the replayed state must hash to the next
            // snapshot's state.
            bool chain_ok = true;
            for (size_t t = 0; t + 1 < rec.snapshots.size() && chain_ok; ++t) {
                mona::MemoryState from = mona::canonical_decode(rec.snapshots[t].bytes);
                uint64_t s = rec.snapshots[t + 1].expr_counter - rec.snapshots[t].expr_counter;
                mona::ExecOutcome got = mona::resume(ast, std::move(from), s);
                chain_ok = mona::canonical_encode(got.state) == rec.snapshots[t + 1].bytes;
            }
            double t2 = now_seconds();
            std::cerr << "rq1 " << info.name << " step=" << step << " record=" << fmt(t1 - t0)
                      << "s replay=" << fmt(t2 - t1) << "s\n";

            out << info.name << '\t' << step << '\t' << rec.total_expressions << '\t'
                << rec.snapshots.size() << '\t'
                << mona::expected_snapshot_count(rec.total_expressions, step) << '\t'
                << (rec.snapshots.empty() ? 0 : bytes / rec.snapshots.size()) << '\t'
                << (chain_ok ? "yes" : "NO") << '\n';
        }
    }
    return out.str();
}

std::string rq2_report(const Rq2Options& opts) {
    std::ostringstream out;
    out << "benchmark\tscenario\tstep\truns\tcertified\tfp_rate\tfn_rate\tmean_exec_exprs\t"
           "mean_tx\tbaseline_exec_exprs\tbaseline_fp\n";
    for (const BenchmarkInfo& info : benchmarks()) {
        if (!opts.benchmark_filter.empty()) {
            bool keep = false;
            for (const std::string& f : opts.benchmark_filter) keep = keep || f == info.name;
            if (!keep) continue;
        }
        struct Row {
            ScenarioKind kind;
            double fraction;
        };
        std::vector<Row> rows = {{ScenarioKind::Happy, 0.0}};
        for (double f : opts.lazy_fractions) rows.push_back({ScenarioKind::Lazy, f});
        rows.push_back({ScenarioKind::MaliciousUser, 0.0});
        if (info.name == "fib") rows.push_back({ScenarioKind::Era, 0.0});

        for (const Row& row : rows) {
            for (uint64_t step : opts.steps) {
                ScenarioSpec spec;
                spec.kind = row.kind;
                spec.benchmark = info.name;
                spec.lazy_fraction = row.fraction;
                spec.step = StepPolicy::fixed(step);
                spec.runs = opts.runs;
                spec.seed = opts.seed;
                spec.workers = opts.workers;
                double t0 = now_seconds();
                ScenarioAggregate agg = run_scenario(spec);
                BaselineMetrics base = run_baseline_once(spec, Rng::mix(opts.seed, step));
                std::cerr << "rq2 " << info.name << " " << scenario_name(row.kind)
                          << (row.kind == ScenarioKind::Lazy ? " " + fmt(row.fraction) : "")
                          << " step=" << step << " took " << fmt(now_seconds() - t0) << "s\n";

                std::string label = scenario_name(row.kind);
                if (row.kind == ScenarioKind::Lazy) {
                    label += std::to_string(int(row.fraction * 100 + 0.5)) + "%";
                }
                out << info.name << '\t' << label << '\t' << step << '\t' << spec.runs << '\t'
                    << agg.certified_runs << '\t' << fmt(agg.fp_rate) << '\t' << fmt(agg.fn_rate)
                    << '\t' << fmt(agg.mean_executed) << '\t' << fmt(agg.mean_tx) << '\t'
                    << base.executed_total << '\t' << (base.false_positive ? "1.0" : "0.0")
                    << '\n';
            }
        }
    }
    return out.str();
}

std::string rq3_report(const Rq3Options& opts) {
    std::ostringstream out;
    out << "benchmark\tmultiplier\tpolicy\ttotal_exprs\tstep\ttraces\texec_exprs\ttx_count\t"
           "certified\tmeasured\tbaseline_exec_exprs\n";
    for (const BenchmarkInfo& info : benchmarks()) {
        for (int mult : opts.multipliers) {
            // One probe execution pins E; the baseline is workers full runs.
            mona::SourceProgram src = load_benchmark(info.name, mult);
            mona::Ast ast = mona::parse(src);
            double t0 = now_seconds();
            mona::ExecOutcome probe = mona::execute(ast);
            std::cerr << "rq3 " << info.name << " x" << mult << " E="
                      << probe.state.expr_counter << " probe=" << fmt(now_seconds() - t0)
                      << "s\n";
            uint64_t total = probe.state.expr_counter;
            uint64_t baseline_exec = total * uint64_t(opts.workers);

            std::vector<StepPolicy> policies = {StepPolicy::make_informed(),
                                                StepPolicy::fixed(100), StepPolicy::fixed(1000)};
            for (const StepPolicy& policy : policies) {
                uint64_t step = policy.informed ? informed_step(total, opts.workers)
                                                : policy.fixed_step;
                uint64_t traces = total == 0 ? 1 : (total + step - 1) / step;
                bool materialize = policy.informed || opts.materialize_fixed ||
                                   traces <= opts.materialize_budget;
                ScaledOutcome s = run_scaled(info.name, mult, policy,
                                             Rng::mix(opts.seed, uint64_t(mult)), opts.workers,
                                             materialize);
                out << info.name << '\t' << mult << '\t' << s.policy << '\t'
                    << s.total_expressions << '\t' << s.step << '\t' << s.trace_count << '\t'
                    << s.executed_total << '\t' << s.tx_count << '\t'
                    << (s.certified ? "yes" : "NO") << '\t' << (s.measured ? "yes" : "closed-form")
                    << '\t' << baseline_exec << '\n';
            }
        }
    }
    return out.str();
}

}  // namespace occp::harness
