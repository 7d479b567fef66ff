#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mona/bundle.hpp"
#include "mona/parser.hpp"
#include "occp/harness.hpp"
#include "occp/ledger.hpp"
#include "occp/reports.hpp"
#include "occp/worker.hpp"

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

// Workspace layout: <dir>/store (blobs), <dir>/ledger.json (coordinator
// state), <dir>/ledger.log (append-only transaction text),
// <dir>/certificates/<task>.json.
struct Workspace {
    fs::path root;
    occp::DirBlobStore store;
    occp::Ledger ledger;

    explicit Workspace(const fs::path& dir)
        : root(dir), store(dir / "store"), ledger(store) {
        if (fs::exists(root / "ledger.json")) {
            ledger.load_state(read_file(root / "ledger.json"));
        }
    }

    void save() {
        write_file(root / "ledger.json", ledger.save_state());
        ledger.persist_log(root / "ledger.log");
    }
};

int submit_command(const std::string& bundle_dir, const std::string& workspace_dir,
                   int workers, int verifiers, int max_rounds, uint64_t seed) {
    fs::path dir(bundle_dir);
    mona::TraceBundle bundle = mona::parse_bundle_manifest(read_file(dir / "bundle.json"));

    Workspace ws{fs::path(workspace_dir)};

    // Stage the program and exactly the redacted inputs; the final state never
    // enters the store.
    std::string program_text = read_file(dir / "program.mona");
    occp::BlobRef program_ref = ws.store.put(program_text);
    if (program_ref.hash != bundle.program_digest) {
        throw std::runtime_error("program.mona does not match the bundle's programDigest");
    }
    for (const mona::Trace& t : bundle.traces) {
        mona::SnapshotFile snap =
            mona::read_snapshot_file(dir / (std::to_string(t.input_index) + ".snap"));
        occp::BlobRef ref = ws.store.put(snap.state_bytes);
        if (ref.hash != t.input_hash) {
            throw std::runtime_error("snapshot " + std::to_string(t.input_index) +
                                     " does not hash to the bundle's inputHash");
        }
    }

    occp::ProtocolParams params;
    params.worker_count = workers;
    params.verifier_count = verifiers;
    params.max_rounds = max_rounds;
    params.rng_seed = seed;
    occp::TaskId id = ws.ledger.submit_task(bundle, params);
    ws.save();
    std::cout << "task " << id << " submitted: " << bundle.traces.size() << " traces, claimed "
              << bundle.claimed_hash.hex() << "\n";
    return 0;
}

int certify_command(occp::TaskId task, const std::string& workspace_dir, int workers,
                    double lazy, uint64_t seed, const std::string& scenario) {
    if (scenario == "happy" && lazy != 0.0) {
        throw std::runtime_error("--scenario happy expects --lazy 0");
    }
    if (scenario == "lazy" && lazy <= 0.0) {
        throw std::runtime_error("--scenario lazy needs --lazy > 0");
    }
    // malicious / era tasks carry the adversarial claim from submission time;
    // the worker pool itself stays honest for them.

    Workspace ws{fs::path(workspace_dir)};
    const occp::Task& t = ws.ledger.task(task);
    std::vector<uint8_t> program_bytes = ws.store.get(t.program_ref);
    mona::SourceProgram src = mona::SourceProgram::from_text(
        std::string(program_bytes.begin(), program_bytes.end()));
    mona::Ast ast = mona::parse(src);

    std::vector<occp::WorkerProfile> profiles = occp::make_profiles(workers, lazy, seed);
    occp::PoolResult result = occp::run_pool(ws.ledger, task, profiles, ws.store, ast);

    fs::create_directories(ws.root / "certificates");
    if (result.certificate) {
        write_file(ws.root / "certificates" / (std::to_string(task) + ".json"),
                   occp::certificate_document(*result.certificate));
    }
    ws.save();

    std::cout << "task " << task << ": " << occp::status_name(result.status);
    if (result.status == occp::TaskStatus::Rejected) {
        std::cout << " (" << occp::reject_reason_name(result.reject_reason) << ")";
    }
    std::cout << "\nexecuted expressions: " << result.executed_total
              << "\nledger transactions:  " << result.metrics.tx_count
              << "\nrounds used:          " << result.metrics.rounds_used << "\n";
    if (result.certificate) {
        std::cout << "certificate: "
                  << (ws.root / "certificates" / (std::to_string(task) + ".json")).string() << "\n";
    }
    return result.status == occp::TaskStatus::Certified ? 0 : 2;
}

int bench_command(int rq, int runs, const std::string& out_file, uint64_t seed, int workers,
                  bool fast, bool materialize_fixed, const std::string& bench_dir) {
    if (!bench_dir.empty()) occp::harness::set_benchmark_dir(bench_dir);
    std::string report;
    if (rq == 1) {
        occp::harness::Rq1Options opts;
        opts.fast = fast;
        report = occp::harness::rq1_report(opts);
    } else if (rq == 2) {
        occp::harness::Rq2Options opts;
        opts.runs = runs;
        opts.seed = seed;
        opts.workers = workers;
        report = occp::harness::rq2_report(opts);
    } else if (rq == 3) {
        occp::harness::Rq3Options opts;
        opts.runs = runs;
        opts.seed = seed;
        opts.workers = workers;
        opts.materialize_fixed = materialize_fixed;
        report = occp::harness::rq3_report(opts);
    } else {
        throw std::runtime_error("--rq must be 1, 2, or 3");
    }
    std::string path = out_file.empty() ? "occp-rq" + std::to_string(rq) + ".tsv" : out_file;
    write_file(path, report);
    std::cout << report;
    std::cerr << "wrote " << path << "\n";
    return 0;
}

int check_command(const std::string& bench_dir) {
    if (!bench_dir.empty()) occp::harness::set_benchmark_dir(bench_dir);
    bool ok = true;
    for (const auto& check : occp::harness::run_benchmark_suite()) {
        std::cout << (check.ok ? "pass" : "FAIL") << "\t" << check.name << "\t"
                  << check.total_expressions << " expressions";
        if (!check.ok) std::cout << "\t" << check.detail;
        std::cout << "\n";
        ok = ok && check.ok;
    }
    // A fast end-to-end sanity pass over the protocol on one benchmark.
    using namespace occp::harness;
    ScenarioSpec happy;
    happy.benchmark = "fib_iter";
    happy.step = StepPolicy::fixed(100);
    RunMetrics h = run_scenario_once(happy, 1);
    std::cout << (h.certified && h.executed_total == h.total_expressions ? "pass" : "FAIL")
              << "\thappy certification\n";
    ok = ok && h.certified && h.executed_total == h.total_expressions;

    ScenarioSpec mal = happy;
    mal.kind = ScenarioKind::MaliciousUser;
    RunMetrics m = run_scenario_once(mal, 1);
    std::cout << (!m.certified ? "pass" : "FAIL") << "\tmalicious rejection\n";
    ok = ok && !m.certified;

    ScenarioSpec era;
    era.kind = ScenarioKind::Era;
    era.benchmark = "fib";
    era.step = StepPolicy::fixed(100);
    RunMetrics e = run_scenario_once(era, 1);
    BaselineMetrics base = run_baseline_once(era, 1);
    std::cout << (!e.certified && base.false_positive ? "pass" : "FAIL")
              << "\tera rejected while the naive baseline accepts\n";
    ok = ok && !e.certified && base.false_positive;

    std::cout << (ok ? "all checks passed" : "CHECKS FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OCCP: distributed certification of recorded Mona executions"};
    app.require_subcommand(1);

    std::string bundle_dir, workspace_dir = ".occp", out_file, bench_dir;
    occp::TaskId task = 0;
    int workers = 20, verifiers = 3, max_rounds = 0, runs = 30, rq = 2;
    double lazy = 0.0;
    uint64_t seed = 1;
    std::string scenario = "happy";
    bool fast = false, materialize_fixed = false;

    CLI::App* submit = app.add_subcommand("submit", "register a recorded bundle as a task");
    submit->add_option("--bundle", bundle_dir, "directory written by `mona record`")->required();
    submit->add_option("--workspace", workspace_dir, "coordinator state directory");
    submit->add_option("--workers", workers, "worker pool size");
    submit->add_option("--verifiers", verifiers, "logical verifiers per round");
    submit->add_option("--max-rounds", max_rounds, "0 = worker count");
    submit->add_option("--seed", seed, "trace shuffle seed");

    CLI::App* certify = app.add_subcommand("certify", "drive the worker pool on a task");
    certify->add_option("--task", task, "task id")->required();
    certify->add_option("--workspace", workspace_dir, "coordinator state directory");
    certify->add_option("--workers", workers, "worker pool size");
    certify->add_option("--lazy", lazy, "fraction of lazy workers");
    certify->add_option("--seed", seed, "worker behavior seed");
    certify->add_option("--scenario", scenario, "happy|lazy|malicious|era")
        ->check(CLI::IsMember({"happy", "lazy", "malicious", "era"}));

    CLI::App* bench = app.add_subcommand("bench", "run the RQ experiment matrices");
    bench->add_option("--rq", rq, "1, 2, or 3")->required();
    bench->add_option("--runs", runs, "seeded runs per configuration");
    bench->add_option("--out", out_file, "report file (tab separated)");
    bench->add_option("--seed", seed, "base seed");
    bench->add_option("--workers", workers, "worker pool size");
    bench->add_flag("--fast", fast, "rq1: restrict step 1 to fib");
    bench->add_flag("--materialize-fixed", materialize_fixed,
                    "rq3: run fixed-step cells even when they imply huge snapshot sets");
    bench->add_option("--benchmark-dir", bench_dir, "override the benchmark corpus directory");

    CLI::App* check = app.add_subcommand("check", "validate the corpus and core protocol properties");
    check->add_option("--benchmark-dir", bench_dir, "override the benchmark corpus directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (submit->parsed()) {
            return submit_command(bundle_dir, workspace_dir, workers, verifiers, max_rounds, seed);
        }
        if (certify->parsed()) {
            return certify_command(task, workspace_dir, workers, lazy, seed, scenario);
        }
        if (bench->parsed()) {
            return bench_command(rq, runs, out_file, seed, workers, fast, materialize_fixed,
                                 bench_dir);
        }
        if (check->parsed()) return check_command(bench_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
