#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mona/bundle.hpp"
#include "mona/codec.hpp"
#include "mona/interp.hpp"
#include "mona/parser.hpp"

namespace {

mona::SourceProgram load_source(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return mona::SourceProgram::from_text(buf.str());
}

int run_command(const std::string& file) {
    mona::SourceProgram src = load_source(file);
    mona::Ast ast = mona::parse(src);
    mona::ExecOutcome out = mona::execute(ast);
    std::cout << out.output;
    std::cerr << "executed expressions: " << out.state.expr_counter << "\n"
              << "final state hash: " << mona::state_hash(out.state).hex() << "\n";
    return 0;
}

int record_command(const std::string& file, uint64_t step, const std::string& out_dir) {
    mona::SourceProgram src = load_source(file);
    mona::Ast ast = mona::parse(src);
    mona::RecordResult rec = mona::record(ast, step);
    std::cout << rec.output;

    std::filesystem::path dir(out_dir);
    mona::write_recording(dir, rec, src.digest, step);
    // Stage the source and the redacted bundle next to the snapshots so the
    // recording directory is a complete certification request.
    {
        std::ofstream copy(dir / "program.mona", std::ios::trunc);
        copy << src.text;
    }
    mona::BundleResult bundle = mona::make_bundle(rec, src.digest, step);
    {
        std::ofstream manifest(dir / "bundle.json", std::ios::trunc);
        manifest << mona::bundle_manifest(bundle.redacted);
    }
    std::cerr << "expressions: " << rec.total_expressions << "\n"
              << "snapshots:   " << rec.snapshots.size() << "\n"
              << "traces:      " << bundle.redacted.traces.size() << "\n"
              << "execution hash: " << bundle.hash.h.hex() << "\n"
              << "wrote " << out_dir << "\n";
    return 0;
}

int replay_command(const std::string& snapshot_path, uint64_t steps, std::string program_path,
                   const std::string& out_path) {
    mona::SnapshotFile snap = mona::read_snapshot_file(snapshot_path);
    if (program_path.empty()) {
        program_path =
            (std::filesystem::path(snapshot_path).parent_path() / "program.mona").string();
    }
    mona::SourceProgram src = load_source(program_path);
    mona::Ast ast = mona::parse(src);
    mona::ExecOutcome out = mona::resume_snapshot(snap, ast, steps);
    std::cout << out.output;
    std::cerr << "resumed from counter " << snap.expr_counter << ", executed " << out.executed
              << " expressions\n"
              << "state hash: " << mona::state_hash(out.state).hex() << "\n";
    if (!out_path.empty()) {
        mona::SnapshotFile result;
        result.program_digest = snap.program_digest;
        result.index = snap.index + 1;
        result.expr_counter = out.state.expr_counter;
        result.is_final = false;
        result.state_bytes = mona::canonical_encode(out.state);
        mona::write_snapshot_file(out_path, result);
        std::cerr << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mona interpreter: run, record, and replay halt/resume executions"};
    app.require_subcommand(1);

    std::string file, out_dir = "recording", snapshot, program, out_path;
    uint64_t step = 1000, steps = 1;

    CLI::App* run = app.add_subcommand("run", "execute a program");
    run->add_option("file", file, "Mona source file")->required();

    CLI::App* rec = app.add_subcommand("record", "execute and snapshot every N expressions");
    rec->add_option("file", file, "Mona source file")->required();
    rec->add_option("--step", step, "expressions between snapshots")->check(CLI::PositiveNumber);
    rec->add_option("--out", out_dir, "output directory");

    CLI::App* rep = app.add_subcommand("replay", "resume from a snapshot");
    rep->add_option("--snapshot", snapshot, "snapshot file")->required();
    rep->add_option("--steps", steps, "expressions to execute")->check(CLI::PositiveNumber);
    rep->add_option("--program", program,
                    "source file (defaults to program.mona beside the snapshot)");
    rep->add_option("--out", out_path, "write the resulting state as a snapshot file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(file);
        if (rec->parsed()) return record_command(file, step, out_dir);
        if (rep->parsed()) return replay_command(snapshot, steps, program, out_path);
    } catch (const mona::SyntaxError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const mona::RuntimeError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
