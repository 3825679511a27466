#include <doctest.h>

#include <cstdlib>
#include <string>

#include "res/textio.hpp"
#include "test_util.hpp"

using namespace res;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the installed binary with the given arguments, capturing both streams.
RunResult run_cli(const test::TempDir& tmp, const std::string& args) {
    static int n = 0;
    const std::string out_path = tmp.file("stdout_" + std::to_string(n));
    const std::string err_path = tmp.file("stderr_" + std::to_string(n));
    ++n;
    const std::string cmd = std::string("\"") + RES_BINARY_PATH + "\" " + args + " > " + out_path +
                            " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (file_exists(out_path)) r.out = read_file(out_path);
    if (file_exists(err_path)) r.err = read_file(err_path);
    return r;
}

}  // namespace

TEST_CASE("usage errors exit 2, runtime errors exit 1") {
    test::TempDir tmp("cli_err");
    CHECK(run_cli(tmp, "").code == 2);
    CHECK(run_cli(tmp, "frobnicate").code == 2);
    CHECK(run_cli(tmp, "retrieve").code == 2);  // missing required options
    CHECK(run_cli(tmp, "--help").code == 0);

    RunResult r = run_cli(tmp, "retrieve --data " + tmp.file("nowhere") + " --out " +
                                   tmp.file("c.jsonl"));
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);

    r = run_cli(tmp, "synth --out " + tmp.file("w") + " --level medium");
    CHECK(r.code == 1);
    CHECK(r.err.find("medium") != std::string::npos);
}

TEST_CASE("the full pipeline runs end to end on a tiny world") {
    test::TempDir tmp("cli_pipe");
    const std::string world = tmp.file("world");
    const std::string cands = tmp.file("cands.jsonl");
    const std::string run = tmp.file("run");
    const std::string preds = tmp.file("preds.jsonl");
    const std::string report = tmp.file("report");

    // a config that shrinks the encoder far below the desk preset
    write_file_atomic(tmp.file("tiny.cfg"),
                      "[encoder]\n"
                      "hidden = 32\n"
                      "layers = 1\n"
                      "heads = 2\n"
                      "max_positions = 128\n"
                      "max_segment_len = 24\n"
                      "[tokenizer]\n"
                      "max_merges = 200\n"
                      "[train]\n"
                      "epochs = 2\n"
                      "batch_size = 4\n"
                      "candidates = 4\n");

    RunResult r = run_cli(tmp, "synth --out " + world +
                                   " --seed 5 --domains 4 --entities 6 --mentions 8");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("4 domains") != std::string::npos);

    r = run_cli(tmp, "retrieve --data " + world + " --out " + cands + " --k 4");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("recall@4") != std::string::npos);

    r = run_cli(tmp, "train --data " + world + " --candidates " + cands + " --out " + run +
                         " --preset desk --config " + tmp.file("tiny.cfg") +
                         " --seed 11 --quiet");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("trained res") != std::string::npos);
    CHECK(file_exists(run + "/best.ckpt"));
    CHECK(file_exists(run + "/final.ckpt"));
    CHECK(file_exists(run + "/loss_curve.tsv"));

    r = run_cli(tmp, "predict --data " + world + " --candidates " + cands + " --ckpt " + run +
                         "/final.ckpt --out " + preds + " --split test --system res");
    REQUIRE(r.code == 0);
    CHECK(file_exists(preds));

    // asserting the wrong system kind on the checkpoint is an error
    r = run_cli(tmp, "predict --data " + world + " --candidates " + cands + " --ckpt " + run +
                         "/final.ckpt --out " + tmp.file("x.jsonl") + " --system cross-encoder");
    CHECK(r.code == 1);
    CHECK(r.err.find("cross-encoder") != std::string::npos);

    r = run_cli(tmp, "eval --data " + world + " --candidates " + cands + " --pred " + preds +
                         " --k 4 --split test --label tiny --out " + report +
                         " --scaling 1,2,4 --ckpt " + run + "/final.ckpt");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("label: tiny") != std::string::npos);
    CHECK(r.out.find("macro:") != std::string::npos);
    CHECK(r.out.find("scaling:") != std::string::npos);
    CHECK(file_exists(report + "/report.txt"));
    CHECK(file_exists(report + "/report.jsonl"));
    CHECK(file_exists(report + "/scaling.tsv"));
    CHECK(file_exists(report + "/scaling_normalized.svg"));
    CHECK(file_exists(report + "/scaling_unnormalized.svg"));

    // k=1 on the scaling curve must be exactly 1.0 normalized
    const std::string tsv = read_file(report + "/scaling.tsv");
    CHECK(tsv.find("1\t") != std::string::npos);
    CHECK(tsv.find("1.000000") != std::string::npos);

    // prediction is deterministic: a second pass writes identical bytes
    const std::string again = tmp.file("preds2.jsonl");
    r = run_cli(tmp, "predict --data " + world + " --candidates " + cands + " --ckpt " + run +
                         "/final.ckpt --out " + again + " --split test");
    REQUIRE(r.code == 0);
    CHECK(read_file(preds) == read_file(again));

    // diffing a file against itself reports zero disagreements
    r = run_cli(tmp, "eval --data " + world + " --candidates " + cands + " --pred " + preds +
                         " --k 4 --split test --diff " + preds);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# disagreements: 0") != std::string::npos);
}

TEST_CASE("synth worlds and retrieval are seed deterministic through the cli") {
    test::TempDir tmp("cli_det");
    const std::string w1 = tmp.file("w1");
    const std::string w2 = tmp.file("w2");
    REQUIRE(run_cli(tmp, "synth --out " + w1 + " --seed 9 --domains 3 --entities 5 --mentions 4")
                .code == 0);
    REQUIRE(run_cli(tmp, "synth --out " + w2 + " --seed 9 --domains 3 --entities 5 --mentions 4")
                .code == 0);
    CHECK(read_file(w1 + "/mentions.jsonl") == read_file(w2 + "/mentions.jsonl"));
    CHECK(read_file(w1 + "/entities.jsonl") == read_file(w2 + "/entities.jsonl"));

    const std::string w3 = tmp.file("w3");
    REQUIRE(run_cli(tmp, "synth --out " + w3 + " --seed 10 --domains 3 --entities 5 --mentions 4")
                .code == 0);
    CHECK(read_file(w1 + "/mentions.jsonl") != read_file(w3 + "/mentions.jsonl"));

    const std::string c1 = tmp.file("c1.jsonl");
    const std::string c2 = tmp.file("c2.jsonl");
    REQUIRE(run_cli(tmp, "retrieve --data " + w1 + " --out " + c1 + " --k 3").code == 0);
    REQUIRE(run_cli(tmp, "retrieve --data " + w1 + " --out " + c2 + " --k 3").code == 0);
    CHECK(read_file(c1) == read_file(c2));
}
