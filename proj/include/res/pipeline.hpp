#pragma once

namespace res::pipeline {

// Parses and runs one subcommand: ingest, synth, retrieve, train, predict,
// or eval. Returns the process exit code: 0 success, 1 runtime error,
// 2 usage error.
int run_cli(int argc, char** argv);

}  // namespace res::pipeline
