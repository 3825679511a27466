#include "res/pipeline.hpp"

int main(int argc, char** argv) { return res::pipeline::run_cli(argc, argv); }
